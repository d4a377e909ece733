//! Spectrogram augmentation: time warping, frequency masking and time
//! masking of log mel features, the named LB/LD/SM/SS policies, a log mel
//! frontend, and the learning-rate / label-smoothing / shallow-fusion
//! arithmetic used alongside them in training.
//!
//! All augmentation is deterministic given a seed: see [`policy::split_stream`].

pub mod error;
pub mod featio;
pub mod maskkit;
pub mod policy;
pub mod trainmath;
pub mod warpkit;

pub use error::{Error, Result};
pub use featio::{AudioBuffer, FeatureMatrix, FrontendConfig, Spectrogram};
pub use maskkit::{Axis, FreqMaskParams, MaskRecord, TimeMaskParams};
pub use policy::{augment, preset, split_stream, AugmentAudit, Policy, RngStream};
