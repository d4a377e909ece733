//! Training-side arithmetic: learning-rate schedules, the weight-noise
//! switch, label smoothing and shallow-fusion scoring.

mod fusion;
mod schedule;
mod smoothing;

pub use fusion::{fused_score, grid_search_fusion, rank_hypotheses, FusionWeights, HypothesisScore};
pub use schedule::{
    lr_at_step, noise_active, ScheduleParams, DECAY_FLOOR_RATIO, DEFAULT_PEAK_LR, WEIGHT_NOISE_STD,
};
pub use smoothing::{smooth_labels, SmoothingSpec};
