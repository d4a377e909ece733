//! Audio ingestion, the log mel frontend and feature-matrix file I/O.

mod frontend;
mod npy;
mod spectrogram;
mod wav;

pub use frontend::{
    add_deltas, hz_to_mel, log_mel, mel_center_frequencies, mel_filterbank, mel_to_hz, FrontendConfig,
    LogMelFrontend,
};
pub use npy::{read_feature_file, read_npy, write_feature_file, write_npy, NpyMatrix, MAGIC as NPY_MAGIC};
pub use spectrogram::{FeatureMatrix, Spectrogram, ZERO_MEAN_TOLERANCE};
pub use wav::{load_wav, read_wav, AudioBuffer};
