use crate::error::{Error, Result};

/// Largest |mean| for which a matrix counts as zero-mean.
pub const ZERO_MEAN_TOLERANCE: f64 = 1e-5;

/// A ν×τ matrix of log mel energies, stored channel-major
/// (`values[f * tau + t]`), plus normalization metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    values: Vec<f32>,
    nu: usize,
    tau: usize,
    mean_offset: f64,
    normalized: bool,
}

impl Spectrogram {
    /// Builds an unnormalized spectrogram from channel-major values.
    pub fn new(nu: usize, tau: usize, values: Vec<f32>) -> Result<Self> {
        if nu == 0 || tau == 0 {
            return Err(Error::Shape(format!("spectrogram must be non-empty, got {nu}x{tau}")));
        }
        if values.len() != nu * tau {
            return Err(Error::Shape(format!(
                "{} values do not fill a {nu}x{tau} spectrogram",
                values.len()
            )));
        }
        Ok(Self {
            values,
            nu,
            tau,
            mean_offset: 0.0,
            normalized: false,
        })
    }

    /// Builds a spectrogram from a `(tau, nu)` time-major buffer, the on-disk layout.
    pub fn from_time_major(tau: usize, nu: usize, values: &[f32]) -> Result<Self> {
        if values.len() != nu * tau {
            return Err(Error::Shape(format!(
                "{} values do not fill a {tau}x{nu} time-major matrix",
                values.len()
            )));
        }
        let mut out = vec![0.0; values.len()];
        for t in 0..tau {
            for f in 0..nu {
                out[f * tau + t] = values[t * nu + f];
            }
        }
        Self::new(nu, tau, out)
    }

    /// Wraps values that are already zero-mean (e.g. read back from a
    /// normalized feature file). Fails if the mean is not within
    /// [`ZERO_MEAN_TOLERANCE`] of 0.
    pub fn assume_normalized(mut self, mean_offset: f64) -> Result<Self> {
        let mean = self.mean();
        if mean.abs() >= ZERO_MEAN_TOLERANCE {
            return Err(Error::Shape(format!("matrix mean {mean:e} is not zero")));
        }
        self.mean_offset = mean_offset;
        self.normalized = true;
        Ok(self)
    }

    /// Subtracts the whole-matrix mean, recording it in `mean_offset`.
    pub fn normalize(&self) -> Result<Self> {
        if self.normalized {
            return Err(Error::AlreadyNormalized);
        }
        let mean = self.mean();
        let values = self.values.iter().map(|&v| (f64::from(v) - mean) as f32).collect();
        Ok(Self {
            values,
            nu: self.nu,
            tau: self.tau,
            mean_offset: mean,
            normalized: true,
        })
    }

    /// Adds `mean_offset` back, inverting [`Spectrogram::normalize`].
    pub fn denormalize(&self) -> Self {
        let offset = self.mean_offset;
        Self {
            values: self.values.iter().map(|&v| (f64::from(v) + offset) as f32).collect(),
            nu: self.nu,
            tau: self.tau,
            mean_offset: 0.0,
            normalized: false,
        }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    #[inline]
    pub fn get(&self, freq: usize, time: usize) -> f32 {
        self.values[freq * self.tau + time]
    }

    pub fn row(&self, freq: usize) -> &[f32] {
        &self.values[freq * self.tau..(freq + 1) * self.tau]
    }

    /// Arithmetic mean over every entry, accumulated in f64.
    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| f64::from(v)).sum::<f64>() / self.values.len() as f64
    }

    /// Copies the values out in `(tau, nu)` time-major order.
    pub fn to_time_major(&self) -> Vec<f32> {
        let mut out = vec![0.0; self.values.len()];
        for f in 0..self.nu {
            for t in 0..self.tau {
                out[t * self.nu + f] = self.values[f * self.tau + t];
            }
        }
        out
    }

    /// Same shape and metadata, new values. Used by the augmentation stages,
    /// which never change dimensions or the normalization state.
    pub(crate) fn with_values(&self, values: Vec<f32>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            nu: self.nu,
            tau: self.tau,
            mean_offset: self.mean_offset,
            normalized: self.normalized,
        }
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }
}

/// A τ×D time-major matrix whose columns are the static channels followed
/// by their delta and delta-delta blocks (D = 3ν).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f32>,
    rows: usize,
    cols: usize,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f32>) -> Result<Self> {
        if cols == 0 || !cols.is_multiple_of(3) {
            return Err(Error::Shape(format!("feature width {cols} is not a positive multiple of 3")));
        }
        if rows == 0 || values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values do not fill a {rows}x{cols} feature matrix",
                values.len()
            )));
        }
        Ok(Self { values, rows, cols })
    }

    /// Number of frames (τ).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Feature width, 3ν.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn channels(&self) -> usize {
        self.cols / 3
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        &self.values[t * self.cols..(t + 1) * self.cols]
    }

    pub fn statics(&self, t: usize) -> &[f32] {
        let nu = self.channels();
        &self.frame(t)[..nu]
    }

    pub fn deltas(&self, t: usize) -> &[f32] {
        let nu = self.channels();
        &self.frame(t)[nu..2 * nu]
    }

    pub fn delta_deltas(&self, t: usize) -> &[f32] {
        let nu = self.channels();
        &self.frame(t)[2 * nu..]
    }
}
