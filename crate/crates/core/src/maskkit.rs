//! Frequency and time masking.
//!
//! Widths are drawn uniformly from the integers `0..=cap`, starts uniformly
//! from `[0, len - width)`, and the band is filled with 0. Input must be
//! normalized so that 0 is the mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featio::Spectrogram;
use crate::policy::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreqMaskParams {
    /// Maximum width `F`.
    pub max_width: usize,
    /// Number of masks `m_F`.
    pub count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeMaskParams {
    /// Maximum width `T`.
    pub max_width: usize,
    /// Upper bound on width as a fraction `p` of the utterance length.
    pub max_fraction: f64,
    /// Number of masks `m_T`.
    pub count: usize,
}

impl TimeMaskParams {
    /// Largest width a mask may take on an utterance of `tau` frames:
    /// `min(T, floor(p * tau), tau - 1)`.
    pub fn cap(&self, tau: usize) -> usize {
        let by_fraction = (self.max_fraction * tau as f64).floor().max(0.0) as usize;
        self.max_width.min(by_fraction).min(tau.saturating_sub(1))
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.max_fraction) {
            return Err(Error::Policy(format!("p = {} is outside [0, 1]", self.max_fraction)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Frequency,
    Time,
}

/// One applied mask: `width` rows (frequency) or columns (time) from `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub axis: Axis,
    pub start: usize,
    pub width: usize,
}

impl MaskRecord {
    pub fn contains(&self, freq: usize, time: usize) -> bool {
        let idx = match self.axis {
            Axis::Frequency => freq,
            Axis::Time => time,
        };
        (self.start..self.start + self.width).contains(&idx)
    }
}

fn draw_band(len: usize, cap: usize, rng: &mut RngStream) -> (usize, usize) {
    let width = rng.uniform_usize(0, cap);
    let start = rng.uniform_usize(0, len - width - 1);
    (start, width)
}

fn zero_rows(values: &mut [f32], tau: usize, start: usize, width: usize) {
    values[start * tau..(start + width) * tau].fill(0.0);
}

fn zero_cols(values: &mut [f32], tau: usize, start: usize, width: usize) {
    for row in values.chunks_exact_mut(tau) {
        row[start..start + width].fill(0.0);
    }
}

fn require_normalized(spec: &Spectrogram) -> Result<()> {
    if spec.is_normalized() {
        Ok(())
    } else {
        Err(Error::NotNormalized)
    }
}

fn freq_masks_in_place(spec: &mut Spectrogram, params: FreqMaskParams, rng: &mut RngStream, records: &mut Vec<MaskRecord>) {
    let (nu, tau) = (spec.nu(), spec.tau());
    let cap = params.max_width.min(nu - 1);
    for _ in 0..params.count {
        let (start, width) = draw_band(nu, cap, rng);
        zero_rows(spec.values_mut(), tau, start, width);
        records.push(MaskRecord {
            axis: Axis::Frequency,
            start,
            width,
        });
    }
}

fn time_masks_in_place(spec: &mut Spectrogram, params: TimeMaskParams, rng: &mut RngStream, records: &mut Vec<MaskRecord>) {
    let tau = spec.tau();
    let cap = params.cap(tau);
    for _ in 0..params.count {
        let (start, width) = draw_band(tau, cap, rng);
        zero_cols(spec.values_mut(), tau, start, width);
        records.push(MaskRecord {
            axis: Axis::Time,
            start,
            width,
        });
    }
}

/// Applies `m_F` frequency masks of width at most `min(F, ν - 1)`.
pub fn freq_mask(spec: &Spectrogram, params: FreqMaskParams, rng: &mut RngStream) -> Result<(Spectrogram, Vec<MaskRecord>)> {
    require_normalized(spec)?;
    let mut out = spec.clone();
    let mut records = Vec::with_capacity(params.count);
    freq_masks_in_place(&mut out, params, rng, &mut records);
    Ok((out, records))
}

/// Applies `m_T` time masks of width at most [`TimeMaskParams::cap`].
pub fn time_mask(spec: &Spectrogram, params: TimeMaskParams, rng: &mut RngStream) -> Result<(Spectrogram, Vec<MaskRecord>)> {
    require_normalized(spec)?;
    params.validate()?;
    let mut out = spec.clone();
    let mut records = Vec::with_capacity(params.count);
    time_masks_in_place(&mut out, params, rng, &mut records);
    Ok((out, records))
}

/// Frequency masks, then time masks, drawing from one stream.
pub fn apply_masks(
    spec: &Spectrogram,
    fparams: FreqMaskParams,
    tparams: TimeMaskParams,
    rng: &mut RngStream,
) -> Result<(Spectrogram, Vec<MaskRecord>)> {
    require_normalized(spec)?;
    tparams.validate()?;
    let mut out = spec.clone();
    let mut records = Vec::with_capacity(fparams.count + tparams.count);
    freq_masks_in_place(&mut out, fparams, rng, &mut records);
    time_masks_in_place(&mut out, tparams, rng, &mut records);
    Ok((out, records))
}
