//! Log mel filterbank frontend: framing, Hann-windowed power spectrum,
//! triangular HTK-mel filters, log compression and regression deltas.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::spectrogram::{FeatureMatrix, Spectrogram};
use super::wav::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontendConfig {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub fft_size: usize,
    pub nu: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub log_floor: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            window_ms: 25.0,
            hop_ms: 10.0,
            fft_size: 512,
            nu: 80,
            fmin_hz: 20.0,
            fmax_hz: 7600.0,
            log_floor: 1e-10,
        }
    }
}

impl FrontendConfig {
    pub fn window_samples(&self, sample_rate_hz: u32) -> usize {
        (self.window_ms * f64::from(sample_rate_hz) / 1000.0).round() as usize
    }

    pub fn hop_samples(&self, sample_rate_hz: u32) -> usize {
        (self.hop_ms * f64::from(sample_rate_hz) / 1000.0).round() as usize
    }

    pub fn validate(&self, sample_rate_hz: u32) -> Result<()> {
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        if !(0.0 < self.fmin_hz && self.fmin_hz < self.fmax_hz && self.fmax_hz <= nyquist) {
            return Err(Error::Config(format!(
                "need 0 < fmin ({}) < fmax ({}) <= {nyquist}",
                self.fmin_hz, self.fmax_hz
            )));
        }
        if self.nu == 0 {
            return Err(Error::Config("nu must be at least 1".into()));
        }
        if !(self.hop_ms > 0.0 && self.window_ms >= self.hop_ms) {
            return Err(Error::Config(format!(
                "need window_ms ({}) >= hop_ms ({}) > 0",
                self.window_ms, self.hop_ms
            )));
        }
        if !self.fft_size.is_power_of_two() {
            return Err(Error::Config(format!("fft_size {} is not a power of two", self.fft_size)));
        }
        let window = self.window_samples(sample_rate_hz);
        if window == 0 || window > self.fft_size {
            return Err(Error::Config(format!(
                "window of {window} samples does not fit fft_size {}",
                self.fft_size
            )));
        }
        if self.hop_samples(sample_rate_hz) == 0 {
            return Err(Error::Config("hop rounds to zero samples".into()));
        }
        if self.log_floor.is_nan() || self.log_floor <= 0.0 {
            return Err(Error::Config("log_floor must be positive".into()));
        }
        Ok(())
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// The ν + 2 filter edge frequencies, equally spaced on the mel scale.
fn mel_edges(nu: usize, fmin_hz: f64, fmax_hz: f64) -> Vec<f64> {
    let lo = hz_to_mel(fmin_hz);
    let hi = hz_to_mel(fmax_hz);
    let step = (hi - lo) / (nu + 1) as f64;
    (0..nu + 2).map(|i| mel_to_hz(lo + step * i as f64)).collect()
}

/// Peak frequency of each of the `nu` triangular filters.
pub fn mel_center_frequencies(nu: usize, fmin_hz: f64, fmax_hz: f64) -> Vec<f64> {
    let edges = mel_edges(nu, fmin_hz, fmax_hz);
    edges[1..=nu].to_vec()
}

/// Unit-peak triangular filters over the `fft_size / 2 + 1` power bins,
/// one row per channel.
pub fn mel_filterbank(cfg: &FrontendConfig, sample_rate_hz: u32) -> Vec<Vec<f64>> {
    let bins = cfg.fft_size / 2 + 1;
    let bin_hz = f64::from(sample_rate_hz) / cfg.fft_size as f64;
    let edges = mel_edges(cfg.nu, cfg.fmin_hz, cfg.fmax_hz);
    edges
        .windows(3)
        .map(|e| {
            let (left, center, right) = (e[0], e[1], e[2]);
            (0..bins)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    let up = (f - left) / (center - left);
                    let down = (right - f) / (right - center);
                    up.min(down).max(0.0)
                })
                .collect()
        })
        .collect()
}

fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
        .collect()
}

/// Reusable frontend: the filterbank, window and FFT plan are built once.
pub struct LogMelFrontend {
    cfg: FrontendConfig,
    sample_rate_hz: u32,
    window: Vec<f64>,
    hop: usize,
    filters: Vec<Vec<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl LogMelFrontend {
    pub fn new(cfg: FrontendConfig, sample_rate_hz: u32) -> Result<Self> {
        cfg.validate(sample_rate_hz)?;
        let window = hann(cfg.window_samples(sample_rate_hz));
        let hop = cfg.hop_samples(sample_rate_hz);
        let filters = mel_filterbank(&cfg, sample_rate_hz);
        let fft = FftPlanner::new().plan_fft_forward(cfg.fft_size);
        Ok(Self {
            cfg,
            sample_rate_hz,
            window,
            hop,
            filters,
            fft,
        })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    pub fn num_frames(&self, samples: usize) -> usize {
        if samples < self.window.len() {
            0
        } else {
            1 + (samples - self.window.len()) / self.hop
        }
    }

    pub fn compute(&self, audio: &AudioBuffer) -> Result<Spectrogram> {
        if audio.sample_rate_hz() != self.sample_rate_hz {
            return Err(Error::Config(format!(
                "frontend built for {} Hz, audio is {} Hz",
                self.sample_rate_hz,
                audio.sample_rate_hz()
            )));
        }
        let samples = audio.samples();
        let tau = self.num_frames(samples.len());
        if tau == 0 {
            return Err(Error::EmptyInput {
                samples: samples.len(),
                window: self.window.len(),
            });
        }
        let nu = self.cfg.nu;
        let n_fft = self.cfg.fft_size;
        let mut values = vec![0f32; nu * tau];
        let mut buf = vec![Complex::new(0.0, 0.0); n_fft];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut power = vec![0f64; n_fft / 2 + 1];
        for t in 0..tau {
            let frame = &samples[t * self.hop..t * self.hop + self.window.len()];
            buf.fill(Complex::new(0.0, 0.0));
            for ((slot, &s), &w) in buf.iter_mut().zip(frame).zip(&self.window) {
                slot.re = f64::from(s) * w;
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (p, c) in power.iter_mut().zip(&buf) {
                *p = c.norm_sqr();
            }
            for (f, filter) in self.filters.iter().enumerate() {
                let energy: f64 = filter.iter().zip(&power).map(|(w, p)| w * p).sum();
                values[f * tau + t] = energy.max(self.cfg.log_floor).ln() as f32;
            }
        }
        Spectrogram::new(nu, tau, values)
    }
}

/// Unnormalized ν×τ log mel spectrogram of `audio`.
pub fn log_mel(audio: &AudioBuffer, cfg: &FrontendConfig) -> Result<Spectrogram> {
    LogMelFrontend::new(cfg.clone(), audio.sample_rate_hz())?.compute(audio)
}

/// Regression delta along time, `window` frames either side, edges replicated.
fn regression_delta(rows: &[f32], nu: usize, tau: usize, window: usize) -> Vec<f32> {
    let denom = 2.0 * (1..=window).map(|n| (n * n) as f64).sum::<f64>();
    let mut out = vec![0f32; nu * tau];
    for f in 0..nu {
        let row = &rows[f * tau..(f + 1) * tau];
        for t in 0..tau {
            let mut acc = 0f64;
            for n in 1..=window {
                let ahead = row[(t + n).min(tau - 1)];
                let behind = row[t.saturating_sub(n)];
                acc += n as f64 * (f64::from(ahead) - f64::from(behind));
            }
            out[f * tau + t] = (acc / denom) as f32;
        }
    }
    out
}

/// Appends delta and delta-delta blocks, yielding a τ×3ν time-major matrix.
pub fn add_deltas(spec: &Spectrogram, window: usize) -> Result<FeatureMatrix> {
    if window == 0 {
        return Err(Error::Domain("delta window must be at least 1".into()));
    }
    let (nu, tau) = (spec.nu(), spec.tau());
    let delta = regression_delta(spec.values(), nu, tau, window);
    let delta2 = regression_delta(&delta, nu, tau, window);
    let cols = 3 * nu;
    let mut values = vec![0f32; tau * cols];
    for t in 0..tau {
        let frame = &mut values[t * cols..(t + 1) * cols];
        for f in 0..nu {
            frame[f] = spec.get(f, t);
            frame[nu + f] = delta[f * tau + t];
            frame[2 * nu + f] = delta2[f * tau + t];
        }
    }
    FeatureMatrix::new(tau, cols, values)
}
