use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Peak learning rate used with the named schedules.
pub const DEFAULT_PEAK_LR: f64 = 1e-3;
/// Ratio of the final to the peak learning rate.
pub const DECAY_FLOOR_RATIO: f64 = 0.01;
/// Standard deviation of the variational weight noise switched on at `s_noise`.
/// Recorded for reference only; nothing here samples weight noise.
pub const WEIGHT_NOISE_STD: f64 = 0.075;

/// Ramp-up / hold / exponential-decay schedule.
///
/// The learning rate ramps linearly from 0 to `peak_lr` over `[0, s_r]`,
/// holds until `s_i`, decays exponentially to `peak_lr * decay_floor_ratio`
/// at `s_f`, and stays there. Weight noise turns on at `s_noise`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleParams {
    pub s_r: u64,
    pub s_noise: u64,
    pub s_i: u64,
    pub s_f: u64,
    #[serde(default = "default_peak")]
    pub peak_lr: f64,
    #[serde(default = "default_floor")]
    pub decay_floor_ratio: f64,
}

fn default_peak() -> f64 {
    DEFAULT_PEAK_LR
}

fn default_floor() -> f64 {
    DECAY_FLOOR_RATIO
}

impl ScheduleParams {
    pub fn new(s_r: u64, s_noise: u64, s_i: u64, s_f: u64, peak_lr: f64) -> Result<Self> {
        let sched = Self {
            s_r,
            s_noise,
            s_i,
            s_f,
            peak_lr,
            decay_floor_ratio: DECAY_FLOOR_RATIO,
        };
        sched.validate()?;
        Ok(sched)
    }

    /// Basic: (0.5k, 10k, 20k, 80k).
    pub fn basic() -> Self {
        Self::new(500, 10_000, 20_000, 80_000, DEFAULT_PEAK_LR).expect("valid")
    }

    /// Double: (1k, 20k, 40k, 160k).
    pub fn double() -> Self {
        Self::new(1_000, 20_000, 40_000, 160_000, DEFAULT_PEAK_LR).expect("valid")
    }

    /// Long: (1k, 20k, 140k, 320k).
    pub fn long() -> Self {
        Self::new(1_000, 20_000, 140_000, 320_000, DEFAULT_PEAK_LR).expect("valid")
    }

    /// `B`, `D` or `L` (case-insensitive, full names accepted).
    pub fn named(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "b" | "basic" => Ok(Self::basic()),
            "d" | "double" => Ok(Self::double()),
            "l" | "long" => Ok(Self::long()),
            _ => Err(Error::Schedule(format!("unknown schedule `{name}`, expected B, D or L"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0 < self.s_r && self.s_r <= self.s_noise && self.s_noise <= self.s_i && self.s_i < self.s_f) {
            return Err(Error::Schedule(format!(
                "need 0 < s_r <= s_noise <= s_i < s_f, got ({}, {}, {}, {})",
                self.s_r, self.s_noise, self.s_i, self.s_f
            )));
        }
        if !(self.peak_lr > 0.0 && self.peak_lr.is_finite()) {
            return Err(Error::Schedule(format!("peak learning rate {} must be positive", self.peak_lr)));
        }
        if !(self.decay_floor_ratio > 0.0 && self.decay_floor_ratio <= 1.0) {
            return Err(Error::Schedule(format!("decay floor ratio {} must be in (0, 1]", self.decay_floor_ratio)));
        }
        Ok(())
    }

    /// Learning rate at `step`. Callers are expected to have validated the
    /// parameters (all constructors do).
    pub fn lr_at(&self, step: u64) -> f64 {
        let peak = self.peak_lr;
        if step >= self.s_f {
            peak * self.decay_floor_ratio
        } else if step >= self.s_i {
            let rate = self.decay_floor_ratio.ln() / (self.s_f - self.s_i) as f64;
            peak * (rate * (step - self.s_i) as f64).exp()
        } else if step >= self.s_r {
            peak
        } else {
            peak * step as f64 / self.s_r as f64
        }
    }

    pub fn noise_active(&self, step: u64) -> bool {
        step >= self.s_noise
    }
}

pub fn lr_at_step(step: u64, sched: &ScheduleParams) -> Result<f64> {
    sched.validate()?;
    Ok(sched.lr_at(step))
}

pub fn noise_active(step: u64, sched: &ScheduleParams) -> bool {
    sched.noise_active(step)
}
