use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform label smoothing, optionally switched off from `active_until_step` on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSpec {
    pub uncertainty: f64,
    pub active_until_step: Option<u64>,
}

impl SmoothingSpec {
    pub fn new(uncertainty: f64, active_until_step: Option<u64>) -> Result<Self> {
        if !(0.0..1.0).contains(&uncertainty) {
            return Err(Error::Domain(format!("uncertainty {uncertainty} must lie in [0, 1)")));
        }
        Ok(Self {
            uncertainty,
            active_until_step,
        })
    }

    pub fn is_active(&self, step: u64) -> bool {
        self.active_until_step.is_none_or(|until| step < until)
    }
}

/// Target distribution for `correct_index`: `1 - u` on the correct label and
/// `u / (V - 1)` on every other label while smoothing is active, one-hot
/// otherwise. The last non-correct entry absorbs rounding so the sum is 1.
pub fn smooth_labels(correct_index: usize, vocab_size: usize, spec: &SmoothingSpec, step: u64) -> Result<Vec<f64>> {
    if vocab_size < 2 {
        return Err(Error::Domain(format!("vocabulary size {vocab_size} must be at least 2")));
    }
    if correct_index >= vocab_size {
        return Err(Error::Domain(format!("label {correct_index} outside vocabulary of {vocab_size}")));
    }
    if !(0.0..1.0).contains(&spec.uncertainty) {
        return Err(Error::Domain(format!("uncertainty {} must lie in [0, 1)", spec.uncertainty)));
    }
    let mut out = vec![0.0; vocab_size];
    if !spec.is_active(step) || spec.uncertainty == 0.0 {
        out[correct_index] = 1.0;
        return Ok(out);
    }
    let u = spec.uncertainty;
    let share = u / (vocab_size - 1) as f64;
    out.fill(share);
    out[correct_index] = 1.0 - u;
    let last = if correct_index == vocab_size - 1 { vocab_size - 2 } else { vocab_size - 1 };
    let others: f64 = out.iter().enumerate().filter(|&(i, _)| i != last).map(|(_, v)| v).sum();
    out[last] = 1.0 - others;
    Ok(out)
}
