use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LM weight `λ` and coverage weight `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub lambda: f64,
    pub coverage: f64,
}

impl FusionWeights {
    /// The LibriSpeech setting, λ = 0.35 and c = 0.05.
    pub const LIBRISPEECH: Self = Self {
        lambda: 0.35,
        coverage: 0.05,
    };

    pub fn new(lambda: f64, coverage: f64) -> Result<Self> {
        if !(lambda.is_finite() && coverage.is_finite()) {
            return Err(Error::Domain(format!("fusion weights ({lambda}, {coverage}) must be finite")));
        }
        Ok(Self { lambda, coverage })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisScore {
    /// log P(y | x) from the acoustic model.
    pub asr_logprob: f64,
    /// log P_LM(y).
    pub lm_logprob: f64,
    /// Attention coverage statistic for the coverage term.
    pub coverage_count: f64,
}

/// `asr + λ·lm + c·coverage`; the coverage term enters as a reward.
pub fn fused_score(h: &HypothesisScore, w: &FusionWeights) -> f64 {
    let score = h.asr_logprob + w.lambda * h.lm_logprob + w.coverage * h.coverage_count;
    if !score.is_finite() {
        log::warn!("non-finite fused score from {h:?} with {w:?}");
    }
    score
}

/// Indices of `candidates` sorted by descending fused score; ties keep input order.
pub fn rank_hypotheses(candidates: &[HypothesisScore], w: &FusionWeights) -> Vec<usize> {
    let scores: Vec<f64> = candidates.iter().map(|h| fused_score(h, w)).collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Grid point with the lowest loss; ties go to the smaller λ, then smaller c.
pub fn grid_search_fusion<F>(candidates: &[(f64, f64)], mut loss: F) -> Result<(f64, f64)>
where
    F: FnMut(f64, f64) -> f64,
{
    let mut best: Option<((f64, f64), f64)> = None;
    for &(lambda, c) in candidates {
        let value = loss(lambda, c);
        let better = match best {
            None => true,
            Some(((bl, bc), bv)) => {
                value < bv || (value == bv && (lambda < bl || (lambda == bl && c < bc)))
            }
        };
        if better {
            best = Some(((lambda, c), value));
        }
    }
    best.map(|(point, _)| point)
        .ok_or_else(|| Error::Domain("fusion grid is empty".into()))
}
