//! Named augmentation policies and the one-call augmentation pipeline
//! (time warp, then frequency masks, then time masks).

mod rng;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rng::{split_stream, RngStream};

use crate::error::{Error, Result};
use crate::featio::Spectrogram;
use crate::maskkit::{self, FreqMaskParams, MaskRecord, TimeMaskParams};
use crate::warpkit::{self, WarpSpec};

pub const PRESET_NAMES: [&str; 5] = ["None", "LB", "LD", "SM", "SS"];

/// Sub-stream labels; each stage draws from its own stream so toggling one
/// stage never shifts another stage's draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Warp = 1,
    FreqMask = 2,
    TimeMask = 3,
}

impl Stage {
    pub fn stream(self, rng: &RngStream) -> RngStream {
        rng.derive(self as u64)
    }
}

fn enabled() -> bool {
    true
}

fn custom_name() -> String {
    "custom".to_owned()
}

/// Augmentation recipe `(W, F, m_F, T, p, m_T)` plus per-stage toggles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Policy {
    #[serde(default = "custom_name")]
    pub name: String,
    #[serde(rename = "W")]
    pub time_warp: usize,
    #[serde(rename = "F")]
    pub freq_mask: usize,
    #[serde(rename = "mF")]
    pub freq_mask_count: usize,
    #[serde(rename = "T")]
    pub time_mask: usize,
    #[serde(rename = "p")]
    pub time_mask_fraction: f64,
    #[serde(rename = "mT")]
    pub time_mask_count: usize,
    #[serde(rename = "warp", default = "enabled")]
    pub warp_enabled: bool,
    #[serde(rename = "fmask", default = "enabled")]
    pub fmask_enabled: bool,
    #[serde(rename = "tmask", default = "enabled")]
    pub tmask_enabled: bool,
}

impl Policy {
    #[allow(clippy::too_many_arguments)]
    fn table(name: &str, w: usize, f: usize, m_f: usize, t: usize, p: f64, m_t: usize) -> Self {
        Self {
            name: name.to_owned(),
            time_warp: w,
            freq_mask: f,
            freq_mask_count: m_f,
            time_mask: t,
            time_mask_fraction: p,
            time_mask_count: m_t,
            warp_enabled: true,
            fmask_enabled: true,
            tmask_enabled: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let policy: Self = serde_json::from_str(text).map_err(|e| Error::Policy(e.to_string()))?;
        policy.validate()?;
        Ok(policy)
    }

    /// A preset name, or a path to a JSON policy file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if let Ok(policy) = preset(name_or_path) {
            return Ok(policy);
        }
        let path = Path::new(name_or_path);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).at(path))?;
            return Self::from_json(&text).map_err(|e| e.at(path));
        }
        preset(name_or_path)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.time_mask_fraction) {
            return Err(Error::Policy(format!("p = {} is outside [0, 1]", self.time_mask_fraction)));
        }
        Ok(())
    }

    pub fn freq_params(&self) -> FreqMaskParams {
        FreqMaskParams {
            max_width: self.freq_mask,
            count: self.freq_mask_count,
        }
    }

    pub fn time_params(&self) -> TimeMaskParams {
        TimeMaskParams {
            max_width: self.time_mask,
            max_fraction: self.time_mask_fraction,
            count: self.time_mask_count,
        }
    }

    /// True when no enabled stage can change its input.
    pub fn is_identity(&self) -> bool {
        let warp = self.warp_enabled && self.time_warp > 0;
        let fmask = self.fmask_enabled && self.freq_mask > 0 && self.freq_mask_count > 0;
        let tmask =
            self.tmask_enabled && self.time_mask > 0 && self.time_mask_fraction > 0.0 && self.time_mask_count > 0;
        !(warp || fmask || tmask)
    }
}

/// Looks up one of the compiled-in policies `None`, `LB`, `LD`, `SM`, `SS`.
pub fn preset(name: &str) -> Result<Policy> {
    let policy = match name {
        "None" => Policy::table("None", 0, 0, 0, 0, 0.0, 0),
        "LB" => Policy::table("LB", 80, 27, 1, 100, 1.0, 1),
        "LD" => Policy::table("LD", 80, 27, 2, 100, 1.0, 2),
        "SM" => Policy::table("SM", 40, 15, 2, 70, 0.2, 2),
        "SS" => Policy::table("SS", 40, 27, 2, 70, 0.2, 2),
        _ => {
            return Err(Error::UnknownPolicy {
                name: name.to_owned(),
                valid: PRESET_NAMES.join(", "),
            })
        }
    };
    Ok(policy)
}

/// What an augmentation call did to one spectrogram.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentAudit {
    pub warp: Option<WarpSpec>,
    /// The warp was enabled but the utterance was too short for it.
    #[serde(default)]
    pub warp_skipped: bool,
    pub masks: Vec<MaskRecord>,
}

/// Applies every enabled stage of `policy` to a normalized spectrogram.
pub fn augment(spec: &Spectrogram, policy: &Policy, rng: &RngStream) -> Result<(Spectrogram, AugmentAudit)> {
    if !spec.is_normalized() {
        return Err(Error::NotNormalized);
    }
    policy.validate()?;
    let mut audit = AugmentAudit::default();
    if policy.is_identity() {
        return Ok((spec.clone(), audit));
    }

    let mut current = spec.clone();
    if policy.warp_enabled && policy.time_warp > 0 {
        let mut stream = Stage::Warp.stream(rng);
        let draw = warpkit::sample_warp(current.nu(), current.tau(), policy.time_warp, &mut stream);
        if !draw.control_points.is_identity() {
            current = warpkit::warp_spectrogram(&current, &draw.control_points)?;
        }
        audit.warp = Some(draw.spec);
        audit.warp_skipped = draw.degenerate;
    }
    if policy.fmask_enabled {
        let mut stream = Stage::FreqMask.stream(rng);
        let (out, records) = maskkit::freq_mask(&current, policy.freq_params(), &mut stream)?;
        current = out;
        audit.masks.extend(records);
    }
    if policy.tmask_enabled {
        let mut stream = Stage::TimeMask.stream(rng);
        let (out, records) = maskkit::time_mask(&current, policy.time_params(), &mut stream)?;
        current = out;
        audit.masks.extend(records);
    }
    Ok((current, audit))
}

/// Augments a batch in parallel; item `i` uses `split_stream(master_seed, i)`.
pub fn augment_batch(specs: &[Spectrogram], policy: &Policy, master_seed: u64) -> Vec<Result<(Spectrogram, AugmentAudit)>> {
    specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| augment(spec, policy, &split_stream(master_seed, i as u64)))
        .collect()
}
