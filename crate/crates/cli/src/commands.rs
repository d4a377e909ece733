use std::io::Write;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use specaug::featio::{add_deltas, load_wav, log_mel, read_feature_file, write_npy, NpyMatrix, ZERO_MEAN_TOLERANCE};
use specaug::policy::augment;
use specaug::trainmath::{rank_hypotheses, FusionWeights, HypothesisScore, ScheduleParams};
use specaug::{split_stream, AugmentAudit, FrontendConfig, MaskRecord, Policy, Spectrogram};

use crate::batch;
use crate::manifest::{Entry, Manifest};
use crate::render;

/// Settings read from `--config`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub frontend: FrontendConfig,
    /// Regression half-window for delta features.
    pub delta_window: usize,
    /// Write `audit.jsonl` into the output directory when `--audit` is absent.
    pub emit_audit: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            frontend: FrontendConfig::default(),
            delta_window: 2,
            emit_audit: false,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Whether every item of a command succeeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    PartialFailure,
}

impl Status {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Self::Success
        } else {
            Self::PartialFailure
        }
    }
}

fn load_manifest(path: &Path) -> Result<Manifest> {
    let manifest = Manifest::load(path)?;
    if manifest.entries.is_empty() {
        log::warn!("manifest {} lists no entries", path.display());
    }
    Ok(manifest)
}

fn write_matrix(path: &Path, matrix: &NpyMatrix) -> Result<()> {
    batch::write_atomic(path, |w| write_npy(w, matrix))
}

pub fn features(manifest: &Path, out_dir: Option<&Path>, deltas: bool, workers: usize, cfg: &Config) -> Result<Status> {
    let manifest = load_manifest(manifest)?;
    if deltas {
        ensure!(cfg.delta_window >= 1, "delta_window must be at least 1");
    }
    let results = batch::run(&manifest.entries, workers, |entry| {
        let output = entry.output_path(out_dir, "npy")?;
        let audio = load_wav(&entry.input)?;
        let spec = log_mel(&audio, &cfg.frontend)?;
        let matrix = if deltas {
            NpyMatrix::from(&add_deltas(&spec, cfg.delta_window)?)
        } else {
            NpyMatrix::from(&spec)
        };
        write_matrix(&output, &matrix)
    })?;
    Ok(Status::from_ok(batch::report(&results)))
}

/// One audit line: which utterance, and what was drawn for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditLine {
    pub id: String,
    pub index: usize,
    #[serde(flatten)]
    pub audit: AugmentAudit,
}

pub struct AugmentArgs<'a> {
    pub manifest: &'a Path,
    pub out_dir: Option<&'a Path>,
    pub audit: Option<&'a Path>,
    pub keep_normalized: bool,
    pub policy: &'a Policy,
    pub seed: u64,
    pub workers: usize,
}

/// Augments one `(τ, ν)` matrix.
///
/// Zero-mean input is augmented as is. Otherwise it is normalized first and
/// the mean is restored afterwards (unless `keep_normalized`), so masked
/// bands come out at the utterance mean. An identity policy passes the
/// values through untouched.
fn augment_entry(entry: &Entry, args: &AugmentArgs<'_>, nu: usize) -> Result<(NpyMatrix, AugmentAudit)> {
    let matrix = read_feature_file(&entry.input)?;
    ensure!(
        matrix.cols == nu,
        "expected {nu} mel channels, found shape ({}, {})",
        matrix.rows,
        matrix.cols
    );
    if args.policy.is_identity() {
        return Ok((matrix, AugmentAudit::default()));
    }
    let raw = matrix.to_spectrogram()?;
    let centred = raw.mean().abs() < ZERO_MEAN_TOLERANCE;
    let input = if centred { raw.assume_normalized(0.0)? } else { raw.normalize()? };
    let (out, audit) = augment(&input, args.policy, &split_stream(args.seed, entry.index as u64))?;
    let out = if centred || args.keep_normalized { out } else { out.denormalize() };
    Ok((NpyMatrix::from(&out), audit))
}

pub fn augment_cmd(args: &AugmentArgs<'_>, cfg: &Config) -> Result<Status> {
    let manifest = load_manifest(args.manifest)?;
    let audit_path = match (args.audit, cfg.emit_audit, args.out_dir) {
        (Some(path), _, _) => Some(path.to_path_buf()),
        (None, true, Some(dir)) => Some(dir.join("audit.jsonl")),
        (None, true, None) => bail!("emit_audit needs --audit or --out-dir"),
        (None, false, _) => None,
    };
    let nu = cfg.frontend.nu;
    let results = batch::run(&manifest.entries, args.workers, |entry| {
        let output = entry.output_path(args.out_dir, "npy")?;
        let (matrix, audit) = augment_entry(entry, args, nu)?;
        write_matrix(&output, &matrix)?;
        Ok(AuditLine {
            id: entry.id.clone(),
            index: entry.index,
            audit,
        })
    })?;
    let mut ok = batch::report(&results);
    if let Some(path) = audit_path {
        let written = batch::write_atomic(&path, |w| {
            for line in results.iter().flatten() {
                serde_json::to_writer(&mut *w, line)?;
                w.write_all(b"\n")?;
            }
            Ok(())
        });
        if let Err(err) = written {
            log::error!("{err:#}");
            ok = false;
        }
    }
    Ok(Status::from_ok(ok))
}

/// Mask records from a JSON array, a single audit object, or a JSONL audit
/// log (picking the line for `id`, or the only line).
pub fn load_masks(path: &Path, id: Option<&str>) -> Result<Vec<MaskRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(masks) = serde_json::from_str::<Vec<MaskRecord>>(&text) {
        return Ok(masks);
    }
    let lines: Vec<AuditLineMasks> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("{} holds neither mask records nor audit lines", path.display()))?;
    let chosen = match id {
        Some(id) => lines.into_iter().find(|l| l.id.as_deref() == Some(id)),
        None if lines.len() == 1 => lines.into_iter().next(),
        None => bail!("{} has several audit lines; pick one with --id", path.display()),
    };
    Ok(chosen
        .with_context(|| format!("no audit line for `{}` in {}", id.unwrap_or_default(), path.display()))?
        .masks)
}

#[derive(Deserialize)]
struct AuditLineMasks {
    id: Option<String>,
    masks: Vec<MaskRecord>,
}

pub fn render_cmd(input: &Path, output: &Path, zoom: usize, masks: Option<&Path>, id: Option<&str>) -> Result<Status> {
    let overlay = masks.map(|path| load_masks(path, id)).transpose()?;
    let result = (|| -> Result<()> {
        let spec: Spectrogram = read_feature_file(input)?.to_spectrogram()?;
        let mut image = render::render(&spec, zoom)?;
        if let Some(masks) = &overlay {
            for m in masks {
                let len = if m.axis == specaug::Axis::Frequency { spec.nu() } else { spec.tau() };
                ensure!(m.start + m.width <= len, "mask {m:?} does not fit a {}x{} spectrogram", spec.nu(), spec.tau());
            }
            render::draw_overlay(&mut image, masks, spec.nu(), spec.tau(), zoom);
        }
        let mut png = Vec::new();
        image.write_png(&mut png)?;
        batch::write_atomic(output, |w| w.write_all(&png))
    })();
    Ok(Status::from_ok(batch::report(&[result])))
}

/// `B`, `D`, `L`, or explicit `s_r,s_noise,s_i,s_f`.
pub fn parse_schedule(spec: &str, peak_lr: f64) -> Result<ScheduleParams> {
    if spec.contains(',') {
        let steps = spec
            .split(',')
            .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad step `{s}` in schedule `{spec}`")))
            .collect::<Result<Vec<_>>>()?;
        let &[s_r, s_noise, s_i, s_f] = steps.as_slice() else {
            bail!("schedule `{spec}` needs four steps s_r,s_noise,s_i,s_f");
        };
        return Ok(ScheduleParams::new(s_r, s_noise, s_i, s_f, peak_lr)?);
    }
    let mut sched = ScheduleParams::named(spec)?;
    sched.peak_lr = peak_lr;
    sched.validate()?;
    Ok(sched)
}

/// Steps `0, every, 2·every, …` up to `max_step`, plus every breakpoint in range.
pub fn schedule_steps(sched: &ScheduleParams, max_step: u64, every: u64) -> Vec<u64> {
    let mut steps: Vec<u64> = (0..=max_step).step_by(every.max(1) as usize).collect();
    steps.extend([sched.s_r, sched.s_noise, sched.s_i, sched.s_f, max_step].into_iter().filter(|&s| s <= max_step));
    steps.sort_unstable();
    steps.dedup();
    steps
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => batch::write_atomic(path, |w| w.write_all(bytes)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn schedule_cmd(sched: &ScheduleParams, max_step: Option<u64>, every: u64, out: Option<&Path>) -> Result<Status> {
    ensure!(every >= 1, "--every must be at least 1");
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["step", "lr", "noise_active"])?;
    for step in schedule_steps(sched, max_step.unwrap_or(sched.s_f), every) {
        csv.write_record([step.to_string(), sched.lr_at(step).to_string(), sched.noise_active(step).to_string()])?;
    }
    let bytes = csv.into_inner().context("flushing CSV")?;
    Ok(Status::from_ok(batch::report(&[write_output(out, &bytes)])))
}

#[derive(Debug, Deserialize)]
struct HypothesisRow {
    #[serde(default)]
    utt: Option<String>,
    id: String,
    #[serde(alias = "asr_logprob")]
    asr: f64,
    #[serde(alias = "lm_logprob")]
    lm: f64,
    #[serde(alias = "coverage")]
    cov: f64,
}

#[derive(Debug, Serialize)]
struct RankedRow<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    utt: Option<&'a str>,
    rank: usize,
    id: &'a str,
    score: f64,
    asr: f64,
    lm: f64,
    cov: f64,
}

/// Ranks hypotheses by fused score. With a `utt` column, each utterance's
/// candidates are ranked separately (utterances keep first-seen order).
pub fn fuse_cmd(input: &Path, weights: FusionWeights, out: Option<&Path>) -> Result<Status> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .comment(Some(b'#'))
        .from_path(input)
        .with_context(|| format!("opening {}", input.display()))?;
    let rows: Vec<HypothesisRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("reading hypotheses from {}", input.display()))?;
    let grouped = rows.iter().any(|r| r.utt.is_some());

    let mut groups: Vec<(Option<&str>, Vec<&HypothesisRow>)> = Vec::new();
    for row in &rows {
        let key = row.utt.as_deref();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }

    let mut tsv = csv::WriterBuilder::new().delimiter(b'\t').from_writer(Vec::new());
    for (key, members) in &groups {
        let scores: Vec<HypothesisScore> = members
            .iter()
            .map(|r| HypothesisScore {
                asr_logprob: r.asr,
                lm_logprob: r.lm,
                coverage_count: r.cov,
            })
            .collect();
        for (rank, &i) in rank_hypotheses(&scores, &weights).iter().enumerate() {
            let r = members[i];
            tsv.serialize(RankedRow {
                utt: if grouped { Some(key.unwrap_or("")) } else { None },
                rank: rank + 1,
                id: &r.id,
                score: specaug::trainmath::fused_score(&scores[i], &weights),
                asr: r.asr,
                lm: r.lm,
                cov: r.cov,
            })?;
        }
    }
    let bytes = tsv.into_inner().context("flushing TSV")?;
    Ok(Status::from_ok(batch::report(&[write_output(out, &bytes)])))
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}
