//! `specaug`: batch log mel extraction, seeded spectrogram augmentation,
//! spectrogram rendering, and learning-rate / fusion utilities.
//!
//! Exit codes: 0 on success, 1 when some entries failed, 2 on usage errors
//! (bad flags, unreadable manifest or config, unknown policy).

mod batch;
mod commands;
mod manifest;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use specaug::trainmath::{FusionWeights, DEFAULT_PEAK_LR};
use specaug::Policy;

use commands::{AugmentArgs, Config, Status};

#[derive(Parser, Debug)]
#[command(name = "specaug", version, about = "Spectrogram augmentation toolkit")]
struct Cli {
    /// Master seed; utterance i of a manifest draws from stream (seed, i).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,

    /// Preset name (None, LB, LD, SM, SS) or path to a JSON policy file.
    #[arg(long, global = true, default_value = "LB")]
    policy: String,

    /// JSON file with frontend settings and run options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute log mel features for every WAV in a manifest.
    Features {
        manifest: PathBuf,
        /// Directory for outputs of entries without an explicit output path.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Append delta and delta-delta blocks, giving (τ, 3ν) matrices.
        #[arg(long)]
        deltas: bool,
    },
    /// Augment every (τ, ν) NPY matrix in a manifest with the selected policy.
    Augment {
        manifest: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Write one JSON line per utterance describing the warp and masks.
        #[arg(long)]
        audit: Option<PathBuf>,
        /// Write non-zero-mean inputs back in normalized form.
        #[arg(long)]
        keep_normalized: bool,
    },
    /// Render an NPY spectrogram to PNG.
    Render {
        input: PathBuf,
        output: PathBuf,
        /// Integer upscaling factor.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=64))]
        zoom: u64,
        /// Outline the masks from a mask-record array or audit log.
        #[arg(long)]
        masks: Option<PathBuf>,
        /// Utterance id to select from a multi-line audit log.
        #[arg(long, requires = "masks")]
        id: Option<String>,
    },
    /// Tabulate a learning-rate schedule as CSV (step,lr,noise_active).
    Schedule {
        /// B, D, L, or s_r,s_noise,s_i,s_f.
        schedule: String,
        /// Last step to tabulate (defaults to s_f).
        #[arg(long)]
        max_step: Option<u64>,
        /// Step interval between rows; breakpoints are always included.
        #[arg(long, default_value_t = 1000)]
        every: u64,
        #[arg(long, default_value_t = DEFAULT_PEAK_LR)]
        peak_lr: f64,
        /// Output file (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank hypotheses from a TSV with columns id, asr, lm, cov (and optional utt).
    Fuse {
        input: PathBuf,
        #[arg(long, default_value_t = FusionWeights::LIBRISPEECH.lambda, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = FusionWeights::LIBRISPEECH.coverage, allow_hyphen_values = true)]
        coverage: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<Status> {
    let cfg = Config::load(cli.config.as_deref())?;
    let workers = cli.workers.map_or_else(commands::default_workers, |w| w as usize);
    match cli.command {
        Command::Features { manifest, out_dir, deltas } => {
            commands::features(&manifest, out_dir.as_deref(), deltas, workers, &cfg)
        }
        Command::Augment {
            manifest,
            out_dir,
            audit,
            keep_normalized,
        } => {
            let policy = Policy::resolve(&cli.policy)?;
            log::info!("policy {}: {policy:?}", policy.name);
            commands::augment_cmd(
                &AugmentArgs {
                    manifest: &manifest,
                    out_dir: out_dir.as_deref(),
                    audit: audit.as_deref(),
                    keep_normalized,
                    policy: &policy,
                    seed: cli.seed,
                    workers,
                },
                &cfg,
            )
        }
        Command::Render {
            input,
            output,
            zoom,
            masks,
            id,
        } => commands::render_cmd(&input, &output, zoom as usize, masks.as_deref(), id.as_deref()),
        Command::Schedule {
            schedule,
            max_step,
            every,
            peak_lr,
            out,
        } => {
            let sched = commands::parse_schedule(&schedule, peak_lr)?;
            commands::schedule_cmd(&sched, max_step, every, out.as_deref())
        }
        Command::Fuse {
            input,
            lambda,
            coverage,
            out,
        } => commands::fuse_cmd(&input, FusionWeights::new(lambda, coverage)?, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPECAUG_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::PartialFailure) => ExitCode::from(1),
        Err(err) => {
            eprintln!("specaug: {err:#}");
            ExitCode::from(2)
        }
    }
}
