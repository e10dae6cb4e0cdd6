//! `exresp`: batch driver for landmark expression-intensity estimation.
//!
//! Every subcommand writes into `--out` and always leaves an `errors.csv`
//! there. The exit code is 0 when that file has no rows, 1 when some
//! sequences failed and 2 when the run could not start at all.

mod cmd;
mod output;
mod run_config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::cmd::Ctx;
use crate::output::ErrorLog;
use crate::run_config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "exresp", version, about = "Expression intensity from landmark trajectories")]
struct Cli {
    /// key=value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Final responses and landmark weights per sequence.
    Respond { manifest: PathBuf },
    /// Warp responses onto a template and report transition alignment.
    Align { manifest: PathBuf },
    /// MAE / PCC / ICC against ground truth.
    Eval {
        manifest: PathBuf,
        /// `sequence_id,apex_frame[,peak_value]` or `sequence_id,t,intensity`.
        #[arg(long)]
        truth: PathBuf,
    },
    /// Ward clustering of weight vectors within each label group.
    Cluster {
        manifest: PathBuf,
        /// Overrides `k` from the config.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Per action-unit responses from annotated events.
    Au {
        manifest: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
    },
    /// Generate synthetic sequences with ground truth.
    Synth {
        /// default, rise_only, fall_only, jitter or two_au.
        #[arg(long, default_value = "default")]
        preset: String,
        /// SynthSpec JSON; overrides --preset.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Number of sequences; seeds run from --seed upwards.
        #[arg(long, default_value_t = 10)]
        count: u64,
    },
    /// Render emitted CSVs as SVG charts.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<ErrorLog> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    output::ensure_dir(&cli.out)?;
    let mut ctx = Ctx {
        cfg,
        out: cli.out,
        jobs: cli.jobs,
        seed: cli.seed,
        log: ErrorLog::default(),
    };
    match cli.command {
        Command::Respond { manifest } => cmd::respond::run(&mut ctx, &manifest)?,
        Command::Align { manifest } => cmd::align::run(&mut ctx, &manifest)?,
        Command::Eval { manifest, truth } => cmd::eval::run(&mut ctx, &manifest, &truth)?,
        Command::Cluster { manifest, k } => {
            if let Some(k) = k {
                ctx.cfg.k = k;
                ctx.cfg.validate()?;
            }
            cmd::cluster::run(&mut ctx, &manifest)?
        }
        Command::Au {
            manifest,
            annotations,
        } => cmd::au::run(&mut ctx, &manifest, &annotations)?,
        Command::Synth {
            preset,
            spec,
            count,
        } => cmd::synth::run(&mut ctx, &preset, spec.as_deref(), count)?,
        Command::Plot { inputs } => cmd::plot::run(&mut ctx, &inputs)?,
    }
    ctx.log.write(&ctx.out)?;
    Ok(ctx.log)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(log) if log.len() == 0 => ExitCode::SUCCESS,
        Ok(log) => {
            eprintln!("exresp: {} failure(s), see errors.csv", log.len());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("exresp: {e:#}");
            ExitCode::from(2)
        }
    }
}
