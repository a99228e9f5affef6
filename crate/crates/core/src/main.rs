use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mixcurv::cli;
use mixcurv::config::{threads_from_env, RunConfig};

#[derive(Parser)]
#[command(
    name = "mixcurv",
    about = "Self-supervised mixed-curvature graph representation learning",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Flat key=value config file; CLI flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Product-space signature override, e.g. h4x2,s4x2,e8.
    #[arg(long)]
    signature: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train on a dataset directory and write checkpoint + loss trace.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory with edges.txt, features.txt and optional labels.txt.
        #[arg(long = "data-dir")]
        data_dir: PathBuf,
        /// Output directory for model.ckpt and trace.jsonl.
        #[arg(long)]
        out: PathBuf,
    },
    /// Link-prediction AUC of a checkpoint on the held-out test edges.
    EvalLp {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "data-dir")]
        data_dir: PathBuf,
        /// Checkpoint written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Node-classification accuracy of a checkpoint.
    EvalNc {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "data-dir")]
        data_dir: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Write the sparsified congruent (PPR-diffused) edge list.
    Diffuse {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "data-dir")]
        data_dir: PathBuf,
        /// Output path for the weighted edge list.
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference check of the full dual loss on a bundled toy.
    Gradcheck {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn build_config(common: &CommonArgs) -> mixcurv::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.merge_file(path)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(sig) = &common.signature {
        cfg.signature = sig.clone();
    }
    cfg.threads = threads_from_env()?;
    Ok(cfg)
}

fn run() -> mixcurv::Result<bool> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Train { common, data_dir, out } => {
            let cfg = build_config(common)?;
            cli::cmd_train(&cfg, data_dir, out)?;
            Ok(true)
        }
        Command::EvalLp { common, data_dir, checkpoint } => {
            let cfg = build_config(common)?;
            cli::cmd_eval_lp(&cfg, data_dir, checkpoint)?;
            Ok(true)
        }
        Command::EvalNc { common, data_dir, checkpoint } => {
            let cfg = build_config(common)?;
            cli::cmd_eval_nc(&cfg, data_dir, checkpoint)?;
            Ok(true)
        }
        Command::Diffuse { common, data_dir, out } => {
            let cfg = build_config(common)?;
            cli::cmd_diffuse(&cfg, data_dir, out)?;
            Ok(true)
        }
        Command::Gradcheck { common } => {
            let cfg = build_config(common)?;
            let err = cli::cmd_gradcheck(cfg.seed)?;
            Ok(err < cli::GRADCHECK_THRESHOLD)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
