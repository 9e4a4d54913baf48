//! Command-line front end. Exit codes: 0 all checks pass, 1 a check failed,
//! 2 configuration error, 3 internal error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, ExperimentKind, Scale};
use crate::error::LabError;
use crate::experiments::run_experiment;

#[derive(Debug, Parser)]
#[command(
    name = "bregman-lab",
    version,
    about = "Run Bregman-Lagrangian flow and discretization experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one continuous-time flow.
    Flow(Common),
    /// Run one discrete method.
    Optimize(Common),
    /// Accelerated vs plain method vs the matching flow.
    Compare(Common),
    /// Compare a dilated p=2 flow with the direct order-p flow.
    DilationCheck(Common),
    /// Restarted accelerated method on a uniformly convex objective.
    Restart(Common),
    /// Naive discretization next to the accelerated method.
    NaiveDemo(Common),
    /// Run every acceptance criterion.
    Acceptance {
        #[command(flatten)]
        common: Common,
        /// Overstate step sizes 100x; the suite must then fail.
        #[arg(long)]
        negative_control: bool,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub scale: Option<Scale>,
}

impl Command {
    fn resolve(self) -> Result<ExperimentConfig, LabError> {
        let (kind, common, negative) = match self {
            Command::Flow(c) => (ExperimentKind::Flow, c, false),
            Command::Optimize(c) => (ExperimentKind::Optimize, c, false),
            Command::Compare(c) => (ExperimentKind::Compare, c, false),
            Command::DilationCheck(c) => (ExperimentKind::DilationCheck, c, false),
            Command::Restart(c) => (ExperimentKind::Restart, c, false),
            Command::NaiveDemo(c) => (ExperimentKind::NaiveDemo, c, false),
            Command::Acceptance {
                common,
                negative_control,
            } => (ExperimentKind::Acceptance, common, negative_control),
        };
        let mut cfg = match &common.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::new(kind),
        };
        if cfg.kind != kind {
            return Err(LabError::Config(format!(
                "config is for {:?}, subcommand is {kind:?}",
                cfg.kind
            )));
        }
        if let Some(out) = common.out {
            cfg.out = Some(out);
        }
        if let Some(seed) = common.seed {
            cfg.seed = seed;
        }
        if let Some(scale) = common.scale {
            cfg.scale = scale;
        }
        cfg.negative_control |= negative;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = cli.command.resolve().and_then(|cfg| run_experiment(&cfg));
    match result {
        Ok(summary) => {
            for c in summary.checks.iter().filter(|c| !c.passed()) {
                eprintln!("failed: {}", c.name);
            }
            u8::from(!summary.all_pass)
        }
        Err(e) => {
            eprintln!("bregman-lab: {e}");
            e.code()
        }
    }
}
