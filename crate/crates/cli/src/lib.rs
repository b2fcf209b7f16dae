//! Experiment driver: manifests, sweeps, power-law fits and artifacts.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod output;
pub mod predictor;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::CliError;

use experiments::{convergence, lifespan, lp, simulate};
use output::Sink;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    LifespanStudy,
    ConvergenceStudy,
    LpAnalyze,
}

/// Runs one subcommand and writes its artifacts into `out`; returns the
/// files written.
pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let mut sink = Sink::create(out, &cfg.formats)?;
    match cmd {
        Command::Simulate => simulate::write(&simulate::simulate(cfg)?, cfg, &mut sink)?,
        Command::LifespanStudy => lifespan::write(&lifespan::lifespan_study(cfg)?, &mut sink)?,
        Command::ConvergenceStudy => convergence::write(&convergence::convergence_study(cfg)?, &mut sink)?,
        Command::LpAnalyze => lp::write(&lp::lp_analyze(cfg)?, &mut sink)?,
    }
    Ok(sink.written().to_vec())
}
