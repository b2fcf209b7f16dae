use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use korteweg_cli::config::Format;
use korteweg_cli::{run, Command, ExperimentConfig};

/// Navier-Stokes-Korteweg experiments on the periodic square.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run manifest.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the manifest's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the manifest seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write only this format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(f) = args.format {
        cfg.formats = vec![match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }];
    }
    let out = args.out.unwrap_or_else(|| cfg.output_dir.clone());
    match run(args.command, &cfg, &out) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
