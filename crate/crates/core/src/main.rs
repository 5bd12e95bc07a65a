use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use wqed::cli::{execute, RunConfig};

/// Runs one waveguide-QED experiment described by a JSON configuration.
#[derive(Debug, Parser)]
#[command(name = "wqed", version = wqed::cli::output::VERSION)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for stochastic starts (overrides `seed` in the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match RunConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("wqed: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.out = Some(out);
    }
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("wqed-out"));
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match execute(&config, &dir, threads) {
        Ok(out) => {
            for f in &out.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wqed: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
