use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use geolorenz_lab::{default_out_dir, run, ExperimentConfig, LabError};

/// Runs one experiment described by a `key = value` config file.
#[derive(Debug, Parser)]
#[command(name = "geolorenz", version)]
struct Args {
    /// Experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (default: config `out`, else `out/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main_inner(args: Args) -> Result<(), LabError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let dir = args.out.unwrap_or_else(|| default_out_dir(&cfg));
    let m = run(&cfg, &dir)?;
    let report = dir.join("report.txt");
    if let Ok(text) = std::fs::read_to_string(&report) {
        print!("{text}");
    }
    println!("manifest: {}", m.path().display());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
