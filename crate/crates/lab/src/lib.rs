//! Experiment runner for geolorenz-core: configuration, pipelines, output
//! files and run manifests.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod io;
pub mod manifest;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{ExperimentConfig, Kind};
pub use error::{LabError, Result};
pub use manifest::RunManifest;

/// Default output directory: `out/<kind>`.
pub fn default_out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out
        .clone()
        .unwrap_or_else(|| Path::new("out").join(cfg.kind.name()))
}

/// Runs one experiment into `dir` and writes its manifest.
pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let outputs = experiments::execute(cfg, dir)?;
    let mut files = Vec::with_capacity(outputs.files.len());
    for p in &outputs.files {
        let name = p
            .strip_prefix(dir)
            .unwrap_or(p)
            .to_string_lossy()
            .into_owned();
        files.push(manifest::OutputFile {
            name,
            sha256: manifest::file_sha256(p)?,
        });
    }
    let manifest = RunManifest {
        experiment: cfg.kind.name().to_string(),
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_clock: start.elapsed().as_secs_f64(),
        work: outputs.work,
        files,
        dir: dir.to_path_buf(),
    };
    manifest.write()?;
    Ok(manifest)
}
