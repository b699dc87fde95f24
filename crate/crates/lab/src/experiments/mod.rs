//! One pipeline per experiment kind. Each writes its CSVs and a `report.txt`
//! of `key = value` lines into the output directory.

mod flow;
mod model;
mod stats;

use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, Kind};
use crate::error::{LabError, Result};
use crate::io::{fmt_f64, write_kv, write_table};

/// Pass/fail of one acceptance criterion (or of one part of it).
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub criterion: u8,
    pub pass: bool,
    pub detail: String,
}

/// Files and values produced by a run.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub values: Vec<(String, String)>,
    pub verdicts: Vec<Verdict>,
    /// Samples, steps or evaluations performed; recorded in the manifest.
    pub work: u64,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            values: Vec::new(),
            verdicts: Vec::new(),
            work: 0,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.path(name);
        write_table(&path, header, rows)?;
        self.files.push(path);
        Ok(())
    }

    pub fn file(&mut self, name: &str) -> PathBuf {
        let path = self.path(name);
        self.files.push(path.clone());
        path
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.push((key.into(), fmt_f64(v)));
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.values.push((key.into(), v.into()));
    }

    pub fn verdict(&mut self, criterion: u8, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            criterion,
            pass,
            detail: detail.into(),
        });
    }

    /// `report.txt`: values first, then `criterion.N = PASS|FAIL detail`.
    pub fn write_report(&mut self) -> Result<()> {
        let mut lines = self.values.clone();
        for v in &self.verdicts {
            lines.push((
                format!("criterion.{}", v.criterion),
                format!("{} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail),
            ));
        }
        let path = self.path("report.txt");
        write_kv(&path, &lines)?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs the experiment into `dir` (created if needed).
pub fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<Outputs> {
    std::fs::create_dir_all(dir).map_err(LabError::io(dir))?;
    let mut out = Outputs::new(dir);
    match cfg.kind {
        Kind::Spectrum => flow::spectrum(cfg, &mut out)?,
        Kind::Lyapunov => flow::lyapunov(cfg, &mut out)?,
        Kind::Section => flow::section(cfg, &mut out)?,
        Kind::Obstruction => flow::obstruction(cfg, &mut out)?,
        Kind::Induce => model::induce(cfg, &mut out)?,
        Kind::Ulam => model::ulam_exp(cfg, &mut out)?,
        Kind::Twist => model::twist(cfg, &mut out)?,
        Kind::Semiflow => model::semiflow(cfg, &mut out)?,
        Kind::Summability => model::summability(cfg, &mut out)?,
        Kind::Distortion => model::distortion(cfg, &mut out)?,
        Kind::Coboundary => model::coboundary(cfg, &mut out)?,
        Kind::Correlations => stats::correlations(cfg, &mut out)?,
        Kind::Clt => stats::clt(cfg, &mut out)?,
        Kind::Variance => stats::variance(cfg, &mut out)?,
        Kind::Lil => stats::lil(cfg, &mut out)?,
        Kind::Report => crate::report::consolidate(cfg, &mut out)?,
    }
    if cfg.kind != Kind::Report {
        out.write_report()?;
    }
    Ok(out)
}
