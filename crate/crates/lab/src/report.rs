//! Consolidated report over several run manifests.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::experiments::Outputs;
use crate::io::{read_kv, write_kv};
use crate::manifest::RunManifest;

pub const CRITERIA: u8 = 14;

/// Criteria that come from the test suites rather than from an experiment.
fn covered_elsewhere(c: u8) -> Option<&'static str> {
    match c {
        4 => Some("property suites run under `cargo test`"),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionLine {
    pub criterion: u8,
    /// `None` when no manifest reported on this criterion.
    pub pass: Option<bool>,
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Consolidated {
    pub warnings: Vec<String>,
    pub runs: Vec<RunManifest>,
    pub criteria: Vec<CriterionLine>,
}

/// Picks one manifest per run slot (experiment kind plus output directory
/// name, the newest on conflicting config hashes), checks their files and
/// merges the criterion parts.
pub fn consolidate_manifests(paths: &[PathBuf]) -> Result<Consolidated> {
    let mut by_kind: BTreeMap<String, Vec<RunManifest>> = BTreeMap::new();
    for p in paths {
        let m = RunManifest::read(p)?;
        m.check_files()?;
        by_kind.entry(slot_name(&m)).or_default().push(m);
    }
    let mut out = Consolidated::default();
    let mut determinism: Vec<String> = Vec::new();
    let mut deterministic = true;
    for (kind, runs) in &by_kind {
        let newest = runs
            .iter()
            .enumerate()
            .max_by_key(|(i, m)| (m.created_unix, *i))
            .map(|(_, m)| m.clone())
            .expect("nonempty group");
        for m in runs {
            if m.config_hash != newest.config_hash {
                out.warnings.push(format!(
                    "warning: conflicting config hashes for `{kind}` ({} vs {}); using the newest, {}",
                    &m.config_hash[..12.min(m.config_hash.len())],
                    &newest.config_hash[..12.min(newest.config_hash.len())],
                    newest.dir.display()
                ));
            } else if m.dir != newest.dir {
                let same = m.outputs_hash() == newest.outputs_hash();
                deterministic &= same;
                determinism.push(format!(
                    "{kind}: {}",
                    if same { "identical" } else { "differs" }
                ));
            }
        }
        out.runs.push(newest);
    }
    out.warnings.dedup();

    let mut parts: BTreeMap<u8, (bool, Vec<String>)> = BTreeMap::new();
    for m in &out.runs {
        let report = m.dir.join("report.txt");
        for (k, v) in read_kv(&report)? {
            let Some(c) = k
                .strip_prefix("criterion.")
                .and_then(|c| c.parse::<u8>().ok())
            else {
                continue;
            };
            let (status, detail) = v.split_once(' ').unwrap_or((v.as_str(), ""));
            let e = parts.entry(c).or_insert((true, Vec::new()));
            e.0 &= status == "PASS";
            e.1.push(format!("[{}] {status} {detail}", slot_name(m)));
        }
    }
    if !determinism.is_empty() {
        parts.insert(
            14,
            (
                deterministic,
                vec![format!("reruns: {}", determinism.join(", "))],
            ),
        );
    }
    for c in 1..=CRITERIA {
        let line = match parts.remove(&c) {
            Some((pass, details)) => CriterionLine {
                criterion: c,
                pass: Some(pass),
                details,
            },
            None => CriterionLine {
                criterion: c,
                pass: None,
                details: covered_elsewhere(c)
                    .map(|s| vec![s.to_string()])
                    .unwrap_or_default(),
            },
        };
        out.criteria.push(line);
    }
    Ok(out)
}

fn slot_name(m: &RunManifest) -> String {
    match m.dir.file_name().and_then(|n| n.to_str()) {
        Some(n) if n != m.experiment => format!("{}/{n}", m.experiment),
        _ => m.experiment.clone(),
    }
}

impl Consolidated {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for w in &self.warnings {
            s.push_str(w);
            s.push('\n');
        }
        for m in &self.runs {
            s.push_str(&format!(
                "run {}: {} files, {:.2} s, work {}, config {}\n",
                m.experiment,
                m.files.len(),
                m.wall_clock,
                m.work,
                &m.config_hash[..12.min(m.config_hash.len())]
            ));
        }
        for c in &self.criteria {
            let status = match c.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "NOT RUN",
            };
            s.push_str(&format!("criterion {:>2}: {status}", c.criterion));
            if !c.details.is_empty() {
                s.push_str(&format!("  {}", c.details.join("; ")));
            }
            s.push('\n');
        }
        s
    }
}

pub fn consolidate(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let list = cfg.get("manifests")?;
    let paths: Vec<PathBuf> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .collect();
    if paths.is_empty() {
        return Err(LabError::Config(
            "report needs `manifests = path[,path...]`".into(),
        ));
    }
    let c = consolidate_manifests(&paths)?;
    for w in &c.warnings {
        eprintln!("{w}");
    }
    let path = out.file("report.txt");
    std::fs::write(&path, c.render()).map_err(LabError::io(&path))?;
    let summary: Vec<(String, String)> = c
        .criteria
        .iter()
        .map(|l| {
            let v = match l.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "NOT-RUN",
            };
            (format!("criterion.{}", l.criterion), v.to_string())
        })
        .collect();
    let path = out.file("summary.txt");
    write_kv(&path, &summary)?;
    out.work = c.runs.len() as u64;
    Ok(())
}
