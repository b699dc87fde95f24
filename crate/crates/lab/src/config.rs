//! Plain-text `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use geolorenz_core::flow::FlowParams;
use geolorenz_core::geometric::GeoModel;
use geolorenz_core::stats::Backend;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Spectrum,
    Lyapunov,
    Section,
    Induce,
    Ulam,
    Twist,
    Semiflow,
    Summability,
    Distortion,
    Correlations,
    Clt,
    Variance,
    Lil,
    Obstruction,
    Coboundary,
    Report,
}

pub const KINDS: [(&str, Kind); 16] = [
    ("spectrum", Kind::Spectrum),
    ("lyapunov", Kind::Lyapunov),
    ("section", Kind::Section),
    ("induce", Kind::Induce),
    ("ulam", Kind::Ulam),
    ("twist", Kind::Twist),
    ("semiflow", Kind::Semiflow),
    ("summability", Kind::Summability),
    ("distortion", Kind::Distortion),
    ("correlations", Kind::Correlations),
    ("clt", Kind::Clt),
    ("variance", Kind::Variance),
    ("lil", Kind::Lil),
    ("obstruction", Kind::Obstruction),
    ("coboundary", Kind::Coboundary),
    ("report", Kind::Report),
];

impl Kind {
    pub fn name(self) -> &'static str {
        KINDS
            .iter()
            .find(|(_, k)| *k == self)
            .map(|(n, _)| *n)
            .unwrap_or("?")
    }

    pub fn parse(s: &str) -> Option<Kind> {
        KINDS.iter().find(|(n, _)| *n == s).map(|(_, k)| *k)
    }

    /// Keys accepted by this experiment, with defaults.
    pub fn schema(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Kind::Spectrum => &[("backend", "ode"), ("preset", "classical")],
            Kind::Lyapunov => &[
                ("backend", "ode"),
                ("preset", "classical"),
                ("t_total", "2000"),
            ],
            Kind::Section => &[
                ("backend", "ode"),
                ("preset", "classical"),
                ("events", "20000"),
                ("bins", "64"),
            ],
            Kind::Induce => &[
                ("backend", "geometric"),
                ("preset", "default"),
                ("y_lo", "0.3"),
                ("y_hi", "0.7"),
                ("max_tau", "40"),
                ("depth_lo", "6"),
                ("depth_hi", "8"),
            ],
            Kind::Ulam => &[
                ("backend", "geometric"),
                ("preset", "default"),
                ("bins", "1024"),
                ("fine_bins", "2048"),
            ],
            Kind::Twist => &[
                ("backend", "geometric"),
                ("preset", "default"),
                ("bins", "256"),
                ("beta_scan", "2"),
                ("b_min", "10"),
                ("b_max", "1000"),
                ("b_count", "40"),
            ],
            Kind::Semiflow => &[
                ("backend", "geometric"),
                ("preset", "default"),
                ("bins", "256"),
                ("du", "0.05"),
                ("n_max", "30"),
                ("t_max", "10"),
            ],
            Kind::Summability => &[
                ("backend", "geometric"),
                ("preset", "default"),
                ("beta", "6"),
                ("n_max", "1000000"),
            ],
            Kind::Distortion => &[
                ("backend", "geometric"),
                ("preset", "default"),
                ("y_lo", "0.3"),
                ("y_hi", "0.7"),
                ("max_tau", "20"),
                ("depth", "8"),
                ("tol", "1e-10"),
            ],
            Kind::Correlations => &[
                ("backend", "ode"),
                ("preset", "classical"),
                ("observable", "z"),
                ("observable_w", "z"),
                ("dt", "0.05"),
                ("length", "40000"),
                ("max_lag", "800"),
            ],
            Kind::Clt => &[
                ("backend", "ode"),
                ("preset", "classical"),
                ("observable", "z"),
                ("block", "2048"),
                ("blocks", "512"),
                ("seeds", "1"),
            ],
            Kind::Variance => &[
                ("backend", "ode"),
                ("preset", "classical"),
                ("observable", "z"),
                ("length", "1000000"),
                ("max_lag", "1000"),
                ("block", "1000"),
            ],
            Kind::Lil => &[
                ("backend", "iid"),
                ("preset", "default"),
                ("observable", "x"),
                ("length", "10000000"),
                ("mean", "sample"),
            ],
            Kind::Obstruction => &[
                ("backend", "ode"),
                ("preset", "classical"),
                ("observable", "generic"),
                ("returns", "2,3"),
                ("events", "4000"),
                ("mean_length", "200000"),
            ],
            Kind::Coboundary => &[
                ("backend", "geometric"),
                ("preset", "default"),
                ("observable", "generic"),
                ("terms", "15"),
                ("nx", "20"),
                ("ny", "5"),
                ("nu", "4"),
                ("leaf_pairs", "100"),
            ],
            Kind::Report => &[("manifests", "")],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Every schema key, defaults filled in.
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Full schema listing used in config error messages.
pub fn schema_listing() -> String {
    let mut s =
        String::from("expected `experiment = <kind>` plus optional keys `seed`, `out` and:\n");
    for (name, kind) in KINDS {
        let keys: Vec<String> = kind
            .schema()
            .iter()
            .map(|(k, d)| format!("{k}={d}"))
            .collect();
        let _ = writeln!(s, "  {name}: {}", keys.join(" "));
    }
    s
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                LabError::Config(format!("line {}: expected key = value", no + 1))
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if raw.insert(k.clone(), v).is_some() {
                return Err(LabError::Config(format!("duplicate key `{k}`")));
            }
        }
        let kind_name = raw.remove("experiment").ok_or_else(|| {
            LabError::Config(format!("missing `experiment`\n{}", schema_listing()))
        })?;
        let kind = Kind::parse(&kind_name).ok_or_else(|| {
            LabError::Config(format!(
                "unknown experiment `{kind_name}`\n{}",
                schema_listing()
            ))
        })?;
        let seed = match raw.remove("seed") {
            Some(s) => s
                .parse()
                .map_err(|_| LabError::Config(format!("seed `{s}` is not a u64")))?,
            None => 0,
        };
        let out = raw.remove("out").map(PathBuf::from);
        let mut params = BTreeMap::new();
        for (k, d) in kind.schema() {
            params.insert(
                k.to_string(),
                raw.remove(*k).unwrap_or_else(|| d.to_string()),
            );
        }
        if let Some(k) = raw.keys().next() {
            let allowed: Vec<&str> = kind.schema().iter().map(|(k, _)| *k).collect();
            return Err(LabError::Config(format!(
                "unknown key `{k}` for `{}`; allowed: experiment, seed, out, {}",
                kind.name(),
                allowed.join(", ")
            )));
        }
        let cfg = ExperimentConfig {
            kind,
            params,
            seed,
            out,
        };
        cfg.backend()?;
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.params.get(key).map(String::as_str).ok_or_else(|| {
            LabError::Config(format!("key `{key}` is not part of `{}`", self.kind.name()))
        })
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.get(key)?;
        v.parse()
            .ok()
            .filter(|x: &f64| x.is_finite())
            .ok_or_else(|| LabError::Config(format!("`{key} = {v}` is not a finite number")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| LabError::Config(format!("`{key} = {v}` is not a nonnegative integer")))
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let v = self.get(key)?;
        v.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    LabError::Config(format!("`{key} = {v}` is not a list of integers"))
                })
            })
            .collect()
    }

    pub fn backend(&self) -> Result<Backend> {
        let Some(name) = self.params.get("backend") else {
            return Ok(Backend::IidGaussian);
        };
        let preset = self
            .params
            .get("preset")
            .map(String::as_str)
            .unwrap_or("default");
        match name.as_str() {
            "ode" => FlowParams::preset(preset)
                .map(Backend::Ode)
                .ok_or_else(|| LabError::Config(format!("unknown ODE preset `{preset}`"))),
            "geometric" => GeoModel::preset(preset)
                .map(Backend::Geometric)
                .ok_or_else(|| LabError::Config(format!("unknown geometric preset `{preset}`"))),
            "iid" => Ok(Backend::IidGaussian),
            other => Err(LabError::Config(format!(
                "unknown backend `{other}` (ode | geometric | iid)"
            ))),
        }
    }

    pub fn model(&self) -> Result<GeoModel> {
        match self.backend()? {
            Backend::Geometric(m) => Ok(m),
            _ => Err(LabError::Config(format!(
                "`{}` needs backend = geometric",
                self.kind.name()
            ))),
        }
    }

    pub fn flow_params(&self) -> Result<FlowParams> {
        match self.backend()? {
            Backend::Ode(p) => Ok(p),
            _ => Err(LabError::Config(format!(
                "`{}` needs backend = ode",
                self.kind.name()
            ))),
        }
    }

    /// Canonical text: every key in sorted order, seed included.
    pub fn canonical(&self) -> String {
        let mut s = format!("experiment = {}\nseed = {}\n", self.kind.name(), self.seed);
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::parse("experiment = ulam\nbins = 64\n").unwrap();
        assert_eq!(c.usize("bins").unwrap(), 64);
        assert_eq!(c.usize("fine_bins").unwrap(), 2048);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = ExperimentConfig::parse("experiment = ulam\nbogus = 1\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn empty_config_lists_schema() {
        let e = ExperimentConfig::parse("").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("coboundary:"));
    }

    #[test]
    fn hash_ignores_layout() {
        let a = ExperimentConfig::parse("experiment = spectrum\nseed = 3").unwrap();
        let b = ExperimentConfig::parse("# comment\nseed=3\n\nexperiment=spectrum\n").unwrap();
        assert_eq!(a.hash(), b.hash());
    }
}
