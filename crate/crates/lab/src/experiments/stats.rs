//! Statistical experiments on sampled time series.

use rayon::prelude::*;

use geolorenz_core::stats::{
    block_variance, clt_harness, correlation_curve_with, green_kubo_sigma2_with, lil_diagnostic,
    sample_states, Backend, Observable, ObservableFn, Provenance, TimeSeries, Window, CLT_MAX_LAG,
};

use super::Outputs;
use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::fft::FftSums;
use crate::io::{fmt_f64, write_json_like};

/// KS level of the CLT test and of its calibration.
const KS_LEVEL: f64 = 0.01;
const CALIBRATION_MAX_REJECT: f64 = 0.03;
const CROSS_CHECK: f64 = 0.15;
/// Coboundary thresholds: variance collapse and a vanishing LIL curve.
const COLLAPSE_FRACTION: f64 = 0.02;
const LIL_VANISH: f64 = 0.1;

fn observable(cfg: &ExperimentConfig, key: &str, backend: &Backend) -> Result<ObservableFn> {
    let name = cfg.get(key)?;
    Observable::parse(name, backend)
        .ok_or_else(|| {
            LabError::Config(format!(
                "unknown observable `{name}` (x, y, z, u, bump, generic, coboundary)"
            ))
        })?
        .evaluator(backend)
        .map_err(Into::into)
}

/// Samples `v` (and optionally `w`) along one orbit.
fn sample(
    backend: &Backend,
    fs: &[&ObservableFn],
    names: &[&str],
    dt: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<TimeSeries>> {
    let mut cols: Vec<Vec<f64>> = fs.iter().map(|_| Vec::with_capacity(n)).collect();
    sample_states(backend, dt, n, seed, |_, s| {
        for (c, f) in cols.iter_mut().zip(fs) {
            c.push(f(s));
        }
    })?;
    cols.into_iter()
        .zip(names)
        .map(|(values, name)| {
            let prov = Provenance {
                backend: backend.name(),
                observable: name.to_string(),
                seed,
            };
            TimeSeries::new(dt, values, prov).map_err(Into::into)
        })
        .collect()
}

pub fn correlations(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let backend = cfg.backend()?;
    let v = observable(cfg, "observable", &backend)?;
    let w = observable(cfg, "observable_w", &backend)?;
    let (dt, n, max_lag) = (cfg.f64("dt")?, cfg.usize("length")?, cfg.usize("max_lag")?);
    let names = [cfg.get("observable")?, cfg.get("observable_w")?];
    let s = sample(&backend, &[&v, &w], &names, dt, n, cfg.seed)?;
    let c = correlation_curve_with(&FftSums, &s[0], &s[1], max_lag)?;
    out.csv(
        "correlation.csv",
        &["lag", "corr", "stderr"],
        (0..c.lags.len()).map(|k| {
            vec![
                fmt_f64(c.lags[k]),
                fmt_f64(c.values[k]),
                fmt_f64(c.stderr[k]),
            ]
        }),
    )?;
    out.value("variance_v", s[0].variance());
    out.value("corr_lag0", c.values[0]);
    match c.decay_time(3.0) {
        Some(t) => {
            out.value("decay_time", t);
            if let Ok((slope, r2)) = c.local_exponent(1.0, t) {
                out.value("local_exponent", slope);
                out.value("local_exponent_r_squared", r2);
            }
        }
        None => out.text("decay_time", "none"),
    }
    out.work = n as u64;
    Ok(())
}

pub fn clt(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let backend = cfg.backend()?;
    let name = cfg.get("observable")?;
    let v = observable(cfg, "observable", &backend)?;
    let (n, m, seeds) = (
        cfg.usize("block")?,
        cfg.usize("blocks")?,
        cfg.usize("seeds")?,
    );
    let reports = (0..seeds as u64)
        .into_par_iter()
        .map(|k| clt_harness(&FftSums, &backend, &v, n, m, cfg.seed + k))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    out.csv(
        "clt.csv",
        &[
            "seed",
            "n",
            "M",
            "ks_stat",
            "ks_p",
            "sigma2_gk",
            "sigma2_blocks",
            "variance",
        ],
        reports.iter().enumerate().map(|(k, r)| {
            vec![
                (cfg.seed + k as u64).to_string(),
                r.n.to_string(),
                r.m.to_string(),
                fmt_f64(r.ks_stat),
                fmt_f64(r.ks_p),
                fmt_f64(r.sigma2_gk),
                fmt_f64(r.sigma2_blocks),
                fmt_f64(r.variance),
            ]
        }),
    )?;
    let first = &reports[0];
    out.csv(
        "block_sums.csv",
        &["index", "normalized_sum"],
        first
            .normalized_sums
            .iter()
            .enumerate()
            .map(|(i, s)| vec![i.to_string(), fmt_f64(*s)]),
    )?;
    let path = out.file("clt_report.txt");
    write_json_like(
        &path,
        &[
            ("n", first.n as f64),
            ("M", first.m as f64),
            ("ks_stat", first.ks_stat),
            ("ks_p", first.ks_p),
            ("sigma2_gk", first.sigma2_gk),
            ("sigma2_blocks", first.sigma2_blocks),
        ],
    )?;
    let rejections = reports.iter().filter(|r| r.ks_p < KS_LEVEL).count();
    let rate = rejections as f64 / reports.len() as f64;
    let gap =
        (first.sigma2_gk - first.sigma2_blocks).abs() / first.sigma2_blocks.max(f64::MIN_POSITIVE);
    out.value("ks_p", first.ks_p);
    out.value("sigma2_gk", first.sigma2_gk);
    out.value("sigma2_blocks", first.sigma2_blocks);
    out.value("variance", first.variance);
    out.value("estimator_gap", gap);
    out.value("rejection_rate", rate);
    out.work = (reports.len() * m * (n + 50)) as u64;

    match (&backend, name) {
        (Backend::IidGaussian, _) if seeds >= 100 => out.verdict(
            11,
            rate <= CALIBRATION_MAX_REJECT,
            format!(
                "iid calibration: {rejections}/{} rejections at the 1% level",
                reports.len()
            ),
        ),
        (Backend::Ode(_), "z") if n == 2048 && m == 512 => out.verdict(
            11,
            first.ks_p > KS_LEVEL && gap <= CROSS_CHECK,
            format!(
                "KS p={:.4} sigma2 GK={:.4} blocks={:.4} gap={:.1}%",
                first.ks_p,
                first.sigma2_gk,
                first.sigma2_blocks,
                100.0 * gap
            ),
        ),
        (Backend::Geometric(_), "coboundary") => {
            let floor = COLLAPSE_FRACTION * first.variance;
            out.verdict(
                12,
                first.sigma2_gk <= floor && first.sigma2_blocks <= floor,
                format!(
                    "coboundary sigma2 GK={:.3e} blocks={:.3e} vs 0.02 Var={floor:.3e}",
                    first.sigma2_gk, first.sigma2_blocks
                ),
            )
        }
        _ => {}
    }
    Ok(())
}

pub fn variance(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let backend = cfg.backend()?;
    let name = cfg.get("observable")?;
    let v = observable(cfg, "observable", &backend)?;
    let (n, max_lag, block) = (
        cfg.usize("length")?,
        cfg.usize("max_lag")?,
        cfg.usize("block")?,
    );
    let s = sample(&backend, &[&v], &[name], 1.0, n, cfg.seed)?.remove(0);
    let gk = green_kubo_sigma2_with(&FftSums, &s, Window::Bartlett, max_lag)?;
    let blocks = block_variance(&s.values, block)?;
    let path = out.file("variance.txt");
    write_json_like(
        &path,
        &[
            ("sigma2_gk", gk.sigma2),
            ("sigma2_gk_stderr", gk.stderr),
            ("truncation", gk.truncation as f64),
            ("sigma2_blocks", blocks),
            ("variance", s.variance()),
        ],
    )?;
    out.value("sigma2_gk", gk.sigma2);
    out.value("sigma2_gk_stderr", gk.stderr);
    out.value("truncation", gk.truncation as f64);
    out.value("sigma2_blocks", blocks);
    out.value("variance", s.variance());
    out.text("degenerate", gk.degenerate.to_string());
    out.work = n as u64;
    Ok(())
}

pub fn lil(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let backend = cfg.backend()?;
    let name = cfg.get("observable")?;
    let v = observable(cfg, "observable", &backend)?;
    let n = cfg.usize("length")?;
    let s = sample(&backend, &[&v], &[name], 1.0, n, cfg.seed)?.remove(0);
    let mean = match cfg.get("mean")? {
        "sample" => s.mean(),
        _ => cfg.f64("mean")?,
    };
    let gk = green_kubo_sigma2_with(&FftSums, &s, Window::Bartlett, CLT_MAX_LAG.min(n / 10))?;
    // A clipped Green–Kubo estimate falls back to the sample variance, which
    // bounds the curve of a coboundary from below.
    let (sigma2, source) = if gk.sigma2 > 0.0 {
        (gk.sigma2, "green-kubo")
    } else {
        (s.variance(), "sample-variance")
    };
    let curve = lil_diagnostic(&s.values, mean, sigma2)?;
    out.csv(
        "lil.csv",
        &["n", "value"],
        curve
            .points
            .iter()
            .map(|(k, x)| vec![k.to_string(), fmt_f64(*x)]),
    )?;
    out.value("mean", mean);
    out.value("sigma2", sigma2);
    out.text("sigma2_source", source);
    out.value("sup_last_two_decades", curve.sup_last_two_decades);
    out.work = n as u64;
    if matches!(backend, Backend::Geometric(_)) && name == "coboundary" {
        out.verdict(
            12,
            curve.sup_last_two_decades < LIL_VANISH,
            format!(
                "coboundary LIL sup over last two decades {:.3e}",
                curve.sup_last_two_decades
            ),
        );
    }
    Ok(())
}
