//! Experiments on the geometric model: inducing, transfer operators,
//! temporal distortion and the coboundary construction.

use rayon::prelude::*;

use geolorenz_core::distortion::{
    big_d, box_dimension, cantor_midpoints, dyadic_ladder, range_ladder, reference_points,
    subsystem_points, ProductDomain,
};
use geolorenz_core::geometric::{word_to_string, GeoModel};
use geolorenz_core::inducing::{
    build_scheme_partial, roof_lipschitz, roof_tail, InducedScheme, MIN_COVERAGE,
};
use geolorenz_core::stats::{coboundary_series, suspension_grid, v_hat_at, Backend, Observable};
use geolorenz_core::transfer::{
    acim, cm_conditions, decay_norms, default_b_grid, semiflow_lt, synthetic_norms, transfer,
    twisted_decay, ulam, AcimDensity, BaseMap, DoublingMap, SuspensionGrid, UlamOperator,
};

use super::Outputs;
use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::io::fmt_f64;

/// Cylinders with `τ` up to this are listed individually in `scheme.csv`.
const LISTED_TAU: usize = 20;

fn y_bar(cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    let (lo, hi) = (cfg.f64("y_lo")?, cfg.f64("y_hi")?);
    if !(-1.0 < lo && lo < hi && hi < 1.0) {
        return Err(LabError::Config(format!(
            "need -1 < y_lo < y_hi < 1, got ({lo}, {hi})"
        )));
    }
    Ok((lo, hi))
}

pub fn induce(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let m = cfg.model()?;
    let scheme = build_scheme_partial(&m, y_bar(cfg)?, cfg.usize("max_tau")?)?;
    let listed = scheme.cylinders.iter().filter(|c| c.tau <= LISTED_TAU);
    out.csv(
        "scheme.csv",
        &["left", "right", "tau", "word"],
        listed.map(|c| {
            vec![
                fmt_f64(c.left),
                fmt_f64(c.right),
                c.tau.to_string(),
                word_to_string(&c.word()),
            ]
        }),
    )?;
    let max_tau = scheme.max_tau();
    let mut per_tau = vec![(0usize, 0.0f64); max_tau + 1];
    for c in &scheme.cylinders {
        per_tau[c.tau].0 += 1;
        per_tau[c.tau].1 += c.len();
    }
    out.csv(
        "scheme_by_tau.csv",
        &["tau", "count", "length"],
        per_tau
            .iter()
            .enumerate()
            .filter(|(_, (n, _))| *n > 0)
            .map(|(t, (n, l))| vec![t.to_string(), n.to_string(), fmt_f64(*l)]),
    )?;
    let tail = roof_tail(&m, &scheme, None)?;
    out.csv(
        "tail.csv",
        &["t", "survival"],
        tail.points
            .iter()
            .map(|(t, s)| vec![fmt_f64(*t), fmt_f64(*s)]),
    )?;
    let (d_lo, d_hi) = (cfg.usize("depth_lo")?, cfg.usize("depth_hi")?);
    let lip_lo = roof_lipschitz(&m, &scheme, d_lo)?;
    let lip_hi = roof_lipschitz(&m, &scheme, d_hi)?;
    let lip_change = (lip_hi - lip_lo).abs() / lip_lo.abs().max(f64::MIN_POSITIVE);

    let coverage = scheme.mass_covered;
    out.value("cylinders", scheme.cylinders.len() as f64);
    out.value("coverage", coverage);
    out.value("tail_slope", tail.slope);
    out.value("tail_r_squared", tail.r_squared);
    out.value("lipschitz_lo", lip_lo);
    out.value("lipschitz_hi", lip_hi);
    out.value("lipschitz_change", lip_change);
    out.work = scheme.cylinders.len() as u64;

    let parts = [
        coverage >= MIN_COVERAGE,
        tail.slope < 0.0 && tail.r_squared >= 0.95,
        lip_change < 0.05,
    ];
    out.verdict(
        5,
        parts.iter().all(|p| *p),
        format!(
            "coverage={coverage:.5} (need {MIN_COVERAGE}) slope={:.4} R2={:.4} |R|_theta change={:.2e}",
            tail.slope, tail.r_squared, lip_change
        ),
    );
    Ok(())
}

/// `⟨P̂v, w⟩_h − ⟨v, w∘f⟩_h` for two fixed bin functions.
fn duality_defect(u: &UlamOperator, h: &AcimDensity) -> f64 {
    let c = u.centers();
    let v: Vec<f64> = c.iter().map(|x| (3.0 * x).sin() + 0.2).collect();
    let w: Vec<f64> = c.iter().map(|x| x * x - 0.5 * x).collect();
    let pv = transfer(u, h, &v);
    let wf = u.compose(&w);
    let lhs: f64 = pv
        .iter()
        .zip(&w)
        .zip(&h.mass)
        .map(|((a, b), m)| a * b * m)
        .sum();
    let rhs: f64 = v
        .iter()
        .zip(&wf)
        .zip(&h.mass)
        .map(|((a, b), m)| a * b * m)
        .sum();
    (lhs - rhs).abs()
}

fn doubling_exact() -> Result<bool> {
    for n in [2usize, 4, 8] {
        let u = ulam(&DoublingMap, n)?;
        for i in 0..n {
            for j in 0..n {
                let expect = if j / 2 == i % (n / 2) { 0.5 } else { 0.0 };
                if u.entry(i, j) != expect {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn ulam_exp(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let m = cfg.model()?;
    let (n, n_fine) = (cfg.usize("bins")?, cfg.usize("fine_bins")?);
    let u = ulam(&BaseMap(&m), n)?;
    let h = acim(&u)?;
    let h_fine = acim(&ulam(&BaseMap(&m), n_fine)?)?;
    out.csv(
        "operator.csv",
        &["i", "j", "value"],
        u.triplets()
            .into_iter()
            .map(|(i, j, v)| vec![i.to_string(), j.to_string(), fmt_f64(v)]),
    )?;
    let c = u.centers();
    out.csv(
        "density.csv",
        &["bin_center", "density"],
        c.iter()
            .zip(&h.density)
            .map(|(x, d)| vec![fmt_f64(*x), fmt_f64(*d)]),
    )?;
    let l1 = h.l1_distance(&h_fine);
    let dual = duality_defect(&u, &h);
    let exact = doubling_exact()?;
    out.value("acim_residual", h.residual);
    out.value("acim_iterations", h.iterations as f64);
    out.value("duality_defect", dual);
    out.value("l1_refinement", l1);
    out.text("doubling_exact", exact.to_string());
    out.work = (n + n_fine) as u64;
    out.verdict(
        6,
        exact && h.residual < 1e-10 && dual <= 1e-8 && l1 < 5e-3,
        format!(
            "doubling exact={exact} residual={:.2e} duality={dual:.2e} L1({n},{n_fine})={l1:.2e}",
            h.residual
        ),
    );
    Ok(())
}

fn b_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let (lo, hi, k) = (cfg.f64("b_min")?, cfg.f64("b_max")?, cfg.usize("b_count")?);
    if !(0.0 < lo && lo < hi) || k < 2 {
        return Err(LabError::Config(
            "need 0 < b_min < b_max and b_count >= 2".into(),
        ));
    }
    if (lo, hi, k) == (10.0, 1000.0, 40) {
        return Ok(default_b_grid());
    }
    Ok((0..k)
        .map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64))
        .collect())
}

pub fn twist(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let m = cfg.model()?;
    let bins = cfg.usize("bins")?;
    let beta = cfg.f64("beta_scan")?;
    let grid = b_grid(cfg)?;
    let d = twisted_decay(&BaseMap(&m), bins, &grid, beta)?;
    let at_zero = twisted_decay(&BaseMap(&m), bins, &[0.0], beta)?.factors[0];
    let flat = GeoModel::preset("constant-roof").expect("built-in preset");
    let dc = twisted_decay(&BaseMap(&flat), bins, &grid, beta)?;
    let flat_dev = dc
        .factors
        .iter()
        .map(|f| (f - 1.0).abs())
        .fold(0.0, f64::max);
    out.csv(
        "twist.csv",
        &["b", "steps", "factor", "constant_roof_factor"],
        (0..grid.len()).map(|i| {
            vec![
                fmt_f64(d.b_values[i]),
                d.steps[i].to_string(),
                fmt_f64(d.factors[i]),
                fmt_f64(dc.factors[i]),
            ]
        }),
    )?;
    out.value("factor_b0", at_zero);
    out.value("max_factor", d.max_factor());
    out.value("constant_roof_max_deviation", flat_dev);
    out.work = d.steps.iter().chain(&dc.steps).map(|s| *s as u64).sum();
    if grid == default_b_grid() && m.lambda_u.is_finite() {
        out.verdict(
            10,
            (at_zero - 1.0).abs() <= 1e-9 && d.max_factor() <= 0.98 && flat_dev <= 1e-9,
            format!(
                "b=0 factor {at_zero:.12} max factor {:.4} constant-roof deviation {flat_dev:.2e}",
                d.max_factor()
            ),
        );
    }
    Ok(())
}

pub fn semiflow(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let m = cfg.model()?;
    let grid = SuspensionGrid::new(&BaseMap(&m), cfg.usize("bins")?, cfg.f64("du")?)?;
    let v = grid.sample(|y, u| (3.0 * y).sin() + 0.5 * u);
    let norms = decay_norms(&grid, &v, cfg.usize("n_max")?)?;
    out.csv(
        "norms.csv",
        &["n", "p1", "p2", "p4"],
        norms.iter().enumerate().map(|(i, n)| {
            vec![
                (i + 1).to_string(),
                fmt_f64(n[0]),
                fmt_f64(n[1]),
                fmt_f64(n[2]),
            ]
        }),
    )?;
    let r_inf = grid.min_roof();
    let t_max = cfg.usize("t_max")?;
    let ones = vec![1.0; grid.cell_count()];
    let mut rows = Vec::new();
    let mut ok = true;
    for t in 1..=t_max {
        let r = semiflow_lt(&grid, &ones, t as f64)?;
        let bound = t as f64 / r_inf + 1.0;
        ok &= r.terms as f64 <= bound;
        rows.push(vec![t.to_string(), r.terms.to_string(), fmt_f64(bound)]);
    }
    out.csv("terms.csv", &["t", "terms", "bound"], rows)?;
    out.value("min_roof", r_inf);
    out.value("cells", grid.cell_count() as f64);
    out.work = (grid.cell_count() * (t_max + norms.len())) as u64;
    out.verdict(
        7,
        ok,
        format!("term counts within t/inf R + 1 for t = 1..{t_max}"),
    );
    Ok(())
}

pub fn summability(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let beta = cfg.f64("beta")?;
    let n_max = cfg.usize("n_max")?;
    let [_, n2, n4] = synthetic_norms(beta, n_max);
    let rep = cm_conditions(&n2, &n4, None)?;
    let [_, c2, c4] = synthetic_norms(2.0, n_max);
    let control = cm_conditions(&c2, &c4, None)?;
    let mut rows = Vec::new();
    for (label, r) in [("beta", &rep), ("control", &control)] {
        for (k, s) in r.series.iter().enumerate() {
            for (n, sum) in &s.checkpoints {
                rows.push(vec![
                    label.to_string(),
                    (k + 1).to_string(),
                    n.to_string(),
                    fmt_f64(*sum),
                ]);
            }
        }
    }
    out.csv("cm.csv", &["run", "series", "n", "partial_sum"], rows)?;
    for (k, s) in rep.series.iter().enumerate() {
        out.text(
            &format!("series_{}_stabilized", k + 1),
            s.stabilized.to_string(),
        );
        out.value(&format!("series_{}_total", k + 1), s.total);
    }
    out.text(
        "control_series_1_stabilized",
        control.series[0].stabilized.to_string(),
    );
    out.work = 2 * n_max as u64;
    if beta == 6.0 {
        out.verdict(
            8,
            rep.all_stabilized() && !control.series[0].stabilized,
            format!(
                "beta=6 stabilized {:?}, beta=2 series 1 stabilized {}",
                rep.series.iter().map(|s| s.stabilized).collect::<Vec<_>>(),
                control.series[0].stabilized
            ),
        );
    }
    Ok(())
}

/// The two longest cylinders of a scheme.
fn largest_pair(s: &InducedScheme) -> Result<(usize, usize)> {
    let mut idx: Vec<usize> = (0..s.cylinders.len()).collect();
    if idx.len() < 2 {
        return Err(geolorenz_core::Error::InsufficientSample(
            "scheme has fewer than two cylinders",
        )
        .into());
    }
    idx.sort_by(|&a, &b| {
        s.cylinders[b]
            .len()
            .total_cmp(&s.cylinders[a].len())
            .then(a.cmp(&b))
    });
    Ok((idx[0], idx[1]))
}

pub fn distortion(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let m = cfg.model()?;
    let scheme = build_scheme_partial(&m, y_bar(cfg)?, cfg.usize("max_tau")?)?;
    let (c1, c2) = largest_pair(&scheme)?;
    let depth = cfg.usize("depth")?;
    let tol = cfg.f64("tol")?;
    let points = subsystem_points(&m, &scheme, c1, c2, depth)?;
    let refs = reference_points(&points);
    let dom = ProductDomain::single(scheme.y_bar);
    let pairs: Vec<(usize, usize)> = (0..2)
        .flat_map(|r| (0..points.len()).map(move |i| (r, i)))
        .collect();
    let samples = pairs
        .par_iter()
        .map(|&(r, i)| big_d(&m, &dom, &points[i], &refs[r], tol))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    out.csv(
        "dsamples.csv",
        &["x_p", "hist_p", "x_q", "hist_q", "value", "tail_bound"],
        samples.iter().map(|s| {
            vec![
                fmt_f64(s.p.x),
                s.p.history_string(),
                fmt_f64(s.q.x),
                s.q.history_string(),
                fmt_f64(s.value),
                fmt_f64(s.tail_bound),
            ]
        }),
    )?;
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let fit = box_dimension(&values, &range_ladder(&values, depth))?;
    let max_abs = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    // Controls: an interval and the middle-thirds Cantor set.
    let k = 12u32;
    let interval: Vec<f64> = (0..1u32 << k)
        .map(|i| (i as f64 + 0.5) / (1u32 << k) as f64)
        .collect();
    let interval_fit = box_dimension(&interval, &dyadic_ladder(1.0, 2, k - 2))?;
    let cantor = cantor_midpoints(k);
    let cantor_ladder: Vec<f64> = (2..k as i32 - 1).map(|j| 3f64.powi(-j)).collect();
    let cantor_fit = box_dimension(&cantor, &cantor_ladder)?;

    let lines: Vec<(&str, f64)> = vec![
        ("slope", fit.slope),
        ("intercept", fit.intercept),
        ("r_squared", fit.r_squared),
        ("values", values.len() as f64),
        ("max_abs_d", max_abs),
        ("interval_slope", interval_fit.slope),
        ("cantor_slope", cantor_fit.slope),
    ];
    let path = out.file("dimension.txt");
    crate::io::write_json_like(&path, &lines)?;
    out.csv(
        "box_counts.csv",
        &["eps", "count"],
        fit.counts
            .iter()
            .map(|(e, n)| vec![fmt_f64(*e), n.to_string()]),
    )?;
    for (k, v) in &lines {
        out.value(k, *v);
    }
    out.work = samples.len() as u64;
    out.verdict(
        9,
        max_abs > 1e-4
            && (interval_fit.slope - 1.0).abs() <= 0.05
            && (cantor_fit.slope - 0.63).abs() <= 0.05
            && fit.slope >= 0.1
            && fit.r_squared >= 0.9,
        format!(
            "max|D|={max_abs:.3e} interval={:.4} cantor={:.4} subsystem slope={:.4} R2={:.4}",
            interval_fit.slope, cantor_fit.slope, fit.slope, fit.r_squared
        ),
    );
    Ok(())
}

/// `∫ r dμ` for the acim of the base map, by midpoint sub-sampling.
fn mean_roof(m: &GeoModel, h: &AcimDensity) -> Result<f64> {
    const SUB: usize = 32;
    let mut s = 0.0;
    for (i, mass) in h.mass.iter().enumerate() {
        let (a, b) = (h.edges[i], h.edges[i + 1]);
        let mut r = 0.0;
        for k in 0..SUB {
            r += m.roof(a + (b - a) * (k as f64 + 0.5) / SUB as f64)?;
        }
        s += mass * r / SUB as f64;
    }
    Ok(s)
}

/// Low-discrepancy point in `[0, 1)`.
fn weyl(k: usize, alpha: f64) -> f64 {
    (0.5 + k as f64 * alpha).fract()
}

pub fn coboundary(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let backend = cfg.backend()?;
    let m = cfg.model()?;
    let name = cfg.get("observable")?;
    let v = Observable::parse(name, &backend)
        .ok_or_else(|| LabError::Config(format!("unknown observable `{name}`")))?
        .evaluator(&backend)?;
    let n = cfg.usize("terms")?;
    let grid = suspension_grid(&m, cfg.usize("nx")?, cfg.usize("ny")?, cfg.usize("nu")?)?;
    let dec = coboundary_series(&m, &v, &grid, n)?;
    let dec2 = coboundary_series(&m, &v, &grid, 2 * n)?;
    let refinement = dec
        .chi
        .iter()
        .zip(&dec2.chi)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    out.csv(
        "coboundary.csv",
        &["x", "y", "u", "chi", "v_hat"],
        (0..grid.len()).map(|i| {
            let p = &grid[i];
            vec![
                fmt_f64(p[0]),
                fmt_f64(p[1]),
                fmt_f64(p[2]),
                fmt_f64(dec.chi[i]),
                fmt_f64(dec.v_hat[i]),
            ]
        }),
    )?;
    out.csv(
        "terms.csv",
        &["n", "term_max"],
        dec.term_max
            .iter()
            .enumerate()
            .map(|(k, t)| vec![k.to_string(), fmt_f64(*t)]),
    )?;

    // Stable-leaf pairs (x, y, u) and (x, y', u).
    let pairs = cfg.usize("leaf_pairs")?;
    let mut leaf_max = 0.0f64;
    for k in 0..pairs {
        let mut x = 2.0 * weyl(k, 0.618_033_988_749_894_9) - 1.0;
        if x.abs() < 0.05 {
            x = 0.05f64.copysign(x);
        }
        let y = 2.0 * weyl(k, 0.414_213_562_373_095_1) - 1.0;
        let y2 = 2.0 * weyl(k, 0.732_050_807_568_877_2) - 1.0;
        let u = 0.99 * weyl(k, 0.236_067_977_499_789_7) * m.roof(x)?;
        let a = v_hat_at(&m, &v, &[x, y, u], n)?;
        let b = v_hat_at(&m, &v, &[x, y2, u], n)?;
        leaf_max = leaf_max.max((a - b).abs());
    }

    let h = acim(&ulam(&BaseMap(&m), 1024)?)?;
    let r_bar = mean_roof(&m, &h)?;
    let bracket = (m.c_s.powf(1.5 / r_bar), m.c_s.powf(0.5 / r_bar));
    out.value("rate", dec.rate);
    out.value("bracket_lo", bracket.0);
    out.value("bracket_hi", bracket.1);
    out.value("mean_roof", r_bar);
    out.value("tail_bound", dec.tail_bound);
    out.value("leaf_max", leaf_max);
    out.value("doubling_change", refinement);
    out.work = (grid.len() * 3 * n + pairs * 2 * n) as u64;
    if matches!(backend, Backend::Geometric(_)) {
        out.verdict(
            13,
            bracket.0 <= dec.rate && dec.rate <= bracket.1 && leaf_max <= 10.0 * dec.tail_bound,
            format!(
                "rate={:.4} in [{:.4}, {:.4}], leaf max {leaf_max:.3e} vs 10x tail {:.3e}",
                dec.rate,
                bracket.0,
                bracket.1,
                10.0 * dec.tail_bound
            ),
        );
    }
    Ok(())
}
