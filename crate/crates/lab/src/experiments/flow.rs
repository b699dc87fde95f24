//! Experiments on the Lorenz equations themselves.

use geolorenz_core::flow::{
    equilibrium_spectrum, flow, foliation_at_origin, foliation_criterion, lyapunov_exponents,
    FlowParams, State3,
};
use geolorenz_core::section::{
    close_returns, empirical_quotient, find_periodic_orbit, stream_crossings, CrossingEvent,
    PeriodicOrbit, SectionSpec,
};
use geolorenz_core::stats::{
    initial_state, periodic_obstruction, sample_observable, Backend, Observable,
};
use geolorenz_core::Error;

use super::Outputs;
use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::io::fmt_f64;

const TOL: f64 = 1e-10;
const FOLIATION_POINTS: usize = 100;
const FOLIATION_T: f64 = 5.0;
const FOLIATION_EPS: f64 = 0.01;
/// Time between sampled attractor points for the foliation test.
const FOLIATION_SPACING: f64 = 1.0;

fn is_classical(p: &FlowParams) -> bool {
    *p == FlowParams::CLASSICAL
}

fn start(p: &FlowParams, seed: u64) -> Result<State3> {
    Ok(State3::from_array(initial_state(&Backend::Ode(*p), seed)?))
}

pub fn spectrum(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let p = cfg.flow_params()?;
    let s = equilibrium_spectrum(&p)?;
    out.value("lambda_u", s.lambda_u);
    out.value("lambda_s", s.lambda_s);
    out.value("lambda_ss", s.lambda_ss);
    out.value("delta", s.delta);
    out.text("strongly_dissipative", s.strongly_dissipative().to_string());
    out.work = 1;
    if is_classical(&p) {
        let pass = (s.lambda_s + 8.0 / 3.0).abs() <= 1e-12
            && (s.lambda_u - 11.83).abs() <= 5e-3
            && (s.lambda_ss + 22.83).abs() <= 5e-3
            && s.strongly_dissipative();
        out.verdict(
            1,
            pass,
            format!(
                "lambda_s={:.15} lambda_u={:.5} lambda_ss={:.5} strongly_dissipative={}",
                s.lambda_s,
                s.lambda_u,
                s.lambda_ss,
                s.strongly_dissipative()
            ),
        );
    }
    Ok(())
}

/// Attractor points spaced `FOLIATION_SPACING` apart along one orbit.
fn attractor_points(p: &FlowParams, seed: u64, n: usize) -> Result<Vec<State3>> {
    let mut x = start(p, seed)?;
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        x = flow(p, x, FOLIATION_SPACING, TOL)?;
        pts.push(x);
    }
    Ok(pts)
}

pub fn lyapunov(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let p = cfg.flow_params()?;
    let t_total = cfg.f64("t_total")?;
    let exps = lyapunov_exponents(&p, start(&p, cfg.seed)?, t_total)?;
    out.csv(
        "exponents.csv",
        &["index", "lambda"],
        exps.iter()
            .enumerate()
            .map(|(i, l)| vec![(i + 1).to_string(), fmt_f64(*l)]),
    )?;
    let sum: f64 = exps.iter().sum();
    let div = p.divergence();
    out.value("lambda_1", exps[0]);
    out.value("lambda_2", exps[1]);
    out.value("lambda_3", exps[2]);
    out.value("sum", sum);
    out.value("divergence", div);

    let pts = attractor_points(&p, cfg.seed.wrapping_add(1), FOLIATION_POINTS)?;
    let rep = foliation_criterion(&p, &pts, FOLIATION_T, FOLIATION_EPS)?;
    out.csv(
        "foliation.csv",
        &["x", "y", "z", "eta_over_t", "transversality"],
        rep.samples.iter().map(|s| {
            vec![
                fmt_f64(s.point.x),
                fmt_f64(s.point.y),
                fmt_f64(s.point.z),
                fmt_f64(s.eta_over_t),
                fmt_f64(s.transversality),
            ]
        }),
    )?;
    let origin = foliation_at_origin(&p, FOLIATION_T, FOLIATION_EPS)?;
    let closed = equilibrium_spectrum(&p)?.foliation_exponent(FOLIATION_EPS);
    out.value("foliation_max", rep.max());
    out.value("foliation_origin", origin.eta_over_t);
    out.value("foliation_origin_closed_form", closed);
    out.work = (t_total / 0.5) as u64 + (FOLIATION_POINTS as u64) * 50;

    out.verdict(
        2,
        (sum - div).abs() <= 0.02 * div.abs() && exps[1].abs() <= 0.02,
        format!("sum={sum:.5} divergence={div:.5} lambda_2={:.5}", exps[1]),
    );
    out.verdict(
        3,
        rep.all_negative() && (origin.eta_over_t - closed).abs() <= 1e-6,
        format!(
            "max eta/t={:.4} over {} points, origin {:.8} vs {:.8}",
            rep.max(),
            rep.samples.len(),
            origin.eta_over_t,
            closed
        ),
    );
    Ok(())
}

/// Crossings of the default section along one orbit, at least `n` of them.
fn crossings(p: &FlowParams, seed: u64, n: usize) -> Result<Vec<CrossingEvent>> {
    let spec = SectionSpec::lorenz_default(p);
    let mut events = stream_crossings(p, start(p, seed)?, 1.5 * n as f64 + 10.0, TOL, &spec)?;
    if events.len() < n {
        return Err(Error::InsufficientSample("too few section crossings").into());
    }
    events.truncate(n);
    Ok(events)
}

pub fn section(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let p = cfg.flow_params()?;
    let n = cfg.usize("events")?;
    let events = crossings(&p, cfg.seed, n)?;
    out.csv(
        "events.csv",
        &["t", "x", "y", "z", "flight"],
        events.iter().map(|e| {
            vec![
                fmt_f64(e.time),
                fmt_f64(e.state.x),
                fmt_f64(e.state.y),
                fmt_f64(e.state.z),
                fmt_f64(e.flight),
            ]
        }),
    )?;
    let q = empirical_quotient(&events, cfg.usize("bins")?)?;
    let centers = q.bin_centers();
    out.csv(
        "quotient.csv",
        &["bin_center", "arg_mean", "f_value", "count"],
        (0..q.bins()).map(|i| {
            vec![
                fmt_f64(centers[i]),
                fmt_f64(q.arg_means[i]),
                fmt_f64(q.values[i]),
                q.counts[i].to_string(),
            ]
        }),
    )?;
    let mean_flight = events.iter().map(|e| e.flight).sum::<f64>() / events.len() as f64;
    out.value("events", events.len() as f64);
    out.value("mean_flight", mean_flight);
    out.value("expanding_fraction", q.expanding_fraction(1.0));
    out.work = events.len() as u64;
    Ok(())
}

pub fn obstruction(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let backend = cfg.backend()?;
    let p = cfg.flow_params()?;
    let name = cfg.get("observable")?;
    let obs = Observable::parse(name, &backend)
        .ok_or_else(|| LabError::Config(format!("unknown observable `{name}`")))?;
    let v = obs.evaluator(&backend)?;

    // SRB mean of v, with a batch-means standard error.
    let mean_len = cfg.usize("mean_length")?;
    let series = sample_observable(&backend, &v, name, 0.05, mean_len, cfg.seed)?;
    let mean = series.mean();
    let batch = mean_len / 20;
    let means: Vec<f64> = series
        .values
        .chunks_exact(batch.max(1))
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    let mm = means.iter().sum::<f64>() / means.len() as f64;
    let mean_se = (means.iter().map(|m| (m - mm).powi(2)).sum::<f64>()
        / ((means.len() - 1) * means.len()) as f64)
        .sqrt();
    out.value("mean", mean);
    out.value("mean_stderr", mean_se);

    let events = crossings(&p, cfg.seed.wrapping_add(1), cfg.usize("events")?)?;
    let spec = SectionSpec::lorenz_default(&p);
    let mut orbits: Vec<(usize, PeriodicOrbit)> = Vec::new();
    for n in cfg.usize_list("returns")? {
        let mut found = 0;
        for seed in close_returns(&events, n, 20) {
            if found == 2 {
                break;
            }
            let Ok(orb) = find_periodic_orbit(&p, &spec, seed, n) else {
                continue;
            };
            if orbits
                .iter()
                .any(|(_, o)| (o.period - orb.period).abs() < 1e-6)
            {
                continue;
            }
            orbits.push((n, orb));
            found += 1;
        }
    }
    if orbits.is_empty() {
        return Err(Error::InsufficientSample("no periodic orbit found").into());
    }
    let mut rows = Vec::new();
    let mut best = 0.0f64;
    for (n, orb) in &orbits {
        let integral = periodic_obstruction(&p, orb, |s: &State3| v(&s.to_array()))?;
        let centred = integral - mean * orb.period;
        best = best.max(centred.abs());
        rows.push(vec![
            n.to_string(),
            fmt_f64(orb.period),
            fmt_f64(orb.residual),
            fmt_f64(integral),
            fmt_f64(centred),
            fmt_f64(orb.period * mean_se),
        ]);
    }
    out.csv(
        "obstruction.csv",
        &[
            "returns",
            "period",
            "residual",
            "integral",
            "centred",
            "centred_stderr",
        ],
        rows,
    )?;
    out.value("orbits", orbits.len() as f64);
    out.value("max_abs_centred", best);
    out.work = mean_len as u64 + events.len() as u64;
    if name == "generic" {
        out.verdict(
            12,
            best > 1e-3,
            format!(
                "max |periodic integral of v - mean| = {best:.4e} over {} orbits",
                orbits.len()
            ),
        );
    }
    Ok(())
}
