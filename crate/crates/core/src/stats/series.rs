use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::flow::{self, Dopri5, FlowParams, State3, BURN_IN};
use crate::geometric::{GeoModel, SectionPoint, SuspensionPoint};

/// Integrator tolerance for sampled ODE orbits.
pub const SAMPLE_TOL: f64 = 1e-9;

/// Where samples come from. Observables see a state `[f64; 3]`: `(x, y, z)`
/// for the ODE, `(x, y, u)` on the suspension of the geometric model, and
/// three independent standard normals for the synthetic backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Ode(FlowParams),
    Geometric(GeoModel),
    IidGaussian,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Ode(_) => "ode",
            Backend::Geometric(_) => "geometric",
            Backend::IidGaussian => "iid-gaussian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub backend: &'static str,
    pub observable: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter("sampling step must be positive"));
        }
        if values.len() < 2 {
            return Err(Error::InsufficientSample(
                "a time series needs at least two values",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("time series values must be finite"));
        }
        Ok(TimeSeries {
            dt,
            values,
            provenance,
        })
    }

    /// Wraps raw values from an external source.
    pub fn from_values(dt: f64, values: Vec<f64>) -> Result<Self> {
        let provenance = Provenance {
            backend: "external",
            observable: String::new(),
            seed: 0,
        };
        TimeSeries::new(dt, values, provenance)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        variance(&self.values)
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// A point near the attractor, deterministic per seed.
pub fn initial_state(backend: &Backend, seed: u64) -> Result<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match backend {
        Backend::Ode(p) => {
            let s = State3::new(
                1.0 + rng.random::<f64>() - 0.5,
                1.0 + rng.random::<f64>() - 0.5,
                p.rho - 8.0 + rng.random::<f64>() - 0.5,
            );
            Ok(flow::burn_in(p, s)?.to_array())
        }
        Backend::Geometric(m) => {
            let mut x = 2.0 * rng.random::<f64>() - 1.0;
            if x == 0.0 {
                x = 0.5;
            }
            let y = 2.0 * rng.random::<f64>() - 1.0;
            let p = SuspensionPoint::new(m, SectionPoint::new(x, y)?, 0.0)?;
            let (p, _) = m.suspension_step(&p, BURN_IN)?;
            Ok([p.base.x, p.base.y, p.u])
        }
        Backend::IidGaussian => Ok([0.0; 3]),
    }
}

/// Samples `v` along one orbit of `backend` at step `dt`, after burn-in.
///
/// The orbit starts from [`initial_state`]; each sample consumes three
/// normals on the synthetic backend.
pub fn sample_states<F>(
    backend: &Backend,
    dt: f64,
    n: usize,
    seed: u64,
    mut visit: F,
) -> Result<[f64; 3]>
where
    F: FnMut(usize, &[f64; 3]),
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter("sampling step must be positive"));
    }
    let start = initial_state(backend, seed)?;
    match backend {
        Backend::Ode(p) => {
            let centre = [0.0, 0.0, p.rho + p.sigma];
            let limit = 4.0 * p.absorbing_radius_sq();
            let mut stepper = Dopri5::new(p, 0.0, start, SAMPLE_TOL, 1.0);
            let mut k = 0usize;
            if n > 0 {
                visit(0, &start);
                k = 1;
            }
            let mut failure = None;
            while k < n {
                let step = stepper.step(p, (n - 1) as f64 * dt)?;
                let r2: f64 = step
                    .y1
                    .iter()
                    .zip(&centre)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                if !(r2 <= limit) {
                    failure = Some(Error::Escape { t: step.t1 });
                    break;
                }
                while k < n && k as f64 * dt <= step.t1 {
                    visit(k, &step.eval(k as f64 * dt));
                    k += 1;
                }
            }
            match failure {
                Some(e) => Err(e),
                None => Ok(*stepper.state()),
            }
        }
        Backend::Geometric(m) => {
            let mut p = SuspensionPoint {
                base: SectionPoint {
                    x: start[0],
                    y: start[1],
                },
                u: start[2],
            };
            for k in 0..n {
                if k > 0 {
                    p = m.suspension_step(&p, dt)?.0;
                }
                visit(k, &[p.base.x, p.base.y, p.u]);
            }
            Ok([p.base.x, p.base.y, p.u])
        }
        Backend::IidGaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = [0.0; 3];
            for k in 0..n {
                for c in s.iter_mut() {
                    *c = rng.sample(StandardNormal);
                }
                visit(k, &s);
            }
            Ok(s)
        }
    }
}

pub fn sample_observable<V>(
    backend: &Backend,
    v: V,
    observable: &str,
    dt: f64,
    n: usize,
    seed: u64,
) -> Result<TimeSeries>
where
    V: Fn(&[f64; 3]) -> f64,
{
    let mut values = Vec::with_capacity(n);
    sample_states(backend, dt, n, seed, |_, s| values.push(v(s)))?;
    TimeSeries::new(
        dt,
        values,
        Provenance {
            backend: backend.name(),
            observable: observable.into(),
            seed,
        },
    )
}
