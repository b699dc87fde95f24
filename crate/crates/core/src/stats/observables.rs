use alloc::boxed::Box;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::series::Backend;
use crate::error::{Error, Result};
use crate::geometric::{GeoModel, SectionPoint, SuspensionPoint};

pub type ObservableFn = Box<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

/// Built-in observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// Coordinate `0`, `1` or `2` of the backend state.
    Coordinate(usize),
    /// `exp(1 − 1/(1 − ρ²))` for `ρ = |s − centre|/radius < 1`, else 0.
    Bump { centre: [f64; 3], radius: f64 },
    /// `χ∘S − χ` for the time-one map `S` of the geometric suspension and
    /// [`coboundary_chi`].
    Coboundary,
    /// A fixed smooth polynomial with no symmetry.
    Generic,
}

impl Observable {
    /// `x`, `y`, `z`/`u`, `bump`, `coboundary`, `generic`.
    pub fn parse(name: &str, backend: &Backend) -> Option<Observable> {
        Some(match name {
            "x" => Observable::Coordinate(0),
            "y" => Observable::Coordinate(1),
            "z" | "u" => Observable::Coordinate(2),
            "bump" => default_bump(backend),
            "coboundary" => Observable::Coboundary,
            "generic" => Observable::Generic,
            _ => return None,
        })
    }

    pub fn evaluator(&self, backend: &Backend) -> Result<ObservableFn> {
        Ok(match *self {
            Observable::Coordinate(i) if i < 3 => Box::new(move |s: &[f64; 3]| s[i]),
            Observable::Coordinate(_) => {
                return Err(Error::InvalidParameter(
                    "coordinate index must be 0, 1 or 2",
                ))
            }
            Observable::Bump { centre, radius } => {
                Box::new(move |s: &[f64; 3]| bump(s, &centre, radius))
            }
            Observable::Coboundary => match backend {
                Backend::Geometric(m) => {
                    let m = *m;
                    Box::new(move |s: &[f64; 3]| coboundary_value(&m, s))
                }
                _ => {
                    return Err(Error::InvalidParameter(
                        "the coboundary observable needs the geometric backend",
                    ))
                }
            },
            Observable::Generic => Box::new(|s: &[f64; 3]| generic(s)),
        })
    }
}

/// Bump on one wing of the attractor (ODE) or on `x ∈ (0.3, 0.9)` (model).
pub fn default_bump(backend: &Backend) -> Observable {
    match backend {
        Backend::Ode(p) => {
            let c = (p.beta * (p.rho - 1.0)).sqrt();
            Observable::Bump {
                centre: [c, c, p.rho - 1.0],
                radius: 6.0,
            }
        }
        _ => Observable::Bump {
            centre: [0.6, 0.0, 0.5],
            radius: 0.3,
        },
    }
}

pub fn bump(s: &[f64; 3], centre: &[f64; 3], radius: f64) -> f64 {
    let r2: f64 = s
        .iter()
        .zip(centre)
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        / (radius * radius);
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

pub fn generic(s: &[f64; 3]) -> f64 {
    0.05 * s[2] + 0.01 * s[0] * s[1] + 0.1 * s[0] + 0.02 * s[1]
}

/// Bounded `χ` used to build the coboundary observable. It decorrelates
/// within one time unit, which keeps the Bartlett bias `≈ Var(χ∘S − χ)/L`
/// small.
pub fn coboundary_chi(s: &[f64; 3]) -> f64 {
    (2.0 * core::f64::consts::PI * s[0]).cos()
}

/// `χ(S p) − χ(p)`; NaN if the orbit hits the singular leaf.
pub fn coboundary_value(m: &GeoModel, s: &[f64; 3]) -> f64 {
    let p = SuspensionPoint {
        base: SectionPoint { x: s[0], y: s[1] },
        u: s[2],
    };
    match m.suspension_step(&p, 1.0) {
        Ok((q, _)) => coboundary_chi(&[q.base.x, q.base.y, q.u]) - coboundary_chi(s),
        Err(_) => f64::NAN,
    }
}
