use crate::error::{Error, Result};
use crate::flow::{FlowParams, State3};
use crate::section::{orbit_integral, PeriodicOrbit};

/// Largest shooting residual accepted for an orbit integral.
pub const MAX_ORBIT_RESIDUAL: f64 = 1e-8;

/// `∫_0^T v(Z_t q) dt` over one period. A nonzero value for mean-zero `v`
/// rules out `σ² = 0`.
pub fn periodic_obstruction<V>(p: &FlowParams, orbit: &PeriodicOrbit, v: V) -> Result<f64>
where
    V: Fn(&State3) -> f64,
{
    if !(orbit.residual < MAX_ORBIT_RESIDUAL) {
        return Err(Error::InvalidParameter("periodic orbit residual too large"));
    }
    orbit_integral(p, orbit.seed, orbit.period, v)
}
