use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// First index at which `ln ln n` exceeds 1.
const LIL_START: usize = 16;
const POINTS_PER_DECADE: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LilCurve {
    /// `(n, |S_n| / √(2σ² n ln ln n))` at log-spaced checkpoints.
    pub points: Vec<(usize, f64)>,
    /// Supremum over every `n ∈ [N/100, N]`.
    pub sup_last_two_decades: f64,
}

/// Running `|S_n − n·mean| / √(2σ² n ln ln n)`.
pub fn lil_diagnostic(values: &[f64], mean: f64, sigma2: f64) -> Result<LilCurve> {
    if !(sigma2 > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let n_total = values.len();
    if n_total < 100 * LIL_START {
        return Err(Error::InsufficientSample(
            "series too short for a law of the iterated logarithm",
        ));
    }
    let mut points = Vec::new();
    let mut next_mark = LIL_START as f64;
    let tail_start = (n_total / 100).max(LIL_START);
    let mut sup: f64 = 0.0;
    let mut s = 0.0;
    for (i, v) in values.iter().enumerate() {
        s += v - mean;
        let n = i + 1;
        if n < LIL_START {
            continue;
        }
        let nf = n as f64;
        let scaled = s.abs() / (2.0 * sigma2 * nf * nf.ln().ln()).sqrt();
        if n >= tail_start {
            sup = sup.max(scaled);
        }
        if nf >= next_mark || n == n_total {
            points.push((n, scaled));
            while next_mark <= nf {
                next_mark *= 10f64.powf(1.0 / POINTS_PER_DECADE);
            }
        }
    }
    Ok(LilCurve {
        points,
        sup_last_two_decades: sup,
    })
}
