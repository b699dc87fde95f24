use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::series::{mean, TimeSeries};
use crate::error::{Error, Result};
use crate::inducing::linear_fit;

/// Batches used for the batch-means standard errors.
pub const CORRELATION_BATCHES: usize = 20;

/// Raw lagged products `Σ_i a_i b_{i+k}` for `k = 0..=max_lag`, over every
/// `i < a.len()` with `i + k < b.len()`.
pub trait LagSums {
    fn lag_sums(&self, a: &[f64], b: &[f64], max_lag: usize) -> Vec<f64>;
}

/// Direct `O(N · max_lag)` summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectSums;

impl LagSums for DirectSums {
    fn lag_sums(&self, a: &[f64], b: &[f64], max_lag: usize) -> Vec<f64> {
        (0..=max_lag)
            .map(|k| {
                let n = a.len().min(b.len().saturating_sub(k));
                a[..n].iter().zip(&b[k..k + n]).map(|(x, y)| x * y).sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    /// Lags in time units.
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

fn normalized(sums: Vec<f64>, n: usize) -> Vec<f64> {
    sums.into_iter()
        .enumerate()
        .map(|(k, s)| s / (n - k) as f64)
        .collect()
}

/// `C(k) = (N − k)^{−1} Σ_i (v_i − v̄)(w_{i+k} − w̄)` for `k = 0..=max_lag`
/// with standard errors from batch means of the lagged products
/// `a_i b_{i+k}`, `i < N − max_lag`.
pub fn correlation_curve_with(
    sums: &dyn LagSums,
    v: &TimeSeries,
    w: &TimeSeries,
    max_lag: usize,
) -> Result<CorrelationCurve> {
    let n = v.len();
    if w.len() != n || (w.dt - v.dt).abs() > 1e-12 * v.dt {
        return Err(Error::InvalidParameter(
            "series must share length and sampling step",
        ));
    }
    if max_lag > n / 10 {
        return Err(Error::LagTooLarge { max_lag, len: n });
    }
    let (mv, mw) = (mean(&v.values), mean(&w.values));
    let a: Vec<f64> = v.values.iter().map(|x| x - mv).collect();
    let b: Vec<f64> = w.values.iter().map(|x| x - mw).collect();
    let values = normalized(sums.lag_sums(&a, &b, max_lag), n);

    let len = (n - max_lag) / CORRELATION_BATCHES;
    let mut acc = vec![0.0; max_lag + 1];
    let mut acc2 = vec![0.0; max_lag + 1];
    for bi in 0..CORRELATION_BATCHES {
        let lo = bi * len;
        let c = sums.lag_sums(&a[lo..lo + len], &b[lo..lo + len + max_lag], max_lag);
        for k in 0..=max_lag {
            let m = c[k] / len as f64;
            acc[k] += m;
            acc2[k] += m * m;
        }
    }
    let nb = CORRELATION_BATCHES as f64;
    let stderr = (0..=max_lag)
        .map(|k| {
            let m = acc[k] / nb;
            ((acc2[k] / nb - m * m).max(0.0) * nb / (nb - 1.0) / nb).sqrt()
        })
        .collect();
    Ok(CorrelationCurve {
        lags: (0..=max_lag).map(|k| k as f64 * v.dt).collect(),
        values,
        stderr,
    })
}

pub fn correlation_curve(
    v: &TimeSeries,
    w: &TimeSeries,
    max_lag: usize,
) -> Result<CorrelationCurve> {
    correlation_curve_with(&DirectSums, v, w, max_lag)
}

impl CorrelationCurve {
    /// First lag `T*` after which `|C(t)| < factor · stderr(t)` holds at every
    /// computed lag, if any.
    pub fn decay_time(&self, factor: f64) -> Option<f64> {
        let mut first = None;
        for k in (0..self.values.len()).rev() {
            if self.values[k].abs() < factor * self.stderr[k] {
                first = Some(k);
            } else {
                break;
            }
        }
        first.map(|k| self.lags[k])
    }

    /// Slope of `ln|C|` against `ln t` over `t ∈ [t_lo, t_hi]`, with `R²`.
    pub fn local_exponent(&self, t_lo: f64, t_hi: f64) -> Result<(f64, f64)> {
        let pts: Vec<(f64, f64)> = self
            .lags
            .iter()
            .zip(&self.values)
            .filter(|(t, c)| **t >= t_lo && **t <= t_hi && **t > 0.0 && c.abs() > 0.0)
            .map(|(t, c)| (t.ln(), c.abs().ln()))
            .collect();
        if pts.len() < 3 {
            return Err(Error::InsufficientSample(
                "fewer than three lags in the fit window",
            ));
        }
        let (slope, _, r2) = linear_fit(&pts);
        Ok((slope, r2))
    }
}
