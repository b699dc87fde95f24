use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::correlation::{correlation_curve_with, DirectSums, LagSums};
use super::series::TimeSeries;
use crate::error::{Error, Result};

/// Smallest truncation lag; the first crossing of the noise band can come
/// early for oscillating correlations.
pub const GK_MIN_LAG: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Bartlett,
    Rectangular,
}

impl Window {
    pub fn weight(self, k: usize, truncation: usize) -> f64 {
        match self {
            Window::Bartlett => 1.0 - k as f64 / (truncation as f64 + 1.0),
            Window::Rectangular => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimate {
    pub sigma2: f64,
    pub truncation: usize,
    pub window: Window,
    pub stderr: f64,
    /// The windowed sum was not positive and has been clipped to 0.
    pub degenerate: bool,
}

/// `σ² = Σ_{|k| ≤ L} w_k C(k)`, with `L` the first lag whose autocovariance
/// lies within two standard errors of 0 (at least [`GK_MIN_LAG`], at most
/// `max_lag`).
pub fn green_kubo_sigma2_with(
    sums: &dyn LagSums,
    s: &TimeSeries,
    window: Window,
    max_lag: usize,
) -> Result<VarianceEstimate> {
    let curve = correlation_curve_with(sums, s, s, max_lag)?;
    let crossing = (1..=max_lag)
        .find(|&k| curve.values[k].abs() < 2.0 * curve.stderr[k])
        .unwrap_or(max_lag);
    let truncation = crossing.max(GK_MIN_LAG).min(max_lag);
    let raw = curve.values[0]
        + 2.0
            * (1..=truncation)
                .map(|k| window.weight(k, truncation) * curve.values[k])
                .sum::<f64>();
    let sigma2 = raw.max(0.0);
    let n = s.len() as f64;
    let l = truncation as f64;
    let factor = match window {
        Window::Bartlett => 4.0 * l / (3.0 * n),
        Window::Rectangular => 2.0 * (2.0 * l + 1.0) / n,
    };
    Ok(VarianceEstimate {
        sigma2,
        truncation,
        window,
        stderr: sigma2 * factor.sqrt(),
        degenerate: raw <= 0.0,
    })
}

pub fn green_kubo_sigma2(
    s: &TimeSeries,
    window: Window,
    max_lag: usize,
) -> Result<VarianceEstimate> {
    green_kubo_sigma2_with(&DirectSums, s, window, max_lag)
}

/// Sums over consecutive non-overlapping blocks of length `n`.
pub fn block_sums(values: &[f64], n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    values.chunks_exact(n).map(|c| c.iter().sum()).collect()
}

/// `(1/n) Var(block sums)` over non-overlapping blocks of length `n`.
pub fn block_variance(values: &[f64], n: usize) -> Result<f64> {
    let sums = block_sums(values, n);
    if sums.len() < 10 {
        return Err(Error::InsufficientSample("fewer than ten blocks"));
    }
    Ok(sample_variance(&sums) / n as f64)
}

/// Unbiased sample variance.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}
