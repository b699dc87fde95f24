use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::correlation::LagSums;
use super::green_kubo::{green_kubo_sigma2_with, sample_variance, Window};
use super::series::{mean, variance, Backend, Provenance, TimeSeries};
use crate::error::{Error, Result};

/// Time units skipped between consecutive blocks.
pub const CLT_GAP: usize = 50;
/// Fewest blocks for an accepted report.
pub const MIN_BLOCKS: usize = 200;
/// Largest lag examined by the variance estimate inside the harness.
pub const CLT_MAX_LAG: usize = 1000;
/// Variances below this fraction of `Var(v)` count as degenerate.
pub const DEGENERATE_FRACTION: f64 = 0.02;

/// `Φ(x/σ)`.
pub fn normal_cdf(x: f64, sigma: f64) -> f64 {
    0.5 * libm::erfc(-x / (sigma * core::f64::consts::SQRT_2))
}

/// `sup_x |F_n(x) − F(x)|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub n: usize,
    pub m: usize,
    pub ks_stat: f64,
    pub ks_p: f64,
    pub sigma2_gk: f64,
    /// Sample variance of the normalized block sums.
    pub sigma2_blocks: f64,
    pub variance: f64,
    pub normalized_sums: Vec<f64>,
}

impl CltReport {
    pub fn accepted(&self) -> bool {
        self.m >= MIN_BLOCKS
    }
}

/// Normalized block sums of `values` with blocks of length `n` separated by
/// `gap` samples, centred at `centre`.
pub fn gapped_block_sums(values: &[f64], n: usize, gap: usize, m: usize, centre: f64) -> Vec<f64> {
    let sn = (n as f64).sqrt();
    (0..m)
        .map(|b| {
            let start = b * (n + gap) + gap;
            (values[start..start + n].iter().sum::<f64>() - n as f64 * centre) / sn
        })
        .collect()
}

/// KS test of block sums against `N(0, σ̂²)` from a single orbit sampled at
/// `Δ = 1`.
pub fn clt_from_series(
    sums: &dyn LagSums,
    s: &TimeSeries,
    n: usize,
    m: usize,
    gap: usize,
) -> Result<CltReport> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(
            "need block length and block count of at least 2",
        ));
    }
    if s.len() < m * (n + gap) {
        return Err(Error::InsufficientSample(
            "series shorter than the requested blocks",
        ));
    }
    let var = variance(&s.values);
    let centre = mean(&s.values);
    let max_lag = CLT_MAX_LAG.min(s.len() / 10);
    let gk = green_kubo_sigma2_with(sums, s, Window::Bartlett, max_lag)?;
    let normalized = gapped_block_sums(&s.values, n, gap, m, centre);
    let sigma2_blocks = sample_variance(&normalized);
    let floor = DEGENERATE_FRACTION * var;
    if gk.sigma2 <= floor && sigma2_blocks > floor {
        return Err(Error::Inconsistency);
    }
    let (ks_stat, ks_p) = if gk.sigma2 > 0.0 {
        let sigma = gk.sigma2.sqrt();
        let d = ks_statistic(&normalized, |x| normal_cdf(x, sigma));
        (d, ks_p_value(d, m))
    } else {
        (1.0, 0.0)
    };
    Ok(CltReport {
        n,
        m,
        ks_stat,
        ks_p,
        sigma2_gk: gk.sigma2,
        sigma2_blocks,
        variance: var,
        normalized_sums: normalized,
    })
}

pub fn clt_harness<V>(
    sums: &dyn LagSums,
    backend: &Backend,
    v: V,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<CltReport>
where
    V: Fn(&[f64; 3]) -> f64,
{
    let len = m * (n + CLT_GAP);
    let mut values = Vec::with_capacity(len);
    super::series::sample_states(backend, 1.0, len, seed, |_, st| values.push(v(st)))?;
    let s = TimeSeries::new(
        1.0,
        values,
        Provenance {
            backend: backend.name(),
            observable: "clt".into(),
            seed,
        },
    )?;
    clt_from_series(sums, &s, n, m, CLT_GAP)
}
