//! Partial sums of the three summability series that feed the almost sure
//! invariance principle for the time-one map:
//!
//! 1. `Σ (log n)³ n^{5/2} |L_n v|₄⁴`
//! 2. `Σ (log n)³ n |L_n v|₂²`
//! 3. `Σ (log n)³ n^{−2} S_n²` with `S_n = Σ_{i=1}^n Σ_{j=0}^{n−i} T(i, j)` and
//!    `T(i, j) = |L_i(v L_j v) − ∫ v L_j v|₂`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// A series counts as stabilized when its last decade adds at most this
/// fraction of its total.
pub const CM_STABLE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCurve {
    /// `(n, partial sum up to n)` at roughly ten points per decade and at `n_max`.
    pub checkpoints: Vec<(usize, f64)>,
    pub total: f64,
    /// Sum of the terms with `n_max/10 < n ≤ n_max`.
    pub last_decade: f64,
    pub stabilized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmReport {
    pub n_max: usize,
    pub series: [SeriesCurve; 3],
}

impl CmReport {
    pub fn all_stabilized(&self) -> bool {
        self.series.iter().all(|s| s.stabilized)
    }
}

/// `(|L_n v|₁, |L_n v|₂, |L_n v|₄) = (n^{−β}, n^{−β/2}, n^{−β/4})` for
/// `n = 1..=n_max`.
pub fn synthetic_norms(beta: f64, n_max: usize) -> [Vec<f64>; 3] {
    let f = |p: f64| {
        (1..=n_max)
            .map(|n| (n as f64).powf(-beta / p))
            .collect::<Vec<_>>()
    };
    [f(1.0), f(2.0), f(4.0)]
}

fn checkpoint_indices(n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let n = 10f64.powf(k as f64 / 10.0).round() as usize;
        if n >= n_max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        k += 1;
    }
    out.push(n_max);
    out
}

fn curve(terms: &[f64]) -> SeriesCurve {
    let n_max = terms.len();
    let marks = checkpoint_indices(n_max);
    let mut checkpoints = Vec::with_capacity(marks.len());
    let mut acc = 0.0;
    let mut mi = 0;
    let mut at_decade = 0.0;
    for (idx, t) in terms.iter().enumerate() {
        acc += t;
        let n = idx + 1;
        if n == n_max / 10 {
            at_decade = acc;
        }
        while mi < marks.len() && marks[mi] == n {
            checkpoints.push((n, acc));
            mi += 1;
        }
    }
    let last_decade = acc - at_decade;
    SeriesCurve {
        checkpoints,
        total: acc,
        last_decade,
        stabilized: last_decade <= CM_STABLE_FRACTION * acc,
    }
}

/// Nonincreasing envelope `a_i = max_{k ≥ i} x_k`.
fn envelope(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].max(out[i + 1]);
    }
    out
}

/// Anti-diagonal sums `D_n = Σ_{i=1}^{n} T(i, n − i)` of the table
/// `T(i, j) = min(a_i (j + 1), b_j)`, where `a_i` is the envelope of
/// `|L_i v|₂` and `b_j` the envelope of `|L_{max(j,1)} v|₂`. These are the two
/// bounds `|L_i(vL_jv) − ∫vL_jv|₂ ≲ i^{−β/2}(j+1)` and `≲ |L_j v|₂` that
/// control the double sum.
fn bound_diagonals(n2: &[f64]) -> Vec<f64> {
    let n_max = n2.len();
    let env = envelope(n2);
    // a[i] for i in 1..=n_max, b[j] for j in 0..n_max
    let a = |i: usize| env[i - 1];
    let b: Vec<f64> = (0..n_max).map(|j| env[j.max(1) - 1]).collect();
    // J_i = first j with a_i (j+1) > b_j (b nonincreasing, ramp increasing)
    let first_cross = |i: usize| -> usize {
        let (mut lo, mut hi) = (0usize, n_max);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if a(i) * (mid as f64 + 1.0) > b[mid] {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    };
    let cross: Vec<usize> = (1..=n_max).map(first_cross).collect();
    // ramps a_i (p − i + 1) on p ∈ [i, i + J_i)
    let mut slope = vec![0.0; n_max + 2];
    let mut constant = vec![0.0; n_max + 2];
    for i in 1..=n_max {
        let end = (i + cross[i - 1]).min(n_max + 1);
        if end <= i {
            continue;
        }
        let ai = a(i);
        slope[i] += ai;
        slope[end] -= ai;
        constant[i] -= ai * (i as f64 - 1.0);
        constant[end] += ai * (i as f64 - 1.0);
    }
    let mut prefix_b = vec![0.0; n_max + 1];
    for j in 0..n_max {
        prefix_b[j + 1] = prefix_b[j] + b[j];
    }
    let mut d = vec![0.0; n_max];
    let (mut s, mut c) = (0.0, 0.0);
    for n in 1..=n_max {
        s += slope[n];
        c += constant[n];
        let ramp = s * n as f64 + c;
        // j ranges over [0, n−1]; J_{n−j} ≤ j holds from some j0 on
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if cross[n - mid - 1] <= mid {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        d[n - 1] = ramp + prefix_b[n] - prefix_b[lo];
    }
    d
}

/// Evaluates the three series up to `n_max = n2.len()`.
///
/// `table`, when given, supplies `T(i, j)` directly and is evaluated on the
/// whole triangle `i + j ≤ n_max`; otherwise the double sum is bounded from
/// `|L_n v|₂` alone.
pub fn cm_conditions(
    n2: &[f64],
    n4: &[f64],
    table: Option<&dyn Fn(usize, usize) -> f64>,
) -> Result<CmReport> {
    let n_max = n2.len();
    if n_max < 10 || n4.len() != n_max {
        return Err(Error::InvalidParameter(
            "need matching norm sequences of length at least 10",
        ));
    }
    let diag = match table {
        Some(t) => (1..=n_max)
            .map(|n| (1..=n).map(|i| t(i, n - i)).sum())
            .collect(),
        None => bound_diagonals(n2),
    };
    let mut t1 = Vec::with_capacity(n_max);
    let mut t2 = Vec::with_capacity(n_max);
    let mut t3 = Vec::with_capacity(n_max);
    let mut s = 0.0;
    for n in 1..=n_max {
        let nf = n as f64;
        let l3 = nf.ln().powi(3);
        s += diag[n - 1];
        t1.push(l3 * nf.powf(2.5) * n4[n - 1].powi(4));
        t2.push(l3 * nf * n2[n - 1].powi(2));
        t3.push(l3 * s * s / (nf * nf));
    }
    Ok(CmReport {
        n_max,
        series: [curve(&t1), curve(&t2), curve(&t3)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_diagonals_match_direct_sum() {
        let [_, n2, _] = synthetic_norms(3.0, 200);
        let d = bound_diagonals(&n2);
        let env = envelope(&n2);
        for n in [1usize, 2, 7, 50, 200] {
            let direct: f64 = (1..=n)
                .map(|i| {
                    let j = n - i;
                    (env[i - 1] * (j as f64 + 1.0)).min(env[j.max(1) - 1])
                })
                .sum();
            assert!(
                (d[n - 1] - direct).abs() <= 1e-12 * direct.max(1.0),
                "n={n}"
            );
        }
    }

    #[test]
    fn zero_norms_give_zero_sums() {
        let z = vec![0.0; 100];
        let r = cm_conditions(&z, &z, None).unwrap();
        assert!(r.series.iter().all(|s| s.total == 0.0 && s.stabilized));
    }
}
