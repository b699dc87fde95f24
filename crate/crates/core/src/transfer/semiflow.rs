use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{acim, for_each_transition, ulam, AcimDensity, BranchSystem, UlamOperator};
use crate::error::{Error, Result};

/// Quadrature points per piece when averaging the roof over a bin.
const ROOF_SAMPLES: usize = 8;

/// Discretized suspension `{(y, u) : 0 ≤ u < R(y)}` over an Ulam chain:
/// bin `i` carries `levels[i]` cells of height `du`, where `levels[i] · du`
/// is the bin average of the roof rounded to the level grid.
#[derive(Debug, Clone)]
pub struct SuspensionGrid {
    pub ulam: UlamOperator,
    pub acim: AcimDensity,
    pub du: f64,
    pub levels: Vec<usize>,
    offsets: Vec<usize>,
    /// Invariant mass of each cell.
    pub weights: Vec<f64>,
}

impl SuspensionGrid {
    pub fn new<S: BranchSystem + ?Sized>(sys: &S, n_bins: usize, du: f64) -> Result<Self> {
        if !(du > 0.0 && du.is_finite()) {
            return Err(Error::InvalidParameter("du must be positive"));
        }
        let u = ulam(sys, n_bins)?;
        let h = acim(&u)?;
        let mut roof_int = vec![0.0; n_bins];
        let mut row_mass = vec![0.0; n_bins];
        let mut failure = None;
        for_each_transition(sys, &u.edges, |k, i, _, a, b| {
            let len = b - a;
            for s in 0..ROOF_SAMPLES {
                match sys.roof(k, a + len * (s as f64 + 0.5) / ROOF_SAMPLES as f64) {
                    Ok(r) => roof_int[i] += r * len / ROOF_SAMPLES as f64,
                    Err(e) => failure = Some(e),
                }
            }
            row_mass[i] += len;
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        let levels: Vec<usize> = (0..n_bins)
            .map(|i| ((roof_int[i] / row_mass[i] / du).round() as usize).max(1))
            .collect();
        let mut offsets = Vec::with_capacity(n_bins + 1);
        offsets.push(0);
        for &l in &levels {
            offsets.push(offsets.last().copied().unwrap_or(0) + l);
        }
        let z: f64 = (0..n_bins).map(|i| h.mass[i] * levels[i] as f64).sum();
        let mut weights = Vec::with_capacity(offsets[n_bins]);
        for i in 0..n_bins {
            for _ in 0..levels[i] {
                weights.push(h.mass[i] / z);
            }
        }
        Ok(SuspensionGrid {
            ulam: u,
            acim: h,
            du,
            levels,
            offsets,
            weights,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.levels.len()
    }

    pub fn cell_count(&self) -> usize {
        self.weights.len()
    }

    pub fn cell(&self, i: usize, k: usize) -> usize {
        self.offsets[i] + k
    }

    /// Smallest quantized roof.
    pub fn min_roof(&self) -> f64 {
        self.levels.iter().copied().min().unwrap_or(1) as f64 * self.du
    }

    /// Centre `(y, u)` of every cell, in cell order.
    pub fn centers(&self) -> Vec<(f64, f64)> {
        let yc = self.ulam.centers();
        let mut out = Vec::with_capacity(self.cell_count());
        for (i, &l) in self.levels.iter().enumerate() {
            for k in 0..l {
                out.push((yc[i], (k as f64 + 0.5) * self.du));
            }
        }
        out
    }

    /// Samples `f(y, u)` at cell centres.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.centers().into_iter().map(|(y, u)| f(y, u)).collect()
    }

    pub fn integrate(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    pub fn inner(&self, v: &[f64], w: &[f64]) -> f64 {
        v.iter()
            .zip(w)
            .zip(&self.weights)
            .map(|((a, b), c)| a * b * c)
            .sum()
    }

    pub fn lp_norm(&self, v: &[f64], p: f64) -> f64 {
        v.iter()
            .zip(&self.weights)
            .map(|(a, w)| a.abs().powf(p) * w)
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Number of level steps in `t`; `t` must be a multiple of `du`.
    pub fn steps(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) {
            return Err(Error::Domain("t must be nonnegative"));
        }
        let m = (t / self.du).round();
        if (m * self.du - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::InvalidParameter("t must be a multiple of du"));
        }
        Ok(m as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiflowResult {
    /// `L_t v` on the cells.
    pub values: Vec<f64>,
    /// Number of indices `j` whose term in `Σ_j P^j ṽ_{t,u,j}` is supported
    /// somewhere on the grid.
    pub terms: usize,
}

/// `L_t v` for `v` sampled on the cells of `grid`.
///
/// The `j`-th term collects mass that crossed the roof exactly `j` times.
/// Mass leaving bin `i` at elapsed step `s` arrives at level 0 of bin `j'`
/// with probability `U_{ij'}`, which realizes `P^j` on the Ulam basis.
pub fn semiflow_lt(grid: &SuspensionGrid, v: &[f64], t: f64) -> Result<SemiflowResult> {
    if v.len() != grid.cell_count() {
        return Err(Error::InvalidParameter(
            "observable must have one value per cell",
        ));
    }
    let m = grid.steps(t)?;
    let n = grid.n_bins();
    let h = &grid.acim.mass;
    let x: Vec<f64> = (0..n)
        .flat_map(|i| (0..grid.levels[i]).map(move |k| (i, k)))
        .map(|(i, k)| h[i] * v[grid.cell(i, k)])
        .collect();
    let mut y = vec![0.0; grid.cell_count()];
    let mut terms = 0;
    // j = 0: no roof crossing
    let mut any = false;
    for i in 0..n {
        for k in m..grid.levels[i] {
            y[grid.cell(i, k)] += x[grid.cell(i, k - m)];
            any = true;
        }
    }
    if any {
        terms += 1;
    }
    // arrivals[j * (m + 1) + s]: mass reaching level 0 of bin j at step s
    let width = m + 1;
    let mut arrivals = vec![0.0; n * width];
    let mut support = vec![false; n * width];
    for i in 0..n {
        let l = grid.levels[i];
        for s in 1..=m.min(l) {
            let src = x[grid.cell(i, l - s)];
            for (jj, &u) in grid.ulam.row(i).iter().enumerate() {
                if u > 0.0 {
                    arrivals[jj * width + s] += src * u;
                    support[jj * width + s] = true;
                }
            }
        }
    }
    while support.iter().any(|&b| b) {
        let mut used = false;
        for jj in 0..n {
            for s in 1..=m {
                if support[jj * width + s] && m - s < grid.levels[jj] {
                    y[grid.cell(jj, m - s)] += arrivals[jj * width + s];
                    used = true;
                }
            }
        }
        if used {
            terms += 1;
        }
        let mut next = vec![0.0; n * width];
        let mut next_support = vec![false; n * width];
        for i in 0..n {
            let l = grid.levels[i];
            for s in 1..=m {
                if !support[i * width + s] || s + l > m {
                    continue;
                }
                let a = arrivals[i * width + s];
                let s2 = s + l;
                for (jj, &u) in grid.ulam.row(i).iter().enumerate() {
                    if u > 0.0 {
                        next[jj * width + s2] += a * u;
                        next_support[jj * width + s2] = true;
                    }
                }
            }
        }
        arrivals = next;
        support = next_support;
    }
    for i in 0..n {
        for k in 0..grid.levels[i] {
            let c = grid.cell(i, k);
            y[c] = if h[i] > 0.0 { y[c] / h[i] } else { 0.0 };
        }
    }
    Ok(SemiflowResult { values: y, terms })
}

/// `v − ∫v dμ̄` on the grid.
pub fn mean_zero(grid: &SuspensionGrid, v: &[f64]) -> Vec<f64> {
    let mean = grid.integrate(v);
    v.iter().map(|x| x - mean).collect()
}

/// `(|L_n v|₁, |L_n v|₂, |L_n v|₄)` for `n = 1..=n_max`, with `v` made mean
/// zero first. Uses `L_n = L_1^n`, which holds exactly on the grid.
pub fn decay_norms(grid: &SuspensionGrid, v: &[f64], n_max: usize) -> Result<Vec<[f64; 3]>> {
    let mut cur = mean_zero(grid, v);
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        cur = semiflow_lt(grid, &cur, 1.0)?.values;
        out.push([
            grid.lp_norm(&cur, 1.0),
            grid.lp_norm(&cur, 2.0),
            grid.lp_norm(&cur, 4.0),
        ]);
    }
    Ok(out)
}
