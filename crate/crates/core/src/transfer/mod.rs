//! Ulam discretizations of transfer operators, invariant densities, twisted
//! operators, the semiflow operator `L_t` and summability diagnostics.

mod semiflow;
mod summability;
mod twisted;

pub use semiflow::{decay_norms, mean_zero, semiflow_lt, SemiflowResult, SuspensionGrid};
pub use summability::{cm_conditions, synthetic_norms, CmReport, SeriesCurve, CM_STABLE_FRACTION};
pub use twisted::{
    default_b_grid, twisted_decay, TwistDiagnostics, TwistedOperator, DEFAULT_BETA_SCAN,
};

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometric::{GeoModel, Side};
use crate::inducing::InducedScheme;

/// A piecewise monotone map given through its inverse branches.
pub trait BranchSystem {
    /// Domain interval; Ulam bins partition it uniformly.
    fn domain(&self) -> (f64, f64);
    fn branch_count(&self) -> usize;
    /// Image of branch `k`, contained in the domain.
    fn image(&self, k: usize) -> (f64, f64);
    /// Preimage of `v` under branch `k`; `v` lies in the closed image.
    fn inverse(&self, k: usize, v: f64) -> Result<f64>;
    /// Roof accumulated along one application of the map, started at `x`.
    fn roof(&self, _k: usize, _x: f64) -> Result<f64> {
        Ok(1.0)
    }
}

/// The quotient map `f̄` on `(−1, 1)` with roof `r`.
#[derive(Debug, Clone, Copy)]
pub struct BaseMap<'a>(pub &'a GeoModel);

impl BranchSystem for BaseMap<'_> {
    fn domain(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    fn branch_count(&self) -> usize {
        2
    }

    fn image(&self, k: usize) -> (f64, f64) {
        let (lo, hi) = self.0.branch_image(side(k));
        (lo.max(-1.0), hi.min(1.0))
    }

    fn inverse(&self, k: usize, v: f64) -> Result<f64> {
        self.0.inverse_branch(side(k), v)
    }

    fn roof(&self, _k: usize, x: f64) -> Result<f64> {
        self.0.roof(x)
    }
}

fn side(k: usize) -> Side {
    if k == 0 {
        Side::L
    } else {
        Side::R
    }
}

/// The induced map `F̄` on `Ȳ` with induced roof `R`.
#[derive(Debug, Clone, Copy)]
pub struct SchemeMap<'a> {
    pub model: &'a GeoModel,
    pub scheme: &'a InducedScheme,
}

impl BranchSystem for SchemeMap<'_> {
    fn domain(&self) -> (f64, f64) {
        self.scheme.y_bar
    }

    fn branch_count(&self) -> usize {
        self.scheme.cylinders.len()
    }

    fn image(&self, _k: usize) -> (f64, f64) {
        self.scheme.y_bar
    }

    fn inverse(&self, k: usize, v: f64) -> Result<f64> {
        self.scheme.cylinders[k].pullback(self.model, v)
    }

    fn roof(&self, k: usize, x: f64) -> Result<f64> {
        let mut s = 0.0;
        let mut y = x;
        for _ in 0..self.scheme.cylinders[k].tau {
            s += self.model.roof(y)?;
            y = self.model.quotient_map(y)?;
        }
        Ok(s)
    }
}

/// Test fixture: the doubling map `x ↦ 2x mod 1` on `(0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoublingMap;

impl BranchSystem for DoublingMap {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn branch_count(&self) -> usize {
        2
    }

    fn image(&self, _k: usize) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn inverse(&self, k: usize, v: f64) -> Result<f64> {
        Ok(0.5 * (v + k as f64))
    }
}

/// Uniform bin edges over `domain`.
pub fn uniform_edges(domain: (f64, f64), n_bins: usize) -> Vec<f64> {
    (0..=n_bins)
        .map(|i| {
            if i == n_bins {
                domain.1
            } else {
                domain.0 + (domain.1 - domain.0) * i as f64 / n_bins as f64
            }
        })
        .collect()
}

fn bin_of(edges: &[f64], x: f64) -> usize {
    let n = edges.len() - 1;
    edges
        .partition_point(|&e| e <= x)
        .saturating_sub(1)
        .min(n - 1)
}

/// Calls `visit(k, i, j, x0, x1)` for every nonempty piece
/// `(x0, x1) = bin_i ∩ h_k(bin_j)`.
pub fn for_each_transition<S, F>(sys: &S, edges: &[f64], mut visit: F) -> Result<()>
where
    S: BranchSystem + ?Sized,
    F: FnMut(usize, usize, usize, f64, f64),
{
    let n = edges.len() - 1;
    for k in 0..sys.branch_count() {
        let (lo, hi) = sys.image(k);
        let j0 = bin_of(edges, lo);
        let mut prev: Option<(f64, f64)> = None;
        for j in j0..n {
            let va = edges[j].max(lo);
            let vb = edges[j + 1].min(hi);
            if !(va < vb) {
                if edges[j] >= hi {
                    break;
                }
                continue;
            }
            let xa = match prev {
                Some((v, x)) if v == va => x,
                _ => sys.inverse(k, va)?,
            };
            let xb = sys.inverse(k, vb)?;
            prev = Some((vb, xb));
            let (x0, x1) = if xa <= xb { (xa, xb) } else { (xb, xa) };
            if !(x0 < x1) {
                continue;
            }
            let i0 = bin_of(edges, x0);
            for i in i0..n {
                if edges[i] >= x1 {
                    break;
                }
                let a = x0.max(edges[i]);
                let b = x1.min(edges[i + 1]);
                if a < b {
                    visit(k, i, j, a, b);
                }
            }
        }
    }
    Ok(())
}

/// Row-stochastic Ulam matrix: entry `(i, j)` is the fraction of bin `i`
/// mapped into bin `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamOperator {
    pub n_bins: usize,
    pub edges: Vec<f64>,
    /// Row-major `n_bins × n_bins`.
    pub matrix: Vec<f64>,
    /// Fraction of each bin on which the map is defined, before rows are
    /// renormalized. Below 1 only for pruned inducing schemes.
    pub row_coverage: Vec<f64>,
}

impl UlamOperator {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n_bins + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.n_bins..(i + 1) * self.n_bins]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Push-forward of bin masses: `p ↦ pU`.
    pub fn push(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n_bins;
        let mut out = vec![0.0; n];
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for (o, &u) in out.iter_mut().zip(self.row(i)) {
                *o += pi * u;
            }
        }
        out
    }

    /// Discretized Koopman operator: `w ↦ Uw`.
    pub fn compose(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n_bins)
            .map(|i| self.row(i).iter().zip(w).map(|(u, x)| u * x).sum())
            .collect()
    }

    /// Strong connectivity of the sparsity graph.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n_bins;
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(a) = stack.pop() {
                for b in 0..n {
                    let e = if forward {
                        self.entry(a, b)
                    } else {
                        self.entry(b, a)
                    };
                    if e > 0.0 && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reach(true) && reach(false)
    }

    /// Nonzero entries as `(i, j, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n_bins {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

pub fn ulam<S: BranchSystem + ?Sized>(sys: &S, n_bins: usize) -> Result<UlamOperator> {
    if n_bins < 2 {
        return Err(Error::InvalidParameter("n_bins must be at least 2"));
    }
    let edges = uniform_edges(sys.domain(), n_bins);
    let mut matrix = vec![0.0; n_bins * n_bins];
    for_each_transition(sys, &edges, |_, i, j, a, b| {
        matrix[i * n_bins + j] += b - a;
    })?;
    let mut row_coverage = vec![0.0; n_bins];
    for i in 0..n_bins {
        let width = edges[i + 1] - edges[i];
        let row = &mut matrix[i * n_bins..(i + 1) * n_bins];
        let total: f64 = row.iter().sum();
        row_coverage[i] = total / width;
        if total > 0.0 {
            for x in row.iter_mut() {
                *x /= total;
            }
        }
    }
    Ok(UlamOperator {
        n_bins,
        edges,
        matrix,
        row_coverage,
    })
}

/// Invariant density of an Ulam operator.
#[derive(Debug, Clone, PartialEq)]
pub struct AcimDensity {
    pub edges: Vec<f64>,
    /// Density with respect to Lebesgue, constant on each bin.
    pub density: Vec<f64>,
    /// Mass of each bin; sums to 1.
    pub mass: Vec<f64>,
    /// `‖pU − p‖₁` at the returned vector.
    pub residual: f64,
    pub iterations: usize,
}

impl AcimDensity {
    /// Density at `x`, zero outside the domain.
    pub fn at(&self, x: f64) -> f64 {
        let n = self.density.len();
        if !(x >= self.edges[0] && x <= self.edges[n]) {
            return 0.0;
        }
        self.density[bin_of(&self.edges, x)]
    }

    /// Mass of an interval.
    pub fn measure(&self, a: f64, b: f64) -> f64 {
        let n = self.density.len();
        let mut m = 0.0;
        for i in bin_of(&self.edges, a)..n {
            if self.edges[i] >= b {
                break;
            }
            let lo = a.max(self.edges[i]);
            let hi = b.min(self.edges[i + 1]);
            if hi > lo {
                m += self.density[i] * (hi - lo);
            }
        }
        m
    }

    /// `L¹` distance to another density, integrated over the union of the
    /// two bin partitions.
    pub fn l1_distance(&self, other: &AcimDensity) -> f64 {
        let mut pts: Vec<f64> = self
            .edges
            .iter()
            .chain(other.edges.iter())
            .cloned()
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        pts.dedup();
        pts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (self.at(mid) - other.at(mid)).abs() * (w[1] - w[0])
            })
            .sum()
    }
}

/// Power-iteration tolerance on successive iterates (`L¹`).
pub const ACIM_TOL: f64 = 1e-12;
const ACIM_MAX_ITER: usize = 100_000;

pub fn acim(u: &UlamOperator) -> Result<AcimDensity> {
    if !u.is_irreducible() {
        return Err(Error::NotMixing);
    }
    let n = u.n_bins;
    let widths = u.widths();
    let total: f64 = widths.iter().sum();
    let mut p: Vec<f64> = widths.iter().map(|w| w / total).collect();
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    while iterations < ACIM_MAX_ITER {
        let mut q = u.push(&p);
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= s);
        change = q.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = q;
        iterations += 1;
        if change < ACIM_TOL {
            break;
        }
    }
    if !(change < ACIM_TOL) {
        // periodic chains oscillate; average two consecutive iterates
        let q = u.push(&p);
        let avg: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
        let r = u
            .push(&avg)
            .iter()
            .zip(&avg)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        if !(r < ACIM_TOL) {
            return Err(Error::NoConvergence { residual: change });
        }
        p = avg;
    }
    let residual = u.push(&p).iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
    let density = (0..n).map(|i| p[i] / widths[i]).collect();
    Ok(AcimDensity {
        edges: u.edges.clone(),
        density,
        mass: p,
        residual,
        iterations,
    })
}

/// Transfer operator normalized by the invariant density: for `v` sampled on
/// bins, `(P̂v)_j = Σ_i h_i v_i U_ij / h_j`. It fixes constants and is dual
/// to [`UlamOperator::compose`] under the bin masses `h`.
pub fn transfer(u: &UlamOperator, h: &AcimDensity, v: &[f64]) -> Vec<f64> {
    let weighted: Vec<f64> = v.iter().zip(&h.mass).map(|(a, b)| a * b).collect();
    u.push(&weighted)
        .iter()
        .zip(&h.mass)
        .map(|(a, m)| if *m > 0.0 { a / m } else { 0.0 })
        .collect()
}

/// Acim mass of every cylinder of a scheme.
pub fn cylinder_weights(h: &AcimDensity, scheme: &InducedScheme) -> Vec<f64> {
    scheme
        .cylinders
        .iter()
        .map(|c| h.measure(c.left, c.right))
        .collect()
}
