use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{acim, for_each_transition, uniform_edges, AcimDensity, BranchSystem, UlamOperator};
use crate::error::{Error, Result};

pub const DEFAULT_BETA_SCAN: f64 = 2.0;

/// 40 log-spaced frequencies in `[10, 10³]`.
pub fn default_b_grid() -> Vec<f64> {
    (0..40)
        .map(|k| 10f64.powf(1.0 + 2.0 * k as f64 / 39.0))
        .collect()
}

#[derive(Debug, Clone)]
struct Piece {
    i: usize,
    j: usize,
    /// Quadrature weight of each sample, already divided by the row mass.
    weight: f64,
    roof: Vec<f64>,
}

/// Ulam discretization of `P_b v = P(e^{ibR} v)`, normalized by the
/// invariant density so that `P_0` fixes constants.
///
/// The phase is integrated over each piece `bin_i ∩ h_k(bin_j)` by a midpoint
/// rule fine enough to resolve `e^{ibR}` up to the largest frequency.
#[derive(Debug, Clone)]
pub struct TwistedOperator {
    pub ulam: UlamOperator,
    pub acim: AcimDensity,
    pieces: Vec<Piece>,
    b_max: f64,
}

/// Phase change allowed per quadrature cell at the largest frequency.
const PHASE_STEP: f64 = 0.25;
const MAX_SAMPLES: usize = 1024;

impl TwistedOperator {
    pub fn new<S: BranchSystem + ?Sized>(sys: &S, n_bins: usize, b_max: f64) -> Result<Self> {
        let ulam = super::ulam(sys, n_bins)?;
        let acim = acim(&ulam)?;
        let edges = uniform_edges(sys.domain(), n_bins);
        let mut raw = Vec::new();
        for_each_transition(sys, &edges, |k, i, j, a, b| raw.push((k, i, j, a, b)))?;
        let mut row_mass = vec![0.0; n_bins];
        for &(_, i, _, a, b) in &raw {
            row_mass[i] += b - a;
        }
        let mut pieces = Vec::with_capacity(raw.len());
        for (k, i, j, a, b) in raw {
            let len = b - a;
            let r0 = sys.roof(k, a + len / 16.0)?;
            let r1 = sys.roof(k, b - len / 16.0)?;
            let q = ((b_max * (r1 - r0).abs() * 8.0 / 7.0 / PHASE_STEP).ceil() as usize)
                .clamp(1, MAX_SAMPLES);
            let mut roof = Vec::with_capacity(q);
            for s in 0..q {
                roof.push(sys.roof(k, a + len * (s as f64 + 0.5) / q as f64)?);
            }
            pieces.push(Piece {
                i,
                j,
                weight: len / q as f64 / row_mass[i],
                roof,
            });
        }
        Ok(TwistedOperator {
            ulam,
            acim,
            pieces,
            b_max,
        })
    }

    /// Dense matrix of `P_b` before density normalization (row-major).
    pub fn matrix(&self, b: f64) -> Result<Vec<Complex64>> {
        if b.abs() > self.b_max * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(
                "frequency above the resolved range",
            ));
        }
        let n = self.ulam.n_bins;
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for p in &self.pieces {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in &p.roof {
                acc += Complex64::from_polar(1.0, b * r);
            }
            m[p.i * n + p.j] += acc * p.weight;
        }
        Ok(m)
    }

    /// `P̂_b^n v` for `v` sampled on bins.
    pub fn iterate(&self, b: f64, v: &[f64], n: usize) -> Result<Vec<Complex64>> {
        let m = self.matrix(b)?;
        let size = self.ulam.n_bins;
        let h = &self.acim.mass;
        let mut cur: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for _ in 0..n {
            let mut next = vec![Complex64::new(0.0, 0.0); size];
            for i in 0..size {
                let wi = cur[i] * h[i];
                if wi == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, e) in next.iter_mut().zip(&m[i * size..(i + 1) * size]) {
                    *o += wi * e;
                }
            }
            for (o, hj) in next.iter_mut().zip(h) {
                *o = if *hj > 0.0 {
                    *o / hj
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            cur = next;
        }
        Ok(cur)
    }

    /// `‖P̂_b^n 1‖_∞`.
    pub fn contraction(&self, b: f64, n: usize) -> Result<f64> {
        let ones = vec![1.0; self.ulam.n_bins];
        Ok(self
            .iterate(b, &ones, n)?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }
}

/// Steps used at frequency `b`: `⌈β ln|b|⌉`, at least 1.
pub fn twist_steps(b: f64, beta_scan: f64) -> usize {
    let n = (beta_scan * b.abs().ln()).ceil();
    if n >= 1.0 {
        n as usize
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistDiagnostics {
    pub b_values: Vec<f64>,
    pub steps: Vec<usize>,
    /// `‖P̂_b^{n(b)} 1‖_∞` for each `b`.
    pub factors: Vec<f64>,
}

impl TwistDiagnostics {
    pub fn max_factor(&self) -> f64 {
        self.factors.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn twisted_decay<S: BranchSystem + ?Sized>(
    sys: &S,
    n_bins: usize,
    b_grid: &[f64],
    beta_scan: f64,
) -> Result<TwistDiagnostics> {
    if b_grid.is_empty() || b_grid.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(Error::InvalidParameter(
            "b_grid must hold nonnegative frequencies",
        ));
    }
    if !(beta_scan > 0.0) {
        return Err(Error::InvalidParameter("beta_scan must be positive"));
    }
    let b_max = b_grid.iter().cloned().fold(0.0, f64::max);
    let op = TwistedOperator::new(sys, n_bins, b_max)?;
    let mut steps = Vec::with_capacity(b_grid.len());
    let mut factors = Vec::with_capacity(b_grid.len());
    for &b in b_grid {
        let n = twist_steps(b, beta_scan);
        steps.push(n);
        factors.push(op.contraction(b, n)?);
    }
    Ok(TwistDiagnostics {
        b_values: b_grid.to_vec(),
        steps,
        factors,
    })
}
