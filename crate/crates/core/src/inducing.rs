//! Full-branch induced maps `F̄ = f̄^τ` of the geometric model.
//!
//! Schemes are built by first exact cover: pieces of `Ȳ` are pushed forward
//! one branch at a time, and the part of a piece whose image covers `Ȳ` is
//! emitted as a cylinder. Cylinder endpoints are always obtained by pulling
//! the endpoints of `Ȳ` back through inverse branches.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometric::{GeoModel, Side};

/// Largest inducing time accepted by [`build_scheme`].
pub const MAX_TAU_LIMIT: usize = 60;
/// Coverage below which a scheme is rejected.
pub const MIN_COVERAGE: f64 = 0.999;
/// Pieces whose cylinder is shorter than this fraction of `|Ȳ|` are dropped;
/// their mass counts as uncovered. The number of live pieces grows
/// exponentially with depth, so without pruning `max_tau = 40` is out of reach.
pub const PRUNE_FRACTION: f64 = 1e-8;

/// A cylinder of the induced partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub left: f64,
    pub right: f64,
    pub tau: usize,
    /// Branch symbols of `y, f̄ y, …, f̄^{τ−1} y`; bit `i` set for `R`.
    pub bits: u64,
}

impl Cylinder {
    pub fn side(&self, i: usize) -> Side {
        bit_side(self.bits, i)
    }

    pub fn word(&self) -> Vec<Side> {
        (0..self.tau).map(|i| self.side(i)).collect()
    }

    /// `h(v)` for the inverse branch of `f̄^τ` onto this cylinder.
    pub fn pullback(&self, m: &GeoModel, v: f64) -> Result<f64> {
        pullback_bits(m, self.bits, self.tau, v)
    }

    pub fn len(&self) -> f64 {
        self.right - self.left
    }

    pub fn is_empty(&self) -> bool {
        !(self.right > self.left)
    }

    pub fn contains(&self, y: f64) -> bool {
        y > self.left && y < self.right
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedScheme {
    pub y_bar: (f64, f64),
    /// Sorted by left endpoint, pairwise disjoint.
    pub cylinders: Vec<Cylinder>,
    pub mass_covered: f64,
}

/// Orbit of `h_w(v)`: the points `x_0, …, x_{τ−1}` followed by `v` itself.
pub fn pullback_chain(m: &GeoModel, word: &[Side], v: f64) -> Result<Vec<f64>> {
    let mut chain = alloc::vec![0.0; word.len() + 1];
    chain[word.len()] = v;
    let mut x = v;
    for (i, side) in word.iter().enumerate().rev() {
        x = m.inverse_branch(*side, x)?;
        chain[i] = x;
    }
    Ok(chain)
}

/// `h_w(v)`, the inverse branch of `f̄^{|w|}` along the word.
pub fn pullback(m: &GeoModel, word: &[Side], v: f64) -> Result<f64> {
    let mut x = v;
    for side in word.iter().rev() {
        x = m.inverse_branch(*side, x)?;
    }
    Ok(x)
}

fn bit_side(bits: u64, i: usize) -> Side {
    if bits >> i & 1 == 1 {
        Side::R
    } else {
        Side::L
    }
}

fn pullback_bits(m: &GeoModel, bits: u64, len: usize, v: f64) -> Result<f64> {
    let mut x = v;
    for i in (0..len).rev() {
        x = m.inverse_branch(bit_side(bits, i), x)?;
    }
    Ok(x)
}

/// Value of a branch of `f̄` at `x`, including the one-sided limit at `0`.
fn branch_value(m: &GeoModel, side: Side, x: f64) -> f64 {
    side.sign() * (m.alpha * x.abs().powf(m.eta) - 1.0)
}

#[derive(Debug, Clone)]
struct Piece {
    bits: u64,
    len: usize,
    cyl: (f64, f64),
    img: (f64, f64),
}

impl InducedScheme {
    pub fn y_len(&self) -> f64 {
        self.y_bar.1 - self.y_bar.0
    }

    pub fn max_tau(&self) -> usize {
        self.cylinders.iter().map(|c| c.tau).max().unwrap_or(0)
    }

    /// Number of cylinders with `τ ≤ n`.
    pub fn count_up_to(&self, n: usize) -> usize {
        self.cylinders.iter().filter(|c| c.tau <= n).count()
    }

    /// Index of the cylinder containing `y`.
    pub fn locate(&self, y: f64) -> Option<usize> {
        let i = self.cylinders.partition_point(|c| c.left <= y);
        if i == 0 {
            return None;
        }
        if self.cylinders[i - 1].contains(y) {
            Some(i - 1)
        } else {
            None
        }
    }

    /// Inverse branch `h_c : Ȳ → c`.
    pub fn inverse(&self, m: &GeoModel, c: usize, v: f64) -> Result<f64> {
        self.cylinders[c].pullback(m, v)
    }

    /// `F̄(y)` together with the cylinder index.
    pub fn induced_map(&self, m: &GeoModel, y: f64) -> Result<(f64, usize)> {
        let c = self
            .locate(y)
            .ok_or(Error::Domain("point not in any cylinder"))?;
        let mut x = y;
        for _ in 0..self.cylinders[c].tau {
            x = m.quotient_map(x)?;
        }
        Ok((x.clamp(self.y_bar.0, self.y_bar.1), c))
    }

    /// Normalized Lebesgue weights of the cylinders.
    pub fn lebesgue_weights(&self) -> Vec<f64> {
        let total: f64 = self.cylinders.iter().map(|c| c.len()).sum();
        self.cylinders.iter().map(|c| c.len() / total).collect()
    }

    /// Largest deviation, over all cylinders and all steps of the inverse
    /// chains of the endpoints of `Ȳ`, between `f̄(x_i)` and `x_{i+1}`.
    ///
    /// Checking one step at a time avoids the error amplification of
    /// iterating `f̄^τ` forward from the cylinder endpoints.
    pub fn full_branch_defect(&self, m: &GeoModel) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for c in &self.cylinders {
            for (v, end) in [(self.y_bar.0, c.left), (self.y_bar.1, c.right)] {
                let chain = pullback_chain(m, &c.word(), v)?;
                worst = worst.max((chain[0] - end).abs());
                for i in 0..c.tau {
                    let img = branch_value(m, c.side(i), chain[i]);
                    worst = worst.max((img - chain[i + 1]).abs());
                }
            }
        }
        Ok(worst)
    }
}

fn check_interval(y_bar: (f64, f64)) -> Result<()> {
    if !(y_bar.0 < y_bar.1 && y_bar.0 >= -1.0 && y_bar.1 <= 1.0) {
        return Err(Error::InvalidParameter(
            "Y_bar must be an interval inside (-1, 1)",
        ));
    }
    Ok(())
}

/// Builds the scheme without enforcing the coverage threshold.
pub fn build_scheme_partial(
    m: &GeoModel,
    y_bar: (f64, f64),
    max_tau: usize,
) -> Result<InducedScheme> {
    build_scheme_pruned(m, y_bar, max_tau, PRUNE_FRACTION)
}

/// Like [`build_scheme_partial`], dropping pieces shorter than
/// `prune · |Ȳ|`.
pub fn build_scheme_pruned(
    m: &GeoModel,
    y_bar: (f64, f64),
    max_tau: usize,
    prune: f64,
) -> Result<InducedScheme> {
    check_interval(y_bar)?;
    if max_tau == 0 || max_tau > MAX_TAU_LIMIT {
        return Err(Error::InvalidParameter("max_tau must lie in 1..=60"));
    }
    let y_len = y_bar.1 - y_bar.0;
    let mut cylinders = Vec::new();
    let mut queue = VecDeque::from([Piece {
        bits: 0,
        len: 0,
        cyl: y_bar,
        img: y_bar,
    }]);
    while let Some(piece) = queue.pop_front() {
        if piece.len >= max_tau {
            continue;
        }
        for side in [Side::L, Side::R] {
            let (dlo, dhi) = match side {
                Side::L => (-1.0, 0.0),
                Side::R => (0.0, 1.0),
            };
            let lo = piece.img.0.max(dlo);
            let hi = piece.img.1.min(dhi);
            if !(lo < hi) {
                continue;
            }
            let cyl_lo = if lo == piece.img.0 {
                piece.cyl.0
            } else {
                pullback_bits(m, piece.bits, piece.len, lo)?
            };
            let cyl_hi = if hi == piece.img.1 {
                piece.cyl.1
            } else {
                pullback_bits(m, piece.bits, piece.len, hi)?
            };
            if cyl_hi - cyl_lo < prune * y_len {
                continue;
            }
            let bits = piece.bits | ((side == Side::R) as u64) << piece.len;
            let len = piece.len + 1;
            let img = (branch_value(m, side, lo), branch_value(m, side, hi));
            if img.0 <= y_bar.0 && img.1 >= y_bar.1 {
                let left = pullback_bits(m, bits, len, y_bar.0)?;
                let right = pullback_bits(m, bits, len, y_bar.1)?;
                if img.0 < y_bar.0 {
                    queue.push_back(Piece {
                        bits,
                        len,
                        cyl: (cyl_lo, left),
                        img: (img.0, y_bar.0),
                    });
                }
                if img.1 > y_bar.1 {
                    queue.push_back(Piece {
                        bits,
                        len,
                        cyl: (right, cyl_hi),
                        img: (y_bar.1, img.1),
                    });
                }
                cylinders.push(Cylinder {
                    left,
                    right,
                    tau: len,
                    bits,
                });
            } else {
                queue.push_back(Piece {
                    bits,
                    len,
                    cyl: (cyl_lo, cyl_hi),
                    img,
                });
            }
        }
    }
    cylinders.sort_by(|a, b| {
        a.left
            .partial_cmp(&b.left)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let covered: f64 = cylinders.iter().map(|c| c.len()).sum();
    Ok(InducedScheme {
        y_bar,
        cylinders,
        mass_covered: covered / y_len,
    })
}

/// First-exact-cover inducing scheme on `Ȳ` with `τ ≤ max_tau`.
pub fn build_scheme(m: &GeoModel, y_bar: (f64, f64), max_tau: usize) -> Result<InducedScheme> {
    let s = build_scheme_partial(m, y_bar, max_tau)?;
    if s.mass_covered < MIN_COVERAGE {
        return Err(Error::Coverage {
            covered: s.mass_covered,
        });
    }
    Ok(s)
}

/// Two full-branch schemes on disjoint intervals. The union is not ergodic.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleScheme {
    pub components: [InducedScheme; 2],
}

impl DoubleScheme {
    pub fn is_ergodic(&self) -> bool {
        false
    }

    /// Component containing `y`.
    pub fn component_of(&self, y: f64) -> Option<usize> {
        self.components
            .iter()
            .position(|s| y > s.y_bar.0 && y < s.y_bar.1)
    }
}

/// Default components of the double scheme: `Ȳ₀ = (0.3, 0.7)` and an
/// interval next to `f̄²(0+) = −1`, which is a fixed point of this family.
pub const DOUBLE_DEFAULT: [(f64, f64); 2] = [(0.3, 0.7), (-0.9, -0.6)];

pub fn build_double_scheme(
    m: &GeoModel,
    y0: (f64, f64),
    y1: (f64, f64),
    max_tau: usize,
) -> Result<DoubleScheme> {
    if !(y0.1 <= y1.0 || y1.1 <= y0.0) {
        return Err(Error::InvalidParameter(
            "components of a double scheme must be disjoint",
        ));
    }
    Ok(DoubleScheme {
        components: [
            build_scheme_partial(m, y0, max_tau)?,
            build_scheme_partial(m, y1, max_tau)?,
        ],
    })
}

/// Induced roof `R = Σ_{ℓ<τ} r(f̄^ℓ y)` along a pullback chain.
fn roof_sum(m: &GeoModel, chain: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for x in &chain[..chain.len() - 1] {
        s += m.roof(*x)?;
    }
    Ok(s)
}

/// `R(h_c(v))`.
pub fn induced_roof_at(m: &GeoModel, s: &InducedScheme, c: usize, v: f64) -> Result<f64> {
    roof_sum(m, &pullback_chain(m, &s.cylinders[c].word(), v)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedRoofTable {
    /// `R` at the midpoint of each cylinder.
    pub values: Vec<f64>,
    /// `|R(y) − R(y')| / d_θ(y, y')` for `y, y'` next to the two endpoints.
    pub lipschitz: Vec<f64>,
}

impl InducedRoofTable {
    pub fn max_lipschitz(&self) -> f64 {
        self.lipschitz.iter().cloned().fold(0.0, f64::max)
    }
}

/// Relative inset used when evaluating `R` next to the endpoints of `Ȳ`.
const ENDPOINT_INSET: f64 = 1e-9;

pub fn induced_roof(m: &GeoModel, s: &InducedScheme) -> Result<InducedRoofTable> {
    let inset = ENDPOINT_INSET * s.y_len();
    let (va, vb) = (s.y_bar.0 + inset, s.y_bar.1 - inset);
    let mut values = Vec::with_capacity(s.cylinders.len());
    let mut lipschitz = Vec::with_capacity(s.cylinders.len());
    for (i, c) in s.cylinders.iter().enumerate() {
        // Image of the midpoint, then its exact inverse chain.
        let mid = 0.5 * (c.left + c.right);
        let mut v = mid;
        for _ in 0..c.tau {
            v = m.quotient_map(v)?;
        }
        let v = v.clamp(va, vb);
        values.push(induced_roof_at(m, s, i, v)?);
        // The endpoints of Ȳ lie in different cylinders, so s(y, y') = 1.
        let ra = induced_roof_at(m, s, i, va)?;
        let rb = induced_roof_at(m, s, i, vb)?;
        lipschitz.push((ra - rb).abs() / m.theta);
    }
    Ok(InducedRoofTable { values, lipschitz })
}

/// Cylinders followed below depth 1 by [`roof_lipschitz`].
pub const LIPSCHITZ_TRACKED: usize = 1024;

/// Estimate of `|R|_θ` using pairs separated at depths `1..=depth`.
///
/// Depth 1 scans every cylinder. Below that, the [`LIPSCHITZ_TRACKED`]
/// cylinders with the largest depth-1 oscillation are refined along the
/// largest cylinder of the partition; the oscillation of `R` over the
/// depth-`k` cylinder is divided by `θ^k`.
pub fn roof_lipschitz(m: &GeoModel, s: &InducedScheme, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be positive"));
    }
    let big = s
        .cylinders
        .iter()
        .enumerate()
        .max_by(|a, b| {
            a.1.len()
                .partial_cmp(&b.1.len())
                .unwrap_or(core::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .ok_or(Error::InsufficientSample("empty scheme"))?;
    let inset = ENDPOINT_INSET * s.y_len();
    let osc = |c: usize, lo: f64, hi: f64| -> Result<f64> {
        let a = induced_roof_at(m, s, c, lo)?;
        let b = induced_roof_at(m, s, c, hi)?;
        let mid = induced_roof_at(m, s, c, 0.5 * (lo + hi))?;
        Ok(a.max(b).max(mid) - a.min(b).min(mid))
    };
    let (lo0, hi0) = (s.y_bar.0 + inset, s.y_bar.1 - inset);
    let mut first = Vec::with_capacity(s.cylinders.len());
    for c in 0..s.cylinders.len() {
        first.push((osc(c, lo0, hi0)?, c));
    }
    let mut best = first.iter().map(|x| x.0).fold(0.0, f64::max) / m.theta;
    first.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    // Images under F̄ of the nested depth-k cylinders do not depend on c.
    let mut images = Vec::with_capacity(depth);
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 1..depth {
        lo = s.inverse(m, big, lo)?;
        hi = s.inverse(m, big, hi)?;
        images.push((lo, hi));
    }
    for &(_, c) in first.iter().take(LIPSCHITZ_TRACKED) {
        for (k, &(lo, hi)) in images.iter().enumerate() {
            best = best.max(osc(c, lo, hi)? / m.theta.powi(k as i32 + 2));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    /// `(t, μ(R > t))`, starting at `(0, 1)`.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Survival function of `R` under cylinder weights (Lebesgue if `None`) and
/// a least-squares fit of `ln μ(R > t)` on the range `μ ∈ [floor, 1/2]`.
pub fn roof_tail(m: &GeoModel, s: &InducedScheme, weights: Option<&[f64]>) -> Result<TailCurve> {
    let table = induced_roof(m, s)?;
    let w: Vec<f64> = match weights {
        Some(w) if w.len() == s.cylinders.len() => {
            let total: f64 = w.iter().sum();
            w.iter().map(|x| x / total).collect()
        }
        Some(_) => return Err(Error::InvalidParameter("one weight per cylinder required")),
        None => s.lebesgue_weights(),
    };
    let mut pairs: Vec<(f64, f64)> = table
        .values
        .iter()
        .cloned()
        .zip(w.iter().cloned())
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut points = Vec::from([(0.0, 1.0)]);
    let mut remaining = 1.0;
    let mut i = 0;
    while i < pairs.len() {
        let t = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == t {
            remaining -= pairs[i].1;
            i += 1;
        }
        points.push((t, remaining.max(0.0)));
    }
    let distinct = points.len() - 1;
    if distinct < 10 {
        return Err(Error::InsufficientRange {
            needed: 10,
            found: distinct,
        });
    }
    let floor = (10.0 * (1.0 - s.mass_covered)).max(1e-12);
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, p)| *p <= 0.5 && *p >= floor)
        .map(|(t, p)| (*t, p.ln()))
        .collect();
    if fit.len() < 3 {
        return Err(Error::InsufficientRange {
            needed: 3,
            found: fit.len(),
        });
    }
    let (slope, intercept, r_squared) = linear_fit(&fit);
    Ok(TailCurve {
        points,
        slope,
        intercept,
        r_squared,
    })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, R²)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - a * mx;
    let r2 = if sxx > 0.0 && syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (a, b, r2)
}

/// Empirical constants of backward contraction, slow recurrence and bounded
/// distortion over sampled depth-`n` cylinders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport {
    /// Smallest `c₀` with `|f̄^i y' − f̄^i y| ≤ c₀ λ^{τ_n−i} |F̄^n y' − F̄^n y|`.
    pub backward_c0: f64,
    /// Smallest `c₀` with `|DF̄^n y / DF̄^n y' − 1| ≤ c₀ |F̄^n y − F̄^n y'|`.
    pub distortion_c0: f64,
    /// Minimum of `|f̄^i y| λ^{−(τ_n−i)/2}`; at least 1 when slow recurrence holds.
    pub slow_recurrence_min: f64,
    pub pairs: usize,
}

/// Left-hand sides for one pair sharing the depth-`n` word, as ratios to the
/// bound without the constant: `(backward, distortion, slow recurrence)`.
pub fn pair_bounds(m: &GeoModel, word: &[Side], v: f64, v2: f64) -> Result<(f64, f64, f64)> {
    let a = pullback_chain(m, word, v)?;
    let b = pullback_chain(m, word, v2)?;
    let tau = word.len();
    let lam = m.lambda_contract;
    let dv = (v - v2).abs();
    let mut backward: f64 = 0.0;
    let mut log_da = 0.0;
    let mut log_db = 0.0;
    let mut slow = f64::INFINITY;
    for i in 0..tau {
        if dv > 0.0 {
            backward = backward.max((a[i] - b[i]).abs() / (lam.powi((tau - i) as i32) * dv));
        }
        log_da += m.quotient_derivative(a[i])?.ln();
        log_db += m.quotient_derivative(b[i])?.ln();
        slow = slow.min(a[i].abs() * lam.powf(-((tau - i) as f64) / 2.0));
    }
    let distortion = if dv > 0.0 {
        ((log_da - log_db).exp() - 1.0).abs() / dv
    } else {
        0.0
    };
    Ok((backward, distortion, slow))
}

/// Samples `samples` random depth-`n` cylinders (cylinder indices drawn in
/// proportion to length) and one pair of points in each.
pub fn verify_contraction(
    m: &GeoModel,
    s: &InducedScheme,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if n == 0 || n > 6 {
        return Err(Error::InvalidParameter(
            "refinement depth must lie in 1..=6",
        ));
    }
    if s.cylinders.is_empty() {
        return Err(Error::InsufficientSample("empty scheme"));
    }
    let weights = s.lebesgue_weights();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ContractionReport {
        backward_c0: 0.0,
        distortion_c0: 0.0,
        slow_recurrence_min: f64::INFINITY,
        pairs: 0,
    };
    let (lo, hi) = s.y_bar;
    for _ in 0..samples {
        let mut word = Vec::new();
        for _ in 0..n {
            let u: f64 = rng.random::<f64>() * acc;
            let c = cumulative
                .partition_point(|&x| x < u)
                .min(weights.len() - 1);
            word.extend(s.cylinders[c].word());
        }
        let v = lo + (hi - lo) * rng.random::<f64>();
        let v2 = lo + (hi - lo) * rng.random::<f64>();
        let (b, d, sr) = pair_bounds(m, &word, v, v2)?;
        report.backward_c0 = report.backward_c0.max(b);
        report.distortion_c0 = report.distortion_c0.max(d);
        report.slow_recurrence_min = report.slow_recurrence_min.min(sr);
        report.pairs += 1;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoofDerivativeReport {
    /// `sup_h sup_y |D(R∘h)(y)|` over the grid.
    pub sup: f64,
    /// Smallest `c₁` with `|r'(f̄^i h y)| |Df̄^i / DF̄|(h y) ≤ c₁ λ^{(τ−i)/2}`.
    pub c1: f64,
    /// `c₁ Σ_{i≥0} λ^{i/2}`.
    pub bound: f64,
    /// Largest gap between the analytic derivative and a central difference.
    pub fd_discrepancy: f64,
}

impl RoofDerivativeReport {
    pub fn holds(&self) -> bool {
        self.sup <= self.bound * (1.0 + 1e-12)
    }
}

/// `D(R∘h)(v)` by the chain rule, together with the largest normalized term.
pub fn roof_composition_derivative(m: &GeoModel, word: &[Side], v: f64) -> Result<(f64, f64)> {
    let chain = pullback_chain(m, word, v)?;
    let tau = word.len();
    let lam = m.lambda_contract;
    let mut total = 0.0;
    let mut c1: f64 = 0.0;
    // d x_i / d v = Π_{j ≥ i} 1 / f̄'(x_j)
    let mut dxdv = 1.0;
    for i in (0..tau).rev() {
        dxdv /= m.quotient_derivative(chain[i])?;
        let term = m.roof_derivative(chain[i])? * dxdv;
        total += term;
        c1 = c1.max(term.abs() / lam.powf((tau - i) as f64 / 2.0));
    }
    Ok((total, c1))
}

/// Checks the uniform bound on `|D(R∘h)|` over a grid of `grid` points per
/// inverse branch.
pub fn check_roof_derivative_bound(
    m: &GeoModel,
    s: &InducedScheme,
    grid: usize,
) -> Result<RoofDerivativeReport> {
    let grid = grid.max(2);
    let (lo, hi) = s.y_bar;
    let len = hi - lo;
    let mut sup: f64 = 0.0;
    let mut c1: f64 = 0.0;
    let mut fd: f64 = 0.0;
    for c in &s.cylinders {
        let word = c.word();
        for k in 0..grid {
            let v = lo + len * (k as f64 + 0.5) / grid as f64;
            let (d, ci) = roof_composition_derivative(m, &word, v)?;
            sup = sup.max(d.abs());
            c1 = c1.max(ci);
            let h = 1e-6 * len;
            let rp = roof_sum(m, &pullback_chain(m, &word, v + h)?)?;
            let rm = roof_sum(m, &pullback_chain(m, &word, v - h)?)?;
            fd = fd.max(((rp - rm) / (2.0 * h) - d).abs() / (1.0 + d.abs()));
        }
    }
    let sq = m.lambda_contract.sqrt();
    Ok(RoofDerivativeReport {
        sup,
        c1,
        bound: c1 / (1.0 - sq),
        fd_discrepancy: fd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_interval_has_tau_one() {
        let m = GeoModel::default();
        let s = build_scheme(&m, (-1.0, 1.0), 5).unwrap();
        assert_eq!(s.cylinders.len(), 2);
        assert!(s.cylinders.iter().all(|c| c.tau == 1));
        assert!((s.mass_covered - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_scheme_is_full_branch() {
        let m = GeoModel::default();
        let s = build_scheme_partial(&m, (0.3, 0.7), 20).unwrap();
        assert!(s.mass_covered > 0.95 && s.mass_covered < 1.0);
        assert!(matches!(
            build_scheme(&m, (0.3, 0.7), 20),
            Err(Error::Coverage { .. })
        ));
        assert!(s.full_branch_defect(&m).unwrap() < 1e-12);
        for w in s.cylinders.windows(2) {
            assert!(w[0].right <= w[1].left);
        }
        assert!(s
            .cylinders
            .iter()
            .all(|c| c.word().len() == c.tau && c.tau >= 1));
    }

    #[test]
    fn identical_points_give_zero() {
        let m = GeoModel::default();
        let (b, d, _) = pair_bounds(&m, &[Side::R, Side::L], 0.5, 0.5).unwrap();
        assert_eq!((b, d), (0.0, 0.0));
    }

    #[test]
    fn constant_roof_has_zero_derivative() {
        let m = GeoModel::preset("constant-roof").unwrap();
        let s = build_scheme_partial(&m, (0.3, 0.7), 15).unwrap();
        let rep = check_roof_derivative_bound(&m, &s, 5).unwrap();
        assert_eq!(rep.sup, 0.0);
    }
}
