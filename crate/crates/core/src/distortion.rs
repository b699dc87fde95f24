//! Temporal distortion `D₀` and `D` on the geometric model.
//!
//! Points on unstable leaves are encoded by a base coordinate and a backward
//! history of branch symbols (most recent first), optionally ending in a
//! periodic tail. Stable leaves of the skew product are vertical, so the
//! bracket `[p, q]` keeps the history of `p` and the base coordinate of `q`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometric::{GeoModel, Side};
use crate::inducing::{InducedScheme, DOUBLE_DEFAULT};

/// Hard cap on the depth of a backward orbit.
pub const MAX_DEPTH: usize = 20_000;
/// Fewest terms summed before the tail bound may stop a series.
const MIN_TERMS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPoint {
    pub x: f64,
    /// `history[j]` is the branch of `x_{−(j+1)}`.
    pub history: Vec<Side>,
    /// When set, the last `period` symbols of `history` repeat forever.
    pub tail_period: Option<usize>,
}

impl MarkedPoint {
    pub fn new(x: f64, history: Vec<Side>, tail_period: Option<usize>) -> Result<Self> {
        if !(x >= -1.0 && x <= 1.0) {
            return Err(Error::InvalidParameter(
                "base coordinate must lie in [-1, 1]",
            ));
        }
        if let Some(p) = tail_period {
            if p == 0 || p > history.len() {
                return Err(Error::InvalidParameter(
                    "tail period must lie in 1..=history length",
                ));
            }
        }
        Ok(MarkedPoint {
            x,
            history,
            tail_period,
        })
    }

    /// A point whose whole history is the periodic word `tail`.
    pub fn periodic(x: f64, tail: Vec<Side>) -> Result<Self> {
        let p = tail.len();
        MarkedPoint::new(x, tail, Some(p))
    }

    /// Branch of `x_{−(j+1)}`, if the history reaches that far.
    pub fn symbol(&self, j: usize) -> Option<Side> {
        let n = self.history.len();
        if j < n {
            return Some(self.history[j]);
        }
        let p = self.tail_period?;
        Some(self.history[n - p + (j - n) % p])
    }

    /// Length of the history before it starts repeating (or its full length).
    pub fn preperiod(&self) -> usize {
        self.history.len() - self.tail_period.unwrap_or(0)
    }

    pub fn with_x(&self, x: f64) -> Result<Self> {
        MarkedPoint::new(x, self.history.clone(), self.tail_period)
    }

    /// Same unstable leaf: identical symbolic histories.
    pub fn same_leaf(&self, other: &MarkedPoint) -> bool {
        let depth = self.history.len().max(other.history.len())
            + self.tail_period.unwrap_or(1) * other.tail_period.unwrap_or(1);
        (0..depth).all(|j| self.symbol(j) == other.symbol(j))
    }

    /// History written as `prefix(tail)`, e.g. `RL(LR)`.
    pub fn history_string(&self) -> String {
        let mut s = String::new();
        let cut = self.preperiod();
        for (i, c) in self.history.iter().enumerate() {
            if i == cut && self.tail_period.is_some() {
                s.push('(');
            }
            s.push(c.as_char());
        }
        if self.tail_period.is_some() {
            s.push(')');
        }
        s
    }
}

impl fmt::Display for MarkedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17e}|{}", self.x, self.history_string())
    }
}

/// Parses the `prefix(tail)` history notation.
pub fn parse_history(s: &str) -> Result<(Vec<Side>, Option<usize>)> {
    let bad = Error::InvalidParameter("history must look like RL(LR)");
    let (prefix, tail) = match s.find('(') {
        Some(i) => {
            let rest = s[i + 1..].strip_suffix(')').ok_or(bad.clone())?;
            (&s[..i], Some(rest))
        }
        None => (s, None),
    };
    let parse = |w: &str| {
        w.chars()
            .map(|c| Side::from_char(c).ok_or(bad.clone()))
            .collect::<Result<Vec<_>>>()
    };
    let mut hist = parse(prefix)?;
    let period = match tail {
        Some(t) => {
            let t = parse(t)?;
            if t.is_empty() {
                return Err(bad);
            }
            let p = t.len();
            hist.extend(t);
            Some(p)
        }
        None => None,
    };
    Ok((hist, period))
}

impl FromStr for MarkedPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (x, h) = s
            .split_once('|')
            .ok_or(Error::InvalidParameter("expected x|history"))?;
        let x: f64 = x
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter("bad base coordinate"))?;
        let (hist, period) = parse_history(h.trim())?;
        MarkedPoint::new(x, hist, period)
    }
}

fn step_back(m: &GeoModel, p: &MarkedPoint, j: usize, x: f64) -> Result<f64> {
    let side = p.symbol(j).ok_or(Error::HistoryExhausted { depth: j })?;
    m.inverse_branch(side, x)
        .map_err(|_| Error::HistoryMismatch { depth: j + 1 })
}

/// `x_{−1}, …, x_{−depth}` along the history of `p`.
pub fn backward_orbit(m: &GeoModel, p: &MarkedPoint, depth: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(depth);
    let mut x = p.x;
    for j in 0..depth {
        x = step_back(m, p, j, x)?;
        out.push(x);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionSample {
    pub p: MarkedPoint,
    pub q: MarkedPoint,
    pub depth: usize,
    pub value: f64,
    pub tail_bound: f64,
}

/// `D₀(p, q) = Σ_{j≥1} [r(x_{−j}) − r(z_{−j})]` for `p, q` on one unstable leaf.
///
/// With `K_J = max_{j≤J} |t_j| θ^{−j}` the remainder after `J` terms is
/// bounded by `K_J θ^{J+1}/(1−θ)`; summation stops once this falls below
/// `tol`, and not before the periodic tail has been traversed twice.
pub fn d0(m: &GeoModel, p: &MarkedPoint, q: &MarkedPoint, tol: f64) -> Result<DistortionSample> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive"));
    }
    if !p.same_leaf(q) {
        return Err(Error::NotSameLeaf);
    }
    let theta = m.theta;
    let min_terms = MIN_TERMS.max(p.preperiod() + 2 * p.tail_period.unwrap_or(0));
    let (mut a, mut b) = (p.x, q.x);
    let mut sum = 0.0;
    let mut k: f64 = 0.0;
    let mut weight = 1.0;
    for j in 0..MAX_DEPTH {
        a = step_back(m, p, j, a)?;
        b = step_back(m, q, j, b)?;
        let t = if a == b { 0.0 } else { m.roof(a)? - m.roof(b)? };
        sum += t;
        weight *= theta;
        k = k.max(t.abs() / weight);
        let depth = j + 1;
        let bound = k * weight * theta / (1.0 - theta);
        if depth >= min_terms && bound < tol {
            return Ok(DistortionSample {
                p: p.clone(),
                q: q.clone(),
                depth,
                value: sum,
                tail_bound: bound,
            });
        }
    }
    Err(Error::HistoryExhausted { depth: MAX_DEPTH })
}

/// `D₀` on tower level `ℓ`: the base value plus `Σ_{j<ℓ} [r(f̄^j x) − r(f̄^j z)]`.
pub fn d0_level(
    m: &GeoModel,
    p: &MarkedPoint,
    q: &MarkedPoint,
    level: usize,
    tol: f64,
) -> Result<DistortionSample> {
    let mut s = d0(m, p, q, tol)?;
    let (mut a, mut b) = (p.x, q.x);
    for _ in 0..level {
        s.value += m.roof(a)? - m.roof(b)?;
        a = m.quotient_map(a)?;
        b = m.quotient_map(b)?;
    }
    Ok(s)
}

/// Disjoint base intervals on which the local product structure is used.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDomain {
    pub components: Vec<(f64, f64)>,
}

impl Default for ProductDomain {
    fn default() -> Self {
        ProductDomain {
            components: DOUBLE_DEFAULT.to_vec(),
        }
    }
}

impl ProductDomain {
    pub fn single(y_bar: (f64, f64)) -> Self {
        ProductDomain {
            components: Vec::from([y_bar]),
        }
    }

    pub fn component_of(&self, x: f64) -> Option<usize> {
        self.components.iter().position(|&(a, b)| x > a && x < b)
    }
}

/// `[p, q]`: history of `p`, base coordinate of `q`.
pub fn bracket(dom: &ProductDomain, p: &MarkedPoint, q: &MarkedPoint) -> Result<MarkedPoint> {
    match (dom.component_of(p.x), dom.component_of(q.x)) {
        (Some(a), Some(b)) if a == b => p.with_x(q.x),
        _ => Err(Error::NotSameComponent),
    }
}

/// `D(p, q) = D₀(p, [p, q]) + D₀(q, [q, p])`; each term to `tol/2`.
pub fn big_d(
    m: &GeoModel,
    dom: &ProductDomain,
    p: &MarkedPoint,
    q: &MarkedPoint,
    tol: f64,
) -> Result<DistortionSample> {
    let pq = bracket(dom, p, q)?;
    let qp = bracket(dom, q, p)?;
    let a = d0(m, p, &pq, tol / 2.0)?;
    let b = d0(m, q, &qp, tol / 2.0)?;
    Ok(DistortionSample {
        p: p.clone(),
        q: q.clone(),
        depth: a.depth.max(b.depth),
        value: a.value + b.value,
        tail_bound: a.tail_bound + b.tail_bound,
    })
}

/// Points of the finite subsystem over two cylinders `c1, c2` of `scheme`:
/// forward itineraries in `{c1, c2}^depth` applied to the centre of `Ȳ`,
/// and backward cylinder sequences in `{c1, c2}^depth` followed by `c1`
/// forever.
pub fn subsystem_points(
    m: &GeoModel,
    scheme: &InducedScheme,
    c1: usize,
    c2: usize,
    depth: usize,
) -> Result<Vec<MarkedPoint>> {
    let n = scheme.cylinders.len();
    if c1 >= n || c2 >= n || c1 == c2 {
        return Err(Error::InvalidParameter(
            "need two distinct cylinder indices",
        ));
    }
    if depth == 0 || depth > 12 {
        return Err(Error::InvalidParameter(
            "subsystem depth must lie in 1..=12",
        ));
    }
    let cyl = [c1, c2];
    let centre = 0.5 * (scheme.y_bar.0 + scheme.y_bar.1);
    let backward_word = |c: usize| -> Vec<Side> {
        let mut w = scheme.cylinders[c].word();
        w.reverse();
        w
    };
    let mut xs = Vec::with_capacity(1 << depth);
    for code in 0..(1usize << depth) {
        let mut v = centre;
        for level in (0..depth).rev() {
            v = scheme.inverse(m, cyl[code >> level & 1], v)?;
        }
        xs.push(v);
    }
    let tail = backward_word(c1);
    let mut points = Vec::with_capacity(xs.len() << depth);
    for code in 0..(1usize << depth) {
        let mut hist = Vec::new();
        for level in 0..depth {
            hist.extend(backward_word(cyl[code >> level & 1]));
        }
        hist.extend(tail.iter().copied());
        for &x in &xs {
            points.push(MarkedPoint::new(x, hist.clone(), Some(tail.len()))?);
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFit {
    /// `(ε, N(ε))` over the ladder.
    pub counts: Vec<(f64, usize)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fewest distinct values accepted by [`box_dimension`].
pub const MIN_DISTINCT: usize = 100;

/// Box-counting regression of `ln N(ε)` on `ln(1/ε)`, boxes anchored at 0.
pub fn box_dimension(values: &[f64], eps_ladder: &[f64]) -> Result<DimensionFit> {
    let mut v: Vec<f64> = values.iter().cloned().filter(|x| x.is_finite()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    v.dedup();
    if v.len() < MIN_DISTINCT {
        return Err(Error::InsufficientSample("fewer than 100 distinct values"));
    }
    if eps_ladder.len() < 2 || eps_ladder.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter(
            "eps ladder needs at least two positive scales",
        ));
    }
    let mut counts = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        let mut boxes: Vec<i64> = v.iter().map(|x| (x / eps).floor() as i64).collect();
        boxes.dedup();
        counts.push((eps, boxes.len()));
    }
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .map(|&(e, n)| ((1.0 / e).ln(), (n as f64).ln()))
        .collect();
    let (slope, intercept, r_squared) = crate::inducing::linear_fit(&pts);
    Ok(DimensionFit {
        counts,
        slope,
        intercept,
        r_squared,
    })
}

/// Geometric ladder `span · 2^{−k}`, `k = k0..=k1`.
pub fn dyadic_ladder(span: f64, k0: u32, k1: u32) -> Vec<f64> {
    (k0..=k1).map(|k| span / (1u64 << k) as f64).collect()
}

/// Dyadic ladder over the spread of `values`, from a quarter of the spread
/// down by `depth` further halvings.
pub fn range_ladder(values: &[f64], depth: usize) -> Vec<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    dyadic_ladder((hi - lo).max(f64::MIN_POSITIVE), 2, 2 + depth as u32)
}

/// The two reference points used by [`range_dimension`].
pub fn reference_points(points: &[MarkedPoint]) -> [MarkedPoint; 2] {
    [points[0].clone(), points[points.len() - 1].clone()]
}

/// `D` over the subsystem against two reference points (the first and last
/// subsystem points), followed by box counting.
pub fn range_dimension(
    m: &GeoModel,
    scheme: &InducedScheme,
    c1: usize,
    c2: usize,
    depth: usize,
    eps_ladder: Option<&[f64]>,
    tol: f64,
) -> Result<(Vec<f64>, DimensionFit)> {
    let points = subsystem_points(m, scheme, c1, c2, depth)?;
    let dom = ProductDomain::single(scheme.y_bar);
    let refs = reference_points(&points);
    let mut values = Vec::with_capacity(2 * points.len());
    for q in &refs {
        for p in &points {
            values.push(big_d(m, &dom, p, q, tol)?.value);
        }
    }
    let default_ladder;
    let ladder = match eps_ladder {
        Some(l) => l,
        None => {
            default_ladder = range_ladder(&values, depth);
            &default_ladder
        }
    };
    let fit = box_dimension(&values, ladder)?;
    Ok((values, fit))
}

/// Middle-thirds Cantor set: midpoints of the `2^depth` intervals of level `depth`.
pub fn cantor_midpoints(depth: u32) -> Vec<f64> {
    let width = 3f64.powi(-(depth as i32));
    (0..(1u64 << depth))
        .map(|code| {
            let mut left = 0.0;
            for level in 0..depth {
                if code >> (depth - 1 - level) & 1 == 1 {
                    left += 2.0 * 3f64.powi(-(level as i32 + 1));
                }
            }
            left + 0.5 * width
        })
        .collect()
}
