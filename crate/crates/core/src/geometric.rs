//! Closed-form geometric Lorenz suspension.
//!
//! The quotient map is `f̄(x) = sign(x)(α|x|^η − 1)` on `[−1, 1] \ {0}`, the
//! Poincaré map is the skew product `f(x, y) = (f̄(x), c_s y + d_off sign x)`
//! and the roof is `r(x) = −ln|x|/λ_u + r0`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Branch label: `L` for `x < 0`, `R` for `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn of(x: f64) -> Result<Side> {
        if x < 0.0 {
            Ok(Side::L)
        } else if x > 0.0 {
            Ok(Side::R)
        } else {
            Err(Error::SingularLeaf)
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::L => -1.0,
            Side::R => 1.0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Side::L => 'L',
            Side::R => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Side> {
        match c {
            'L' => Some(Side::L),
            'R' => Some(Side::R),
            _ => None,
        }
    }
}

/// A nonempty word over `{L, R}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Itinerary(Vec<Side>);

impl Itinerary {
    pub fn new(symbols: Vec<Side>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidParameter("itinerary must be nonempty"));
        }
        Ok(Itinerary(symbols))
    }

    pub fn symbols(&self) -> &[Side] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Itinerary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| {
                Side::from_char(c)
                    .ok_or(Error::InvalidParameter("itinerary symbols must be L or R"))
            })
            .collect::<Result<Vec<_>>>()?;
        Itinerary::new(symbols)
    }
}

pub fn word_to_string(word: &[Side]) -> String {
    word.iter().map(|s| s.as_char()).collect()
}

/// Parameters of the geometric model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoModel {
    pub eta: f64,
    pub alpha: f64,
    pub c_s: f64,
    pub d_off: f64,
    /// Expansion rate entering the roof; `f64::INFINITY` gives `r ≡ r0`.
    pub lambda_u: f64,
    pub r0: f64,
    pub theta: f64,
    pub lambda_contract: f64,
    pub c0: f64,
}

/// `λ_u` of the classical Lorenz equations, `(−11 + √1201)/2`.
pub const CLASSICAL_LAMBDA_U: f64 = 11.827723451163457;

impl Default for GeoModel {
    fn default() -> Self {
        let eta = 0.75;
        let alpha = 2.0;
        GeoModel {
            eta,
            alpha,
            c_s: 0.25,
            d_off: 0.5,
            lambda_u: CLASSICAL_LAMBDA_U,
            r0: 1.0,
            theta: 1.0 / (alpha * eta),
            lambda_contract: 1.0 / (alpha * eta),
            c0: 2.0,
        }
    }
}

impl GeoModel {
    /// Named presets: `default`, `classical-eta`, `constant-roof`.
    ///
    /// `classical-eta` uses `η = −λ_s/λ_u` of the classical equations; it is
    /// not uniformly expanding and is therefore returned unchecked.
    pub fn preset(name: &str) -> Option<GeoModel> {
        let base = GeoModel::default();
        match name {
            "default" => Some(base),
            "classical-eta" => {
                let eta = (8.0 / 3.0) / CLASSICAL_LAMBDA_U;
                Some(GeoModel {
                    eta,
                    theta: 0.5,
                    lambda_contract: 0.5,
                    ..base
                })
            }
            "constant-roof" => Some(GeoModel {
                lambda_u: f64::INFINITY,
                ..base
            }),
            _ => None,
        }
    }

    /// Validates every model invariant.
    pub fn checked(self) -> Result<Self> {
        let m = self;
        if !(m.eta > 0.0 && m.eta < 1.0) {
            return Err(Error::InvalidParameter("eta must lie in (0, 1)"));
        }
        if !(m.alpha > 1.0 && m.alpha <= 2.0) {
            return Err(Error::InvalidParameter("alpha must lie in (1, 2]"));
        }
        // The right branch maps (0, 1) onto (−1, α − 1).
        if m.alpha < 2.0 {
            return Err(Error::InvalidParameter(
                "branches are full only for alpha = 2",
            ));
        }
        if !(m.alpha * m.eta > 1.0) {
            return Err(Error::InvalidParameter(
                "alpha * eta must exceed 1 (uniform expansion)",
            ));
        }
        if !(m.c_s > 0.0 && m.c_s <= 0.5) {
            return Err(Error::InvalidParameter("c_s must lie in (0, 1/2]"));
        }
        if !(m.d_off >= 0.0 && m.c_s + m.d_off <= 1.0) {
            return Err(Error::InvalidParameter(
                "need d_off >= 0 and c_s + d_off <= 1",
            ));
        }
        if !(m.lambda_u > 0.0) {
            return Err(Error::InvalidParameter("lambda_u must be positive"));
        }
        if !(m.r0 > 0.0 && m.r0.is_finite()) {
            return Err(Error::InvalidParameter("r0 must be positive"));
        }
        if !(m.theta > 0.0 && m.theta < 1.0) {
            return Err(Error::InvalidParameter("theta must lie in (0, 1)"));
        }
        if !(m.lambda_contract > 0.0 && m.lambda_contract < 1.0) {
            return Err(Error::InvalidParameter(
                "lambda_contract must lie in (0, 1)",
            ));
        }
        if !(m.c0 > 0.0 && m.c0.is_finite()) {
            return Err(Error::InvalidParameter("c0 must be positive"));
        }
        Ok(m)
    }

    /// `inf |f̄'| = αη`.
    pub fn min_expansion(&self) -> f64 {
        self.alpha * self.eta
    }

    pub fn quotient_map(&self, x: f64) -> Result<f64> {
        let side = Side::of(x)?;
        Ok(side.sign() * (self.alpha * x.abs().powf(self.eta) - 1.0))
    }

    /// `f̄'(x) = αη|x|^{η−1}`.
    pub fn quotient_derivative(&self, x: f64) -> Result<f64> {
        Side::of(x)?;
        Ok(self.alpha * self.eta * x.abs().powf(self.eta - 1.0))
    }

    /// Image of a branch: `[−1, α − 1]` for `R` and `[1 − α, 1]` for `L`.
    pub fn branch_image(&self, side: Side) -> (f64, f64) {
        match side {
            Side::R => (-1.0, self.alpha - 1.0),
            Side::L => (1.0 - self.alpha, 1.0),
        }
    }

    /// The preimage of `v` under the chosen branch.
    pub fn inverse_branch(&self, side: Side, v: f64) -> Result<f64> {
        let (lo, hi) = self.branch_image(side);
        if !(v >= lo && v <= hi) || !(v >= -1.0 && v <= 1.0) {
            return Err(Error::Range { value: v });
        }
        let inv = 1.0 / self.eta;
        Ok(match side {
            Side::R => ((v + 1.0) / self.alpha).powf(inv),
            Side::L => -((1.0 - v) / self.alpha).powf(inv),
        })
    }

    /// Derivative of the inverse branch at `v`.
    pub fn inverse_branch_derivative(&self, side: Side, v: f64) -> Result<f64> {
        let x = self.inverse_branch(side, v)?;
        Ok(1.0 / self.quotient_derivative(x)?)
    }

    pub fn roof(&self, x: f64) -> Result<f64> {
        Side::of(x)?;
        if self.lambda_u.is_infinite() {
            return Ok(self.r0);
        }
        Ok(-x.abs().ln() / self.lambda_u + self.r0)
    }

    pub fn roof_derivative(&self, x: f64) -> Result<f64> {
        Side::of(x)?;
        if self.lambda_u.is_infinite() {
            return Ok(0.0);
        }
        Ok(-1.0 / (self.lambda_u * x))
    }

    pub fn poincare_map(&self, p: &SectionPoint) -> Result<SectionPoint> {
        let side = Side::of(p.x)?;
        Ok(SectionPoint {
            x: self.quotient_map(p.x)?,
            y: self.c_s * p.y + self.d_off * side.sign(),
        })
    }

    /// Advances the suspension flow by `t ≥ 0`, returning the new point and
    /// the number of roof crossings.
    pub fn suspension_step(&self, p: &SuspensionPoint, t: f64) -> Result<(SuspensionPoint, u64)> {
        if !(t >= 0.0) {
            return Err(Error::Domain("suspension time must be nonnegative"));
        }
        let mut base = p.base;
        let mut u = p.u + t;
        let mut laps = 0;
        loop {
            let r = self.roof(base.x)?;
            if u < r {
                break;
            }
            u -= r;
            base = self.poincare_map(&base)?;
            laps += 1;
        }
        Ok((SuspensionPoint { base, u }, laps))
    }

    /// First `n ≥ 0` at which the branch symbols of the `f̄`-orbits differ,
    /// capped at `max_n`.
    pub fn separation_time(&self, x: f64, x2: f64, max_n: usize) -> Result<usize> {
        let (mut a, mut b) = (x, x2);
        for n in 0..max_n {
            if Side::of(a)? != Side::of(b)? {
                return Ok(n);
            }
            a = self.quotient_map(a)?;
            b = self.quotient_map(b)?;
        }
        Ok(max_n)
    }

    /// `d_θ = θ^s` for the base-map separation time.
    pub fn symbolic_distance(&self, x: f64, x2: f64, max_n: usize) -> Result<f64> {
        Ok(self.theta.powi(self.separation_time(x, x2, max_n)? as i32))
    }

    /// Forward branch coding of length `n`.
    pub fn itinerary(&self, x: f64, n: usize) -> Result<Itinerary> {
        let mut out = Vec::with_capacity(n);
        let mut x = x;
        for _ in 0..n.max(1) {
            out.push(Side::of(x)?);
            x = self.quotient_map(x)?;
        }
        Itinerary::new(out)
    }
}

/// `θ^s`.
pub fn symbolic_metric(theta: f64, s: usize) -> f64 {
    theta.powi(s as i32)
}

/// A point of the cross-section `X = [−1, 1]²` off the singular leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint {
    pub x: f64,
    pub y: f64,
}

impl SectionPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x == 0.0 {
            return Err(Error::SingularLeaf);
        }
        if !(x.abs() <= 1.0 && y.abs() <= 1.0) {
            return Err(Error::Domain("section point outside [-1, 1]^2"));
        }
        Ok(SectionPoint { x, y })
    }
}

/// A point `(base, u)` of the suspension with `0 ≤ u < r(base.x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuspensionPoint {
    pub base: SectionPoint,
    pub u: f64,
}

impl SuspensionPoint {
    pub fn new(m: &GeoModel, base: SectionPoint, u: f64) -> Result<Self> {
        if !(u >= 0.0 && u < m.roof(base.x)?) {
            return Err(Error::Domain("suspension height outside [0, r(x))"));
        }
        Ok(SuspensionPoint { base, u })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotient_examples() {
        let m = GeoModel::default().checked().unwrap();
        assert_eq!(m.quotient_map(1.0).unwrap(), 1.0);
        assert_eq!(m.quotient_map(0.0625).unwrap(), -0.75);
        assert!((m.inverse_branch(Side::R, -0.75).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(m.inverse_branch(Side::R, 1.0).unwrap(), 1.0);
        assert_eq!(m.quotient_map(0.0), Err(Error::SingularLeaf));
        assert!(matches!(
            m.inverse_branch(Side::L, -1.5),
            Err(Error::Range { .. })
        ));
        assert!((m.min_expansion() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn roof_examples() {
        let m = GeoModel::default();
        assert_eq!(m.roof(1.0).unwrap(), 1.0);
        assert_eq!(m.roof(-1.0).unwrap(), 1.0);
        let x = (-CLASSICAL_LAMBDA_U).exp();
        assert!((m.roof(x).unwrap() - 2.0).abs() < 1e-14);
        let c = GeoModel::preset("constant-roof").unwrap();
        assert_eq!(c.roof(1e-9).unwrap(), 1.0);
    }

    #[test]
    fn presets_and_validation() {
        assert!(GeoModel::preset("default").unwrap().checked().is_ok());
        assert!(GeoModel::preset("classical-eta")
            .unwrap()
            .checked()
            .is_err());
        let bad = GeoModel {
            alpha: 1.8,
            ..GeoModel::default()
        };
        assert!(bad.checked().is_err());
    }

    #[test]
    fn separation_examples() {
        let m = GeoModel::default();
        assert_eq!(m.separation_time(-0.3, 0.4, 20).unwrap(), 0);
        assert_eq!(m.separation_time(0.4, 0.4, 20).unwrap(), 20);
        assert_eq!(symbolic_metric(0.5, 3), 0.125);
    }

    #[test]
    fn suspension_below_roof() {
        let m = GeoModel::default();
        let p = SuspensionPoint::new(&m, SectionPoint::new(0.5, 0.1).unwrap(), 0.2).unwrap();
        let (q, laps) = m.suspension_step(&p, 0.3).unwrap();
        assert_eq!(laps, 0);
        assert_eq!(q.base, p.base);
        assert!((q.u - 0.5).abs() < 1e-15);
        assert_eq!(m.suspension_step(&p, 0.0).unwrap().0, p);
    }

    #[test]
    fn itinerary_round_trip() {
        let it: Itinerary = "RLLR".parse().unwrap();
        assert_eq!(alloc::format!("{it}"), "RLLR");
        assert!("".parse::<Itinerary>().is_err());
        assert!("RXL".parse::<Itinerary>().is_err());
    }
}
