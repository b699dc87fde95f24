//! The series `χ̂(p) = Σ_{n≥0} [v(Z_n p) − v(Z_n π p)]` on the geometric
//! suspension, where `π` slides a point along its stable leaf to `y = 0`.
//! The base and height coordinates of `Z_n p` and `Z_n π p` agree forever,
//! so only the contracted `y` coordinates differ.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometric::{GeoModel, SectionPoint, SuspensionPoint};
use crate::inducing::linear_fit;

/// `y` coordinate of the reference section used by `π`.
pub const Y_REF: f64 = 0.0;
/// Term maxima below this fraction of the first are rounding noise and are
/// left out of the rate fit.
const FIT_FLOOR: f64 = 1e-11;
const DIFF_STEP: f64 = 1e-5;

/// Cell-centred grid of `nx · ny · nu` suspension points; `nx` even keeps
/// the grid off the singular leaf.
pub fn suspension_grid(m: &GeoModel, nx: usize, ny: usize, nu: usize) -> Result<Vec<[f64; 3]>> {
    if nx == 0 || nx % 2 == 1 || ny == 0 || nu == 0 {
        return Err(Error::InvalidParameter(
            "grid needs an even nx and positive ny, nu",
        ));
    }
    let mut out = Vec::with_capacity(nx * ny * nu);
    for i in 0..nx {
        let x = -1.0 + 2.0 * (i as f64 + 0.5) / nx as f64;
        let r = m.roof(x)?;
        for j in 0..ny {
            let y = -1.0 + 2.0 * (j as f64 + 0.5) / ny as f64;
            for k in 0..nu {
                out.push([x, y, r * (k as f64 + 0.5) / nu as f64]);
            }
        }
    }
    Ok(out)
}

fn point(s: &[f64; 3]) -> SuspensionPoint {
    SuspensionPoint {
        base: SectionPoint { x: s[0], y: s[1] },
        u: s[2],
    }
}

fn state(p: &SuspensionPoint) -> [f64; 3] {
    [p.base.x, p.base.y, p.u]
}

/// `Z_1 p`.
pub fn time_one(m: &GeoModel, s: &[f64; 3]) -> Result<[f64; 3]> {
    Ok(state(&m.suspension_step(&point(s), 1.0)?.0))
}

/// Terms `n = 0..n_terms` at `s`, and `|y_N − y'_N|` after them.
fn terms_at<V: Fn(&[f64; 3]) -> f64>(
    m: &GeoModel,
    v: &V,
    s: &[f64; 3],
    n_terms: usize,
) -> Result<(Vec<f64>, f64)> {
    let mut p = point(s);
    let mut gap = (s[1] - Y_REF).abs();
    let mut out = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let a = state(&p);
        let b = [a[0], a[1] - (s[1] - Y_REF).signum() * gap, a[2]];
        out.push(v(&a) - v(&b));
        let (q, laps) = m.suspension_step(&p, 1.0)?;
        gap *= m.c_s.powi(laps as i32);
        p = q;
    }
    Ok((out, gap))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoboundaryDecomposition {
    pub points: Vec<[f64; 3]>,
    pub truncation: usize,
    pub chi: Vec<f64>,
    /// `v̂ = v + χ̂∘S − χ̂`.
    pub v_hat: Vec<f64>,
    /// `max_p |term_n(p)|` for `n < N`.
    pub term_max: Vec<f64>,
    /// Fitted decay factor of the term maxima per unit time.
    pub rate: f64,
    /// Bound on `Σ_{n≥N} |term_n|`, uniform over the grid.
    pub tail_bound: f64,
}

/// `χ̂` and `v̂` truncated at `n_terms` on `points`.
///
/// The tail bound is `L_y · max_p |y_N − y'_N| / (1 − ρ)`, with `L_y` the
/// largest `|∂_y v|` seen on the grid and `ρ` the fitted rate.
pub fn coboundary_series<V>(
    m: &GeoModel,
    v: V,
    points: &[[f64; 3]],
    n_terms: usize,
) -> Result<CoboundaryDecomposition>
where
    V: Fn(&[f64; 3]) -> f64,
{
    if n_terms < 4 {
        return Err(Error::InvalidParameter("need at least four terms"));
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty grid"));
    }
    let mut chi = Vec::with_capacity(points.len());
    let mut v_hat = Vec::with_capacity(points.len());
    let mut term_max = vec![0.0f64; n_terms];
    let mut worst_gap: f64 = 0.0;
    let mut lip: f64 = 0.0;
    for s in points {
        let (terms, gap) = terms_at(m, &v, s, n_terms)?;
        for (tm, t) in term_max.iter_mut().zip(&terms) {
            *tm = tm.max(t.abs());
        }
        let c: f64 = terms.iter().sum();
        let s1 = time_one(m, s)?;
        let (terms1, gap1) = terms_at(m, &v, &s1, n_terms)?;
        let c1: f64 = terms1.iter().sum();
        chi.push(c);
        v_hat.push(v(s) + c1 - c);
        worst_gap = worst_gap.max(gap).max(gap1);
        let up = [s[0], (s[1] + DIFF_STEP).min(1.0), s[2]];
        let dn = [s[0], (s[1] - DIFF_STEP).max(-1.0), s[2]];
        lip = lip.max((v(&up) - v(&dn)).abs() / (up[1] - dn[1]));
    }
    let top = term_max[0].max(term_max.iter().cloned().fold(0.0, f64::max));
    if top == 0.0 {
        return Ok(CoboundaryDecomposition {
            points: points.to_vec(),
            truncation: n_terms,
            chi,
            v_hat,
            term_max,
            rate: 0.0,
            tail_bound: 0.0,
        });
    }
    let burn = 2.min(n_terms - 3);
    let pts: Vec<(f64, f64)> = term_max
        .iter()
        .enumerate()
        .skip(burn)
        .filter(|(_, t)| **t > FIT_FLOOR * top)
        .map(|(n, t)| (n as f64, t.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSample(
            "too few resolved terms for a rate fit",
        ));
    }
    let (slope, _, _) = linear_fit(&pts);
    let rate = slope.exp();
    if rate >= 1.0 {
        return Err(Error::NoContraction { ratio: rate });
    }
    Ok(CoboundaryDecomposition {
        points: points.to_vec(),
        truncation: n_terms,
        chi,
        v_hat,
        term_max,
        rate,
        tail_bound: lip * worst_gap / (1.0 - rate),
    })
}

/// `v̂` at a single point.
pub fn v_hat_at<V>(m: &GeoModel, v: &V, s: &[f64; 3], n_terms: usize) -> Result<f64>
where
    V: Fn(&[f64; 3]) -> f64,
{
    let (t0, _) = terms_at(m, v, s, n_terms)?;
    let (t1, _) = terms_at(m, v, &time_one(m, s)?, n_terms)?;
    Ok(v(s) + t1.iter().sum::<f64>() - t0.iter().sum::<f64>())
}
