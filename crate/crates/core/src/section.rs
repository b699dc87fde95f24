//! Poincaré sections of the Lorenz flow: crossing detection, the empirical
//! one-dimensional quotient map and periodic orbits by Newton shooting.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::flow::{
    flow_map, vector_field, DenseStep, Dopri5, FlowParams, State3, Trajectory, Variational,
    VectorField,
};
use crate::linalg::{self, eigen_moduli_3x3, Mat3, Vec3};

/// Largest admissible plane residual of a recorded crossing.
pub const PLANE_TOL: f64 = 1e-10;
/// Crossings whose plane derivative falls below this are dropped.
pub const TANGENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// The plane function `n·s − c` goes from positive to negative.
    Decreasing,
    Increasing,
    Both,
}

/// The plane `{s : n·s = c}` with a crossing direction and a window on the
/// first two coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionSpec {
    pub normal: Vec3,
    pub offset: f64,
    pub direction: CrossingDirection,
    /// `[x_min, x_max, y_min, y_max]`.
    pub window: [f64; 4],
}

impl SectionSpec {
    pub fn new(
        normal: Vec3,
        offset: f64,
        direction: CrossingDirection,
        window: [f64; 4],
    ) -> Result<Self> {
        if linalg::norm(&normal) == 0.0 || !linalg::norm(&normal).is_finite() {
            return Err(Error::InvalidParameter("section normal must be nonzero"));
        }
        if !(window[0] < window[1] && window[2] < window[3]) {
            return Err(Error::InvalidParameter("section window must be nonempty"));
        }
        Ok(SectionSpec {
            normal,
            offset,
            direction,
            window,
        })
    }

    /// The plane `z = ρ − 1` with downward crossings.
    pub fn lorenz_default(p: &FlowParams) -> Self {
        SectionSpec {
            normal: [0.0, 0.0, 1.0],
            offset: p.rho - 1.0,
            direction: CrossingDirection::Decreasing,
            window: [-40.0, 40.0, -40.0, 40.0],
        }
    }

    pub fn plane(&self, s: &State3) -> f64 {
        linalg::dot(&self.normal, &s.to_array()) - self.offset
    }

    /// Orthogonal projection onto the plane.
    fn project(&self, s: &State3) -> State3 {
        let k = self.plane(s) / linalg::dot(&self.normal, &self.normal);
        State3::from_array(linalg::axpy(-k, &self.normal, &s.to_array()))
    }

    fn in_window(&self, s: &State3) -> bool {
        s.x >= self.window[0]
            && s.x <= self.window[1]
            && s.y >= self.window[2]
            && s.y <= self.window[3]
    }

    fn accepts(&self, g0: f64, g1: f64) -> bool {
        match self.direction {
            CrossingDirection::Decreasing => g0 > 0.0 && g1 <= 0.0,
            CrossingDirection::Increasing => g0 < 0.0 && g1 >= 0.0,
            CrossingDirection::Both => (g0 > 0.0 && g1 <= 0.0) || (g0 < 0.0 && g1 >= 0.0),
        }
    }

    /// Orthonormal in-plane basis and the plane point closest to the origin.
    fn chart(&self) -> (Vec3, Vec3, Vec3) {
        let n = linalg::normalized(&self.normal);
        let base = linalg::scale(
            self.offset / linalg::dot(&self.normal, &self.normal),
            &self.normal,
        );
        let trial = if n[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let e1 = linalg::normalized(&linalg::axpy(-linalg::dot(&trial, &n), &n, &trial));
        let e2 = linalg::cross(&n, &e1);
        (base, e1, e2)
    }

    fn to_chart(&self, s: &State3) -> [f64; 2] {
        let (base, e1, e2) = self.chart();
        let d = linalg::axpy(-1.0, &base, &s.to_array());
        [linalg::dot(&d, &e1), linalg::dot(&d, &e2)]
    }

    fn from_chart(&self, c: [f64; 2]) -> State3 {
        let (base, e1, e2) = self.chart();
        State3::from_array(linalg::axpy(c[1], &e2, &linalg::axpy(c[0], &e1, &base)))
    }
}

/// A crossing of the section, with the time elapsed since the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub state: State3,
    pub time: f64,
    pub flight: f64,
}

impl CrossingEvent {
    pub fn new(spec: &SectionSpec, state: State3, time: f64, flight: f64) -> Result<Self> {
        if !(spec.plane(&state).abs() < PLANE_TOL) {
            return Err(Error::Domain("crossing state is off the section plane"));
        }
        if !(flight > 0.0) {
            return Err(Error::Domain("flight time must be positive"));
        }
        Ok(CrossingEvent {
            state,
            time,
            flight,
        })
    }
}

/// Locates the root of the plane function on one dense step. The state is
/// projected onto the plane, since at large `t` the time resolution alone
/// leaves a residual of order `ulp(t)·|ġ|`.
fn refine(spec: &SectionSpec, step: &DenseStep<3>) -> (f64, State3) {
    let (t, s) = refine_root(spec, step);
    (t, spec.project(&s))
}

fn refine_root(spec: &SectionSpec, step: &DenseStep<3>) -> (f64, State3) {
    let g = |t: f64| spec.plane(&State3::from_array(step.eval(t)));
    let (mut a, mut b) = (step.t0, step.t1);
    let (mut ga, mut gb) = (g(a), g(b));
    let mut side = 0;
    for _ in 0..200 {
        if gb == 0.0 {
            break;
        }
        // Illinois variant of regula falsi.
        let mut c = b - gb * (b - a) / (gb - ga);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let gc = g(c);
        if gc.abs() < 0.01 * PLANE_TOL {
            return (c, State3::from_array(step.eval(c)));
        }
        if (gc > 0.0) == (gb > 0.0) {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = b;
            ga = gb;
            b = c;
            gb = gc;
            side = 1;
        }
        if (b - a).abs() < 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    (b, State3::from_array(step.eval(b)))
}

/// Streaming crossing detector fed one dense step at a time.
#[derive(Debug, Clone)]
pub struct CrossingDetector {
    spec: SectionSpec,
    last_time: Option<f64>,
    tangencies: usize,
}

impl CrossingDetector {
    pub fn new(spec: SectionSpec) -> Self {
        CrossingDetector {
            spec,
            last_time: None,
            tangencies: 0,
        }
    }

    /// Starts the flight clock at `t` (e.g. when starting on the section).
    pub fn with_reference_time(mut self, t: f64) -> Self {
        self.last_time = Some(t);
        self
    }

    pub fn tangencies(&self) -> usize {
        self.tangencies
    }

    /// Processes one step; returns the event if a crossing completes a flight.
    /// The very first crossing only starts the flight clock.
    pub fn feed(&mut self, step: &DenseStep<3>) -> Option<CrossingEvent> {
        let g0 = self.spec.plane(&State3::from_array(step.y0));
        let g1 = self.spec.plane(&State3::from_array(step.y1));
        if !self.spec.accepts(g0, g1) {
            return None;
        }
        let (t, s) = refine(&self.spec, step);
        // Time derivative of the plane function along the interpolant.
        let h = 1e-7 * (step.t1 - step.t0).abs().max(1e-3);
        let lo = (t - h).max(step.t0.min(step.t1));
        let hi = (t + h).min(step.t0.max(step.t1));
        let dg = (self.spec.plane(&State3::from_array(step.eval(hi)))
            - self.spec.plane(&State3::from_array(step.eval(lo))))
            / (hi - lo);
        if dg.abs() < TANGENCY_TOL {
            self.tangencies += 1;
            return None;
        }
        if !self.spec.in_window(&s) {
            return None;
        }
        let prev = self.last_time.replace(t);
        let flight = t - prev?;
        CrossingEvent::new(&self.spec, s, t, flight).ok()
    }
}

/// All crossings of a stored trajectory, time-ordered. The first crossing
/// only anchors the flight time of the second.
pub fn detect_crossings(traj: &Trajectory, spec: &SectionSpec) -> (Vec<CrossingEvent>, usize) {
    let mut det = CrossingDetector::new(*spec);
    let events = traj.steps().iter().filter_map(|s| det.feed(s)).collect();
    (events, det.tangencies())
}

/// Integrates from `s0` and collects crossings until `t_end` without
/// storing the trajectory.
pub fn stream_crossings<F: VectorField<3>>(
    field: &F,
    s0: State3,
    t_end: f64,
    tol: f64,
    spec: &SectionSpec,
) -> Result<Vec<CrossingEvent>> {
    crate::flow::check_tolerance(tol)?;
    let mut det = CrossingDetector::new(*spec);
    let mut events = Vec::new();
    let mut stepper = Dopri5::new(field, 0.0, s0.to_array(), tol, 1.0);
    stepper.advance_to(field, t_end, |step| {
        if let Some(e) = det.feed(step) {
            events.push(e);
        }
    })?;
    Ok(events)
}

/// Bin-averaged estimate of the quotient map along the first principal axis
/// of the crossing cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientMap {
    pub centroid: Vec3,
    pub axis: Vec3,
    pub edges: Vec<f64>,
    /// Mean projected coordinate of the points in each bin.
    pub arg_means: Vec<f64>,
    /// Mean projected coordinate of the successors; NaN for empty bins.
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
}

impl QuotientMap {
    pub fn project(&self, s: &State3) -> f64 {
        linalg::dot(
            &self.axis,
            &linalg::axpy(-1.0, &self.centroid, &s.to_array()),
        )
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Indices `i` where the map jumps by more than `threshold` between
    /// occupied neighbours `i` and `i + 1`.
    pub fn jumps(&self, threshold: f64) -> Vec<usize> {
        let occ = self.occupied();
        occ.windows(2)
            .filter(|w| (self.values[w[1]] - self.values[w[0]]).abs() > threshold)
            .map(|w| w[0])
            .collect()
    }

    fn occupied(&self) -> Vec<usize> {
        (0..self.bins()).filter(|&i| self.counts[i] > 0).collect()
    }

    /// Fraction of adjacent occupied bin pairs (away from jumps larger than
    /// `threshold`) whose secant slope exceeds 1 in modulus.
    pub fn expanding_fraction(&self, threshold: f64) -> f64 {
        let occ = self.occupied();
        let mut total = 0usize;
        let mut expanding = 0usize;
        for w in occ.windows(2) {
            let dv = self.values[w[1]] - self.values[w[0]];
            if dv.abs() > threshold {
                continue;
            }
            let dx = self.arg_means[w[1]] - self.arg_means[w[0]];
            total += 1;
            if (dv / dx).abs() > 1.0 {
                expanding += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            expanding as f64 / total as f64
        }
    }
}

/// First principal axis of a point cloud, by power iteration on the
/// covariance matrix. The sign is fixed so that the largest component is
/// positive.
fn principal_axis(points: &[Vec3]) -> (Vec3, Vec3) {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        c = linalg::axpy(1.0 / n, p, &c);
    }
    let mut cov: Mat3 = [[0.0; 3]; 3];
    for p in points {
        let d = linalg::axpy(-1.0, &c, p);
        for i in 0..3 {
            for j in 0..3 {
                cov[j][i] += d[i] * d[j] / n;
            }
        }
    }
    let mut v = [1.0, 0.5, 0.25];
    for _ in 0..500 {
        let w = linalg::mat_vec(&cov, &v);
        let nw = linalg::norm(&w);
        if nw == 0.0 {
            break;
        }
        v = linalg::scale(1.0 / nw, &w);
    }
    let k = (0..3)
        .max_by(|&a, &b| {
            v[a].abs()
                .partial_cmp(&v[b].abs())
                .unwrap_or(core::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    if v[k] < 0.0 {
        v = linalg::scale(-1.0, &v);
    }
    (c, v)
}

/// Minimum number of events accepted by [`empirical_quotient`].
pub const MIN_QUOTIENT_EVENTS: usize = 10_000;

/// Bins consecutive pairs `(ξ_k, ξ_{k+1})` of projected crossings.
pub fn empirical_quotient(events: &[CrossingEvent], bins: usize) -> Result<QuotientMap> {
    if events.len() < MIN_QUOTIENT_EVENTS {
        return Err(Error::InsufficientSample(
            "empirical quotient needs at least 10^4 events",
        ));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be positive"));
    }
    let points: Vec<Vec3> = events.iter().map(|e| e.state.to_array()).collect();
    let (centroid, axis) = principal_axis(&points);
    let xi: Vec<f64> = points
        .iter()
        .map(|p| linalg::dot(&axis, &linalg::axpy(-1.0, &centroid, p)))
        .collect();
    let lo = xi[..xi.len() - 1]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = xi[..xi.len() - 1]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut sums = alloc::vec![0.0; bins];
    let mut arg_sums = alloc::vec![0.0; bins];
    let mut counts = alloc::vec![0usize; bins];
    for w in xi.windows(2) {
        let k = if width > 0.0 {
            (((w[0] - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        sums[k] += w[1];
        arg_sums[k] += w[0];
        counts[k] += 1;
    }
    if bins > 2 {
        let interior = bins - 2;
        let empty = counts[1..bins - 1].iter().filter(|&&c| c == 0).count();
        if empty * 10 > interior {
            return Err(Error::SparseData { empty, interior });
        }
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();
    let arg_means = arg_sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();
    Ok(QuotientMap {
        centroid,
        axis,
        edges,
        arg_means,
        values,
        counts,
    })
}

/// A periodic orbit located by Newton shooting on the section.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub seed: State3,
    pub period: f64,
    pub residual: f64,
    /// Moduli of the monodromy eigenvalues, descending.
    pub multipliers: [f64; 3],
    /// Flight times of the successive returns; they sum to the period.
    pub flights: Vec<f64>,
}

const SHOOT_TOL: f64 = 1e-12;
/// Smallest field speed accepted at a periodic seed.
const MIN_ORBIT_SPEED: f64 = 1e-3;

/// `n`-th return of a section point, with the flight times.
fn n_return(p: &FlowParams, spec: &SectionSpec, s: State3, n: usize) -> Result<(State3, Vec<f64>)> {
    let mut det = CrossingDetector::new(*spec).with_reference_time(0.0);
    let mut stepper = Dopri5::new(p, 0.0, s.to_array(), SHOOT_TOL, 1.0);
    let mut flights = Vec::with_capacity(n);
    let mut last = s;
    // Generous horizon: each return of the Lorenz flow takes O(1) time.
    let horizon = 50.0 * n as f64 + 50.0;
    while flights.len() < n {
        if stepper.time() >= horizon {
            return Err(Error::NoConvergence {
                residual: f64::INFINITY,
            });
        }
        let step = stepper.step(p, horizon)?;
        // The starting point lies on the section; skip its own crossing.
        if step.t1 < 1e-3 {
            continue;
        }
        if let Some(e) = det.feed(&step) {
            flights.push(e.flight);
            last = e.state;
        }
    }
    Ok((last, flights))
}

/// First crossing of the section reached from an arbitrary state.
pub fn first_crossing(p: &FlowParams, spec: &SectionSpec, s: State3) -> Result<State3> {
    let mut det = CrossingDetector::new(*spec).with_reference_time(0.0);
    let mut stepper = Dopri5::new(p, 0.0, s.to_array(), SHOOT_TOL, 1.0);
    let horizon = 200.0;
    while stepper.time() < horizon {
        let step = stepper.step(p, horizon)?;
        if let Some(e) = det.feed(&step) {
            return Ok(e.state);
        }
    }
    Err(Error::NoConvergence {
        residual: f64::INFINITY,
    })
}

/// Newton iteration on `P^n(c) − c` in plane coordinates with a
/// finite-difference Jacobian.
pub fn find_periodic_orbit(
    p: &FlowParams,
    spec: &SectionSpec,
    seed: State3,
    n_returns: usize,
) -> Result<PeriodicOrbit> {
    if n_returns == 0 {
        return Err(Error::InvalidParameter("n_returns must be positive"));
    }
    let start = if spec.plane(&seed).abs() < PLANE_TOL {
        seed
    } else {
        first_crossing(p, spec, seed)?
    };
    let mut c = spec.to_chart(&start);
    let residual_of = |c: [f64; 2]| -> Result<([f64; 2], Vec<f64>)> {
        let (img, flights) = n_return(p, spec, spec.from_chart(c), n_returns)?;
        let ci = spec.to_chart(&img);
        Ok(([ci[0] - c[0], ci[1] - c[1]], flights))
    };
    let mut best = f64::INFINITY;
    for _ in 0..50 {
        let (g, _) = residual_of(c)?;
        let res = (g[0] * g[0] + g[1] * g[1]).sqrt();
        best = best.min(res);
        if res < 1e-9 {
            break;
        }
        let h = 1e-7 * (1.0 + c[0].abs().max(c[1].abs()));
        let (ga, _) = residual_of([c[0] + h, c[1]])?;
        let (gb, _) = residual_of([c[0], c[1] + h])?;
        let j = [
            [(ga[0] - g[0]) / h, (gb[0] - g[0]) / h],
            [(ga[1] - g[1]) / h, (gb[1] - g[1]) / h],
        ];
        let d = linalg::solve_2x2(j[0][0], j[0][1], j[1][0], j[1][1], [-g[0], -g[1]])
            .ok_or(Error::NoConvergence { residual: res })?;
        // Damp steps that leave the linear regime.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let trial = [c[0] + lambda * d[0], c[1] + lambda * d[1]];
            if let Ok((gt, _)) = residual_of(trial) {
                if (gt[0] * gt[0] + gt[1] * gt[1]).sqrt() < res {
                    c = trial;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { residual: best });
        }
    }
    let (g, flights) = residual_of(c)?;
    let residual = (g[0] * g[0] + g[1] * g[1]).sqrt();
    if !(residual < 1e-8) {
        return Err(Error::NoConvergence { residual });
    }
    let seed = spec.from_chart(c);
    // The equilibria C± lie on the default section; Newton can settle on them
    // with the local rotation time as a spurious period.
    let f = vector_field(p, &seed);
    if linalg::norm(&f.to_array()) < MIN_ORBIT_SPEED {
        return Err(Error::Domain("shooting converged onto an equilibrium"));
    }
    let period: f64 = flights.iter().sum();
    let multipliers = monodromy_moduli(p, seed, period)?;
    Ok(PeriodicOrbit {
        seed,
        period,
        residual,
        multipliers,
        flights,
    })
}

fn monodromy_moduli(p: &FlowParams, x: State3, period: f64) -> Result<[f64; 3]> {
    let mut y = [0.0; 12];
    y[..3].copy_from_slice(&x.to_array());
    y[3] = 1.0;
    y[7] = 1.0;
    y[11] = 1.0;
    let y = flow_map(&Variational { params: p }, y, period, SHOOT_TOL)?;
    let mut m: Mat3 = [[0.0; 3]; 3];
    for c in 0..3 {
        m[c].copy_from_slice(&y[3 + 3 * c..6 + 3 * c]);
    }
    Ok(eigen_moduli_3x3(&m))
}

/// Events whose `n`-th successor lies closest to them, best first.
pub fn close_returns(events: &[CrossingEvent], n: usize, count: usize) -> Vec<State3> {
    let mut scored: Vec<(f64, State3)> = events
        .windows(n + 1)
        .map(|w| (w[0].state.distance(&w[n].state), w[0].state))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    scored.into_iter().take(count).map(|(_, s)| s).collect()
}

/// `∫_0^T v(Z_t x) dt` along the orbit of `x`.
pub fn orbit_integral<V>(p: &FlowParams, x: State3, t: f64, v: V) -> Result<f64>
where
    V: Fn(&State3) -> f64,
{
    let field = |y: &[f64; 4]| {
        let s = State3::new(y[0], y[1], y[2]);
        let f = vector_field(p, &s);
        [f.x, f.y, f.z, v(&s)]
    };
    let y = flow_map(&field, [x.x, x.y, x.z, 0.0], t, SHOOT_TOL)?;
    Ok(y[3])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_motion_crosses_once() {
        let field = |_: &[f64; 3]| [0.0, 0.0, 1.0];
        let spec = SectionSpec::new(
            [0.0, 0.0, 1.0],
            27.0,
            CrossingDirection::Increasing,
            [-1.0, 1.0, -1.0, 1.0],
        )
        .unwrap();
        let traj = Trajectory::from_field(&field, State3::new(0.0, 0.0, 26.5), 2.0, 1e-10).unwrap();
        let mut det = CrossingDetector::new(spec).with_reference_time(0.0);
        let events: Vec<_> = traj.steps().iter().filter_map(|s| det.feed(s)).collect();
        assert_eq!(events.len(), 1);
        assert!((events[0].time - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chart_round_trip() {
        let spec = SectionSpec::new(
            [1.0, 2.0, 2.0],
            3.0,
            CrossingDirection::Both,
            [-1.0, 1.0, -1.0, 1.0],
        )
        .unwrap();
        let s = spec.from_chart([0.3, -1.2]);
        assert!(spec.plane(&s).abs() < 1e-14);
        let c = spec.to_chart(&s);
        assert!((c[0] - 0.3).abs() < 1e-14 && (c[1] + 1.2).abs() < 1e-14);
    }

    #[test]
    fn few_events_are_rejected() {
        assert!(matches!(
            empirical_quotient(&[], 8),
            Err(Error::InsufficientSample(_))
        ));
    }
}
