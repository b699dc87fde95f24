//! The classical Lorenz flow: vector field, integration, equilibrium data and
//! tangent-flow diagnostics.

mod integrator;
mod tangent;

pub use integrator::{check_tolerance, flow_map, DenseSolution, DenseStep, Dopri5, VectorField};
pub use tangent::{
    foliation_at_origin, foliation_criterion, lyapunov_exponents, FoliationReport, FoliationSample,
    Variational,
};

use crate::error::{Error, Result};
use crate::linalg::Mat3;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Burn-in applied before any attractor statistic.
pub const BURN_IN: f64 = 50.0;

/// Coefficients `(σ, ρ, β)` of the Lorenz equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self::CLASSICAL
    }
}

impl FlowParams {
    pub const CLASSICAL: FlowParams = FlowParams {
        sigma: 10.0,
        rho: 28.0,
        beta: 8.0 / 3.0,
    };

    pub fn new(sigma: f64, rho: f64, beta: f64) -> Result<Self> {
        if !(sigma > 0.0 && rho > 0.0 && beta > 0.0) || !(sigma + rho + beta).is_finite() {
            return Err(Error::InvalidParameter(
                "sigma, rho and beta must be positive",
            ));
        }
        Ok(FlowParams { sigma, rho, beta })
    }

    /// Looks up a named preset; only `classical` is known.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "classical" => Some(Self::CLASSICAL),
            _ => None,
        }
    }

    /// The (constant) divergence of the field, `-(σ + 1 + β)`.
    pub fn divergence(&self) -> f64 {
        -(self.sigma + 1.0 + self.beta)
    }

    /// Squared radius of a ball around `(0, 0, ρ + σ)` that absorbs every orbit.
    ///
    /// `V = x² + y² + (z − ρ − σ)²` decreases outside the ellipsoid
    /// `σx² + y² + β(z − c)² = βc²` with `c = (ρ + σ)/2`; bounding `V` on the
    /// ellipsoid coordinate by coordinate gives the radius.
    pub fn absorbing_radius_sq(&self) -> f64 {
        let c = 0.5 * (self.rho + self.sigma);
        self.beta * c * c / self.sigma + self.beta * c * c + 4.0 * c * c
    }
}

/// A point of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        State3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        State3::new(a[0], a[1], a[2])
    }

    pub fn distance(&self, other: &State3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

pub fn vector_field(p: &FlowParams, s: &State3) -> State3 {
    State3::new(
        p.sigma * (s.y - s.x),
        p.rho * s.x - s.y - s.x * s.z,
        s.x * s.y - p.beta * s.z,
    )
}

/// Jacobian of the field at `s` (column-major).
pub fn jacobian(p: &FlowParams, s: &State3) -> Mat3 {
    [
        [-p.sigma, p.rho - s.z, s.y],
        [p.sigma, -1.0, s.x],
        [0.0, -s.x, -p.beta],
    ]
}

impl VectorField<3> for FlowParams {
    fn eval(&self, y: &[f64; 3]) -> [f64; 3] {
        vector_field(self, &State3::from_array(*y)).to_array()
    }
}

/// Eigenvalue data of the singularity at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSpectrum {
    pub lambda_u: f64,
    pub lambda_s: f64,
    pub lambda_ss: f64,
    /// Uniform bound on minus the divergence.
    pub delta: f64,
}

impl EquilibriumSpectrum {
    /// Checks the Lorenz-like ordering and strong dissipativity.
    pub fn new(lambda_u: f64, lambda_s: f64, lambda_ss: f64, delta: f64) -> Result<Self> {
        if !(lambda_ss < lambda_s && lambda_s < 0.0 && -lambda_s < lambda_u) {
            return Err(Error::NotLorenzLike(
                "eigenvalues violate λss < λs < 0 < −λs < λu",
            ));
        }
        if !(lambda_u + lambda_ss < lambda_s) {
            return Err(Error::NotLorenzLike(
                "λu + λss ≥ λs (not strongly dissipative)",
            ));
        }
        if !(delta > 0.0) {
            return Err(Error::NotLorenzLike("divergence is not negative"));
        }
        Ok(EquilibriumSpectrum {
            lambda_u,
            lambda_s,
            lambda_ss,
            delta,
        })
    }

    pub fn strongly_dissipative(&self) -> bool {
        self.lambda_u + self.lambda_ss < self.lambda_s
    }

    /// `λss + (1+ε)λu − λs`, the foliation exponent at the singularity.
    pub fn foliation_exponent(&self, eps: f64) -> f64 {
        self.lambda_ss + (1.0 + eps) * self.lambda_u - self.lambda_s
    }
}

/// Spectrum of the Jacobian at the origin.
///
/// The z-direction decouples with eigenvalue `−β`; the xy-block has
/// eigenvalues `(−(σ+1) ± √((σ−1)² + 4σρ))/2`.
pub fn equilibrium_spectrum(p: &FlowParams) -> Result<EquilibriumSpectrum> {
    let disc = (p.sigma - 1.0).powi(2) + 4.0 * p.sigma * p.rho;
    if disc < 0.0 {
        return Err(Error::NotLorenzLike("complex eigenvalues at the origin"));
    }
    let root = disc.sqrt();
    let mut eig = [
        0.5 * (-(p.sigma + 1.0) + root),
        -p.beta,
        0.5 * (-(p.sigma + 1.0) - root),
    ];
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    EquilibriumSpectrum::new(eig[0], eig[1], eig[2], -p.divergence())
}

/// A forward solution of the Lorenz equations with dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    inner: DenseSolution<3>,
}

impl Trajectory {
    /// Integrates an arbitrary field on `R^3`; used for fixtures as well.
    pub fn from_field<F: VectorField<3>>(
        field: &F,
        s0: State3,
        t_end: f64,
        tol: f64,
    ) -> Result<Self> {
        if !s0.is_finite() {
            return Err(Error::Domain("initial state must be finite"));
        }
        Ok(Trajectory {
            inner: DenseSolution::integrate(field, s0.to_array(), t_end, tol)?,
        })
    }

    pub fn times(&self) -> &[f64] {
        self.inner.times()
    }

    pub fn len(&self) -> usize {
        self.inner.times().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn state(&self, i: usize) -> State3 {
        State3::from_array(self.inner.states()[i])
    }

    pub fn states(&self) -> impl Iterator<Item = State3> + '_ {
        self.inner.states().iter().map(|a| State3::from_array(*a))
    }

    pub fn final_state(&self) -> State3 {
        self.state(self.len() - 1)
    }

    pub fn t_end(&self) -> f64 {
        self.inner.t_end()
    }

    pub fn steps(&self) -> &[DenseStep<3>] {
        self.inner.steps()
    }

    /// Dense evaluation inside `[0, t_end]`.
    pub fn eval(&self, t: f64) -> Option<State3> {
        self.inner.eval(t).map(State3::from_array)
    }
}

pub fn integrate(p: &FlowParams, s0: State3, t_end: f64, tol: f64) -> Result<Trajectory> {
    Trajectory::from_field(p, s0, t_end, tol)
}

/// `Z_t(s)` for either sign of `t`.
pub fn flow(p: &FlowParams, s: State3, t: f64, tol: f64) -> Result<State3> {
    flow_map(p, s.to_array(), t, tol).map(State3::from_array)
}

/// Advances `s` by the burn-in time so that it lies near the attractor.
pub fn burn_in(p: &FlowParams, s: State3) -> Result<State3> {
    flow(p, s, BURN_IN, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_examples() {
        let p = FlowParams::CLASSICAL;
        assert_eq!(vector_field(&p, &State3::default()), State3::default());
        let v = vector_field(&p, &State3::new(1.0, 1.0, 1.0));
        assert_eq!(v.x, 0.0);
        assert_eq!(v.y, 26.0);
        assert!((v.z + 5.0 / 3.0).abs() < 1e-15);
        assert!((p.divergence() + 41.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn classical_spectrum() {
        let s = equilibrium_spectrum(&FlowParams::CLASSICAL).unwrap();
        assert_eq!(s.lambda_s, -8.0 / 3.0);
        assert!((s.lambda_u - (-11.0 + 1201f64.sqrt()) / 2.0).abs() < 1e-13);
        assert!((s.lambda_u + s.lambda_ss + 11.0).abs() < 1e-12);
        assert!(s.strongly_dissipative());
    }

    #[test]
    fn subcritical_rho_is_not_lorenz_like() {
        // ρ < 1: the origin is a sink
        let p = FlowParams::new(10.0, 0.5, 8.0 / 3.0).unwrap();
        assert!(matches!(
            equilibrium_spectrum(&p),
            Err(Error::NotLorenzLike(_))
        ));
        // large β puts the z eigenvalue below the strong stable one
        let p = FlowParams::new(10.0, 28.0, 30.0).unwrap();
        assert!(equilibrium_spectrum(&p).is_err());
    }

    #[test]
    fn zero_horizon_gives_single_knot() {
        let tr = integrate(
            &FlowParams::CLASSICAL,
            State3::new(1.0, 2.0, 3.0),
            0.0,
            1e-10,
        )
        .unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.final_state(), State3::new(1.0, 2.0, 3.0));
    }
}
