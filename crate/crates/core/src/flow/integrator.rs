//! Dormand–Prince 5(4) integrator with continuous (dense) output.

use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// An autonomous vector field on `R^N`.
pub trait VectorField<const N: usize> {
    fn eval(&self, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> VectorField<N> for F
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    fn eval(&self, y: &[f64; N]) -> [f64; N] {
        self(y)
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output (Hairer's CONTD5 coefficients).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step together with its 4th-order interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    /// Evaluates the interpolant; the knots themselves are returned verbatim.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if t == self.t0 {
            return self.y0;
        }
        if t == self.t1 {
            return self.y1;
        }
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s1 = 1.0 - s;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.y0[i]
                + s * (self.rcont[0][i]
                    + s1 * (self.rcont[1][i] + s * (self.rcont[2][i] + s1 * self.rcont[3][i])));
        }
        out
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 {
            (self.t0, self.t1)
        } else {
            (self.t1, self.t0)
        };
        t >= lo && t <= hi
    }
}

/// Adaptive stepper; the error tolerance is used both absolutely and relatively.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    tol: f64,
    direction: f64,
    accepted: u64,
    rejected: u64,
}

pub fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 1e-14 && tol < 1e-3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "tolerance must lie in (1e-14, 1e-3)",
        ))
    }
}

impl<const N: usize> Dopri5<N> {
    /// Creates a stepper integrating forward (`direction > 0`) or backward.
    pub fn new<F: VectorField<N>>(
        field: &F,
        t0: f64,
        y0: [f64; N],
        tol: f64,
        direction: f64,
    ) -> Self {
        let direction = if direction < 0.0 { -1.0 } else { 1.0 };
        let k1 = field.eval(&y0);
        let mut stepper = Dopri5 {
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            tol,
            direction,
            accepted: 0,
            rejected: 0,
        };
        stepper.h = direction * stepper.initial_step(field);
        stepper
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn accepted_steps(&self) -> u64 {
        self.accepted
    }

    pub fn rejected_steps(&self) -> u64 {
        self.rejected
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.tol + self.tol * a.abs().max(b.abs())
    }

    fn initial_step<F: VectorField<N>>(&self, field: &F) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], 0.0);
            d0 += (self.y[i] / sk).powi(2);
            d1 += (self.k1[i] / sk).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = self.y[i] + self.direction * h0 * self.k1[i];
        }
        let f1 = field.eval(&y1);
        let mut d2 = 0.0;
        for i in 0..N {
            let sk = self.scale(self.y[i], 0.0);
            d2 += ((f1[i] - self.k1[i]) / sk).powi(2);
        }
        let d2 = (d2 / N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    /// Takes one accepted step without passing `t_limit`.
    pub fn step<F: VectorField<N>>(&mut self, field: &F, t_limit: f64) -> Result<DenseStep<N>> {
        let mut fac_max = 10.0;
        loop {
            let remaining = (t_limit - self.t) * self.direction;
            if remaining <= 0.0 {
                return Err(Error::Domain("stepper already at its limit"));
            }
            let mut h = self.h;
            let mut last = false;
            if h.abs() >= remaining {
                h = self.direction * remaining;
                last = true;
            }
            if h.abs() <= 1e-14 * self.t.abs().max(1.0) && !last {
                return Err(Error::Stiffness { t: self.t });
            }
            let y = &self.y;
            let k1 = &self.k1;
            let mut tmp = [0.0; N];
            for i in 0..N {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            let k2 = field.eval(&tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = field.eval(&tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = field.eval(&tmp);
            for i in 0..N {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = field.eval(&tmp);
            for i in 0..N {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let k6 = field.eval(&tmp);
            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let k7 = field.eval(&y_new);
            let mut err = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sk = self.scale(y[i], y_new[i]);
                err += (e / sk).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                self.rejected += 1;
                self.h *= 0.2;
                fac_max = 1.0;
                continue;
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, fac_max);
            if err <= 1.0 {
                let mut rcont = [[0.0; N]; 4];
                for i in 0..N {
                    let dy = y_new[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    rcont[0][i] = dy;
                    rcont[1][i] = bspl;
                    rcont[2][i] = dy - h * k7[i] - bspl;
                    rcont[3][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let t1 = if last { t_limit } else { self.t + h };
                let dense = DenseStep {
                    t0: self.t,
                    t1,
                    y0: self.y,
                    y1: y_new,
                    rcont,
                };
                self.t = t1;
                self.y = y_new;
                self.k1 = k7;
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                self.accepted += 1;
                for v in self.y.iter() {
                    if !v.is_finite() {
                        return Err(Error::Escape { t: self.t });
                    }
                }
                return Ok(dense);
            }
            self.rejected += 1;
            self.h = h * fac;
            fac_max = 1.0;
        }
    }

    /// Steps until `t_target`, handing every accepted step to `visit`.
    pub fn advance_to<F, V>(&mut self, field: &F, t_target: f64, mut visit: V) -> Result<()>
    where
        F: VectorField<N>,
        V: FnMut(&DenseStep<N>),
    {
        while (t_target - self.t) * self.direction > 0.0 {
            let step = self.step(field, t_target)?;
            visit(&step);
        }
        Ok(())
    }
}

/// Value of the flow of `field` at time `t` (either sign) starting from `y0`.
pub fn flow_map<const N: usize, F: VectorField<N>>(
    field: &F,
    y0: [f64; N],
    t: f64,
    tol: f64,
) -> Result<[f64; N]> {
    check_tolerance(tol)?;
    if t == 0.0 {
        return Ok(y0);
    }
    let mut stepper = Dopri5::new(field, 0.0, y0, tol, t);
    stepper.advance_to(field, t, |_| {})?;
    Ok(*stepper.state())
}

/// A forward solution stored with its dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn integrate<F: VectorField<N>>(
        field: &F,
        y0: [f64; N],
        t_end: f64,
        tol: f64,
    ) -> Result<Self> {
        check_tolerance(tol)?;
        if !(t_end >= 0.0) {
            return Err(Error::Domain("integration horizon must be nonnegative"));
        }
        let mut times = Vec::from([0.0]);
        let mut states = Vec::from([y0]);
        let mut steps = Vec::new();
        if t_end > 0.0 {
            let mut stepper = Dopri5::new(field, 0.0, y0, tol, 1.0);
            stepper.advance_to(field, t_end, |s| {
                times.push(s.t1);
                states.push(s.y1);
                steps.push(s.clone());
            })?;
        }
        Ok(DenseSolution {
            times,
            states,
            steps,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    pub fn steps(&self) -> &[DenseStep<N>] {
        &self.steps
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Dense evaluation; knot times return the stored knot states exactly.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap_or(core::cmp::Ordering::Less))
        {
            Ok(i) => Some(self.states[i]),
            Err(0) => None,
            Err(i) if i >= self.times.len() => None,
            Err(i) => Some(self.steps[i - 1].eval(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_is_accurate() {
        let field = |y: &[f64; 1]| [y[0]];
        let y = flow_map(&field, [1.0], 2.0, 1e-12).unwrap();
        assert!((y[0] - 2.0f64.exp()).abs() < 1e-9);
        let back = flow_map(&field, y, -2.0, 1e-12).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_output_interpolates_harmonic_oscillator() {
        let field = |y: &[f64; 2]| [y[1], -y[0]];
        let sol = DenseSolution::integrate(&field, [0.0, 1.0], 10.0, 1e-10).unwrap();
        for k in 0..1000 {
            let t = 0.01 * k as f64 + 0.0037;
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-7, "t={t}");
        }
        for (t, y) in sol.times().iter().zip(sol.states()) {
            assert_eq!(sol.eval(*t).unwrap(), *y);
        }
    }

    #[test]
    fn tolerance_outside_range_is_rejected() {
        let field = |y: &[f64; 1]| [y[0]];
        assert!(flow_map(&field, [1.0], 1.0, 1e-2).is_err());
        assert!(flow_map(&field, [1.0], 1.0, 1e-15).is_err());
    }
}
