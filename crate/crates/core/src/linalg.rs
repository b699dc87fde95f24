//! Small fixed-size linear algebra used by the tangent-flow code.
//!
//! Vectors are `[f64; 3]`, matrices are stored as three *columns* so that a
//! tangent frame `[v1, v2, v3]` is a matrix whose columns evolve under the
//! variational equation.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

pub type Vec3 = [f64; 3];
/// Column-major 3x3 matrix.
pub type Mat3 = [Vec3; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(alpha: f64, x: &Vec3, y: &Vec3) -> Vec3 {
    [
        y[0] + alpha * x[0],
        y[1] + alpha * x[1],
        y[2] + alpha * x[2],
    ]
}

#[inline]
pub fn scale(alpha: f64, x: &Vec3) -> Vec3 {
    [alpha * x[0], alpha * x[1], alpha * x[2]]
}

pub fn normalized(x: &Vec3) -> Vec3 {
    scale(1.0 / norm(x), x)
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `m * x` for a column-major matrix.
pub fn mat_vec(m: &Mat3, x: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (col, &xc) in m.iter().zip(x.iter()) {
        for r in 0..3 {
            out[r] += col[r] * xc;
        }
    }
    out
}

/// `a * b`.
pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    [mat_vec(a, &b[0]), mat_vec(a, &b[1]), mat_vec(a, &b[2])]
}

pub fn det(m: &Mat3) -> f64 {
    dot(&m[0], &cross(&m[1], &m[2]))
}

pub fn trace(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Modified Gram–Schmidt on the columns of `m`.
///
/// Returns the orthonormal frame and the upper-triangular factor
/// (`r[j][i]` is the coefficient of `q_i` in column `j`, `i <= j`).
pub fn qr(m: &Mat3) -> (Mat3, Mat3) {
    let mut q = *m;
    let mut r = [[0.0; 3]; 3];
    for j in 0..3 {
        for i in 0..j {
            let c = dot(&q[i], &q[j]);
            r[j][i] = c;
            q[j] = axpy(-c, &q[i], &q[j]);
        }
        let n = norm(&q[j]);
        r[j][j] = n;
        q[j] = scale(1.0 / n, &q[j]);
    }
    (q, r)
}

/// Solves `r x = b` for upper-triangular `r` in the layout produced by [`qr`].
pub fn solve_upper(r: &Mat3, b: &Vec3) -> Vec3 {
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = b[i];
        for j in (i + 1)..3 {
            s -= r[j][i] * x[j];
        }
        x[i] = s / r[i][i];
    }
    x
}

/// Solves `r^T x = b` for upper-triangular `r` in the layout produced by [`qr`].
pub fn solve_upper_transposed(r: &Mat3, b: &Vec3) -> Vec3 {
    let mut x = [0.0; 3];
    for i in 0..3 {
        let mut s = b[i];
        for j in 0..i {
            s -= r[i][j] * x[j];
        }
        x[i] = s / r[i][i];
    }
    x
}

/// Singular values `(max, min)` of the 3x2 matrix with columns `a`, `b`.
pub fn singular_values_3x2(a: &Vec3, b: &Vec3) -> (f64, f64) {
    // Orthonormalize first so that strongly graded columns keep precision.
    let na = norm(a);
    let qa = scale(1.0 / na, a);
    let c = dot(&qa, b);
    let perp = axpy(-c, &qa, b);
    let d = norm(&perp);
    // B = Q [[na, c], [0, d]]
    let (smax, smin) = singular_values_upper_2x2(na, c, d);
    (smax, smin)
}

/// Singular values of `[[a, b], [0, d]]`.
pub fn singular_values_upper_2x2(a: f64, b: f64, d: f64) -> (f64, f64) {
    let det = (a * d).abs();
    let fro2 = a * a + b * b + d * d;
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((fro2 + disc) / 2.0).sqrt();
    let smin = if smax > 0.0 { det / smax } else { 0.0 };
    (smax, smin)
}

/// Moduli of the eigenvalues of a 2x2 matrix `[[a, b], [c, d]]`, descending.
pub fn eigen_moduli_2x2(a: f64, b: f64, c: f64, d: f64) -> [f64; 2] {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = tr * tr - 4.0 * det;
    let mut out = if disc >= 0.0 {
        let s = disc.sqrt();
        // Stable quadratic roots.
        let q = -0.5 * (tr + tr.signum() * s);
        let q = if q == 0.0 { -0.5 * s } else { q };
        let r1 = -q;
        let r2 = if r1 != 0.0 { det / r1 } else { 0.0 };
        [r1.abs(), r2.abs()]
    } else {
        let m = det.abs().sqrt();
        [m, m]
    };
    if out[0] < out[1] {
        out.swap(0, 1);
    }
    out
}

/// Moduli of the eigenvalues of a general real 3x3 matrix, descending.
///
/// The characteristic cubic always has one real root; it is located by
/// bracketing bisection followed by Newton polishing, then deflated.
pub fn eigen_moduli_3x3(m: &Mat3) -> [f64; 3] {
    let at = |r: usize, c: usize| m[c][r];
    let tr = trace(m);
    let minors = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0) + at(0, 0) * at(2, 2)
        - at(0, 2) * at(2, 0)
        + at(1, 1) * at(2, 2)
        - at(1, 2) * at(2, 1);
    let dt = det(m);
    // p(x) = x^3 - tr x^2 + minors x - det
    let p = |x: f64| ((x - tr) * x + minors) * x - dt;
    let dp = |x: f64| (3.0 * x - 2.0 * tr) * x + minors;
    let bound = 1.0 + tr.abs().max(minors.abs()).max(dt.abs());
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut root = 0.5 * (lo + hi);
    for _ in 0..5 {
        let d = dp(root);
        if d == 0.0 {
            break;
        }
        let step = p(root) / d;
        if !step.is_finite() {
            break;
        }
        root -= step;
    }
    // Deflate: x^2 + b x + c with b = root - tr, c = det / root.
    let b = root - tr;
    let c = if root != 0.0 {
        dt / root
    } else {
        minors - b * root
    };
    let rest = eigen_moduli_2x2(0.0, -c, 1.0, -b);
    let mut all = [root.abs(), rest[0], rest[1]];
    all.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    all
}

/// Solves the 2x2 system `[[a, b], [c, d]] x = r`.
pub fn solve_2x2(a: f64, b: f64, c: f64, d: f64, r: [f64; 2]) -> Option<[f64; 2]> {
    let det = a * d - b * c;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([(d * r[0] - b * r[1]) / det, (a * r[1] - c * r[0]) / det])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs() {
        let m: Mat3 = [[2.0, 1.0, 0.5], [1.0, 3.0, -1.0], [0.0, 1.0, 4.0]];
        let (q, r) = qr(&m);
        for j in 0..3 {
            let mut col = [0.0; 3];
            for i in 0..=j {
                col = axpy(r[j][i], &q[i], &col);
            }
            for k in 0..3 {
                assert!((col[k] - m[j][k]).abs() < 1e-12);
            }
        }
        assert!(dot(&q[0], &q[1]).abs() < 1e-14);
        let b = [1.0, 2.0, 3.0];
        let x = solve_upper(&r, &b);
        let y = solve_upper_transposed(&r, &b);
        for i in 0..3 {
            let mut s = 0.0;
            let mut t = 0.0;
            for j in 0..3 {
                s += r[j][i] * x[j];
                t += r[i][j] * y[j];
            }
            assert!((s - b[i]).abs() < 1e-12);
            assert!((t - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_moduli_of_diagonal_and_rotation() {
        let m: Mat3 = [[3.0, 0.0, 0.0], [0.0, -0.5, 0.0], [0.0, 0.0, 1e-9]];
        let e = eigen_moduli_3x3(&m);
        assert!((e[0] - 3.0).abs() < 1e-12);
        assert!((e[1] - 0.5).abs() < 1e-12);
        assert!((e[2] - 1e-9).abs() < 1e-15);
        // rotation by 90 degrees in the xy-plane, scaled by 2, z-eigenvalue 1
        let r: Mat3 = [[0.0, 2.0, 0.0], [-2.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let e = eigen_moduli_3x3(&r);
        assert!((e[0] - 2.0).abs() < 1e-12 && (e[1] - 2.0).abs() < 1e-12);
        assert!((e[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_of_orthogonal_columns() {
        let (smax, smin) = singular_values_3x2(&[0.0, 3.0, 0.0], &[0.0, 0.0, 0.25]);
        assert!((smax - 3.0).abs() < 1e-14);
        assert!((smin - 0.25).abs() < 1e-14);
    }
}
