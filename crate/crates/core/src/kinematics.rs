//! Pointwise algebra of a Jacobian `Du = [[a, b], [c, d]]`
//! (`a = u¹₁, b = u¹₂, c = u²₁, d = u²₂`).
//!
//! With `p = a + d` and `s = c − b`:
//!
//! - `|Du|² + 2 det Du = p² + s²`, so `F = 1/(p² + s²)`;
//! - `r = √(p² + s²) = λ1 + λ2` and `θ = atan2(s, p)` when `det Du > 0`.

use std::f64::consts::PI;

use crate::{Error, Mat2, Result};

/// Below this `r` the rotation angle is undefined.
pub const R_DEGENERATE: f64 = 1e-14;
/// Below this `|Du|² + 2 det Du` the diffusion coefficient is undefined.
pub const DENOM_DEGENERATE: f64 = 1e-20;

/// Trace-like and rotation-like combinations `(p, s) = (a + d, c − b)`.
#[inline]
pub fn trace_rotation(du: &Mat2) -> (f64, f64) {
    (du[(0, 0)] + du[(1, 1)], du[(1, 0)] - du[(0, 1)])
}

/// Wraps an angle into `(−π, π]`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Closed-form singular value decomposition of a 2×2 matrix.
///
/// `domain_frame` has columns `e1, e2` and `target_frame` columns `v1, v2`
/// with `Du e_i = λ_i v_i`; both frames are orthonormal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Svd2 {
    pub lambda1: f64,
    pub lambda2: f64,
    pub domain_frame: Mat2,
    pub target_frame: Mat2,
}

impl Svd2 {
    pub fn reconstruct(&self) -> Mat2 {
        self.target_frame * Mat2::from_diagonal(&nalgebra::Vector2::new(self.lambda1, self.lambda2))
            * self.domain_frame.transpose()
    }
}

fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Singular values `λ1 ≤ λ2` and frames of `du`; works for singular input.
pub fn svd2(du: &Mat2) -> Svd2 {
    let (a, b, c, d) = (du[(0, 0)], du[(0, 1)], du[(1, 0)], du[(1, 1)]);
    let e = 0.5 * (a + d);
    let f = 0.5 * (a - d);
    let g = 0.5 * (c + b);
    let h = 0.5 * (c - b);
    let q = e.hypot(h);
    let r = f.hypot(g);
    let big = q + r;
    // du = R(φ) · diag(big, q − r) · R(ψ)
    let a1 = g.atan2(f);
    let a2 = h.atan2(e);
    let psi = 0.5 * (a2 - a1);
    let phi = 0.5 * (a2 + a1);
    let det = a * d - b * c;
    // |det|/λ2 avoids the cancellation in q − r.
    let small = if big > 0.0 { det.abs() / big } else { 0.0 };
    let sign = if q >= r { 1.0 } else { -1.0 };

    let u = rotation(phi);
    let v = rotation(psi).transpose();
    Svd2 {
        lambda1: small,
        lambda2: big,
        domain_frame: Mat2::from_columns(&[v.column(1).into_owned(), v.column(0).into_owned()]),
        target_frame: Mat2::from_columns(&[(u.column(1) * sign).into_owned(), u.column(0).into_owned()]),
    }
}

/// The polar quantities `r = λ1 + λ2` and `θ ∈ (−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub r: f64,
    pub theta: f64,
}

/// `r cos θ = u¹₁ + u²₂`, `r sin θ = u²₁ − u¹₂` on the orientation-preserving
/// branch.
pub fn polar_decompose(du: &Mat2) -> Result<Polar> {
    let det = du.determinant();
    if !(det > 0.0) {
        return Err(Error::Orientation(det));
    }
    let (p, s) = trace_rotation(du);
    let r = p.hypot(s);
    if r < R_DEGENERATE {
        return Err(Error::Degenerate("r vanishes, θ undefined"));
    }
    Ok(Polar {
        r,
        theta: wrap_angle(s.atan2(p)),
    })
}

/// `F = 1/(|Du|² + 2 det Du)`.
pub fn diffusion_coefficient(du: &Mat2) -> Result<f64> {
    let det = du.determinant();
    if !(det > 0.0) {
        return Err(Error::Orientation(det));
    }
    let denom = du.norm_squared() + 2.0 * det;
    if denom < DENOM_DEGENERATE {
        return Err(Error::Degenerate("|Du|² + 2 det Du vanishes"));
    }
    Ok(1.0 / denom)
}

/// `h = DuᵀDu`.
pub fn induced_metric(du: &Mat2) -> Mat2 {
    du.transpose() * du
}

/// Everything the flow and diagnostics need at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointKinematics {
    pub du: Mat2,
    pub lambda1: f64,
    pub lambda2: f64,
    pub r: f64,
    pub theta: f64,
    pub f: f64,
    pub h: Mat2,
    pub det: f64,
}

impl PointKinematics {
    /// Computes the full package. `r`, `θ` and `F` use the closed forms in
    /// `(p, s)` even when `det ≤ 0`, where they no longer equal `λ1 + λ2`;
    /// callers flag that case through `det`.
    pub fn new(du: Mat2) -> Self {
        let svd = svd2(&du);
        let (p, s) = trace_rotation(&du);
        let r = p.hypot(s);
        Self {
            du,
            lambda1: svd.lambda1,
            lambda2: svd.lambda2,
            r,
            theta: wrap_angle(s.atan2(p)),
            f: 1.0 / (r * r),
            h: induced_metric(&du),
            det: du.determinant(),
        }
    }
}
