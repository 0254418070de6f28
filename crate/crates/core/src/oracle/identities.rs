//! Pointwise identities behind the singular-value bounds and the `(r, θ)`
//! system, evaluated on exact jets by hand-derived chain rules.
//!
//! With `p = u¹₁ + u²₂` and `s = u²₁ − u¹₂`, `|Du|² + 2 det Du = p² + s²`,
//! so `F = (p² + s²)⁻¹` and `∂_i F = −2F²(p ∂_i p + s ∂_i s)`.

use super::jet::{Jet, MinimizingJet};
use crate::kinematics::{polar_decompose, trace_rotation, R_DEGENERATE};
use crate::{Error, Mat2, Result};

/// Gap `λ2 − λ1` below which a minimising jet counts as Case 1.
pub const CASE1_GAP: f64 = 1e-12;

struct FirstOrder {
    f: f64,
    /// `∂_i F`
    df: [f64; 2],
    /// `∂_i p`, `∂_i s`
    dp: [f64; 2],
    ds: [f64; 2],
    p: f64,
    s: f64,
}

fn first_order(jet: &Jet) -> Result<FirstOrder> {
    let (p, s) = trace_rotation(&jet.du);
    let r2 = p * p + s * s;
    if r2.sqrt() < R_DEGENERATE {
        return Err(Error::Degenerate("r vanishes"));
    }
    let f = 1.0 / r2;
    let d = &jet.d2u;
    let dp: [f64; 2] = std::array::from_fn(|i| d[0][0][i] + d[1][1][i]);
    let ds: [f64; 2] = std::array::from_fn(|i| d[1][0][i] - d[0][1][i]);
    let df = std::array::from_fn(|i| -2.0 * f * f * (p * dp[i] + s * ds[i]));
    Ok(FirstOrder { f, df, dp, ds, p, s })
}

/// `∂_t u^α_i = ∂_i(F Δu^α)`, indexed `[α][i]`.
fn velocity_gradient(jet: &Jet, fo: &FirstOrder) -> [[f64; 2]; 2] {
    let lap = jet.laplacian();
    let dlap = jet.laplacian_gradient();
    std::array::from_fn(|a| std::array::from_fn(|i| fo.df[i] * lap[a] + fo.f * dlap[a][i]))
}

fn require_orientation(jet: &Jet) -> Result<()> {
    let det = jet.du.determinant();
    if det > 0.0 {
        Ok(())
    } else {
        Err(Error::Orientation(det))
    }
}

/// Reaction term of the evolution of `h = DuᵀDu` under `∂t u = FΔu`:
///
/// ```text
/// N_ij = −2F (u^α_{ki} u^α_{kj} + 2 u^k_{k(i} u^α_{j)} Δu^α / (λ1 + λ2))
/// ```
///
/// The contraction `u^k_{ki}` is taken in target coordinates rotated so that
/// `Du` has no rotational part, where it equals `∂_i(λ1 + λ2)`. `N` is
/// invariant under target rotations, so no back-transformation is needed.
pub fn reaction_term(jet: &Jet) -> Result<Mat2> {
    require_orientation(jet)?;
    let polar = polar_decompose(&jet.du)?;
    let aligned = jet.rotate(-polar.theta, 0.0);
    contracted_reaction(&aligned, polar.r)
}

/// The same contraction without aligning the target frame first.
#[cfg(test)]
pub(crate) fn reaction_term_literal(jet: &Jet) -> Result<Mat2> {
    let polar = polar_decompose(&jet.du)?;
    contracted_reaction(jet, polar.r)
}

fn contracted_reaction(jet: &Jet, r: f64) -> Result<Mat2> {
    let f = 1.0 / (r * r);
    let d = &jet.d2u;
    let du = &jet.du;
    let lap = jet.laplacian();
    let trace_d: [f64; 2] = std::array::from_fn(|i| d[0][0][i] + d[1][1][i]);
    let t = Mat2::from_fn(|i, j| trace_d[i] * (0..2).map(|a| du[(a, j)] * lap[a]).sum::<f64>());
    let sym = (t + t.transpose()) * 0.5;
    let quad = Mat2::from_fn(|i, j| {
        let mut acc = 0.0;
        for a in 0..2 {
            for k in 0..2 {
                acc += d[a][k][i] * d[a][k][j];
            }
        }
        acc
    });
    Ok((quad + sym * (2.0 / r)) * (-2.0 * f))
}

/// Terms of `∂t S = F ΔS + N` for `S = h − m²δ`, at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionTerms {
    pub f: f64,
    /// `∂t h`
    pub dt_h: Mat2,
    /// `Δh`
    pub lap_h: Mat2,
    pub n: Mat2,
}

impl EvolutionTerms {
    pub fn compute(jet: &Jet) -> Result<Self> {
        require_orientation(jet)?;
        let fo = first_order(jet)?;
        let g = velocity_gradient(jet, &fo);
        let du = &jet.du;
        let d = &jet.d2u;
        let dlap = jet.laplacian_gradient();
        let dt_h = Mat2::from_fn(|i, j| (0..2).map(|a| g[a][i] * du[(a, j)] + du[(a, i)] * g[a][j]).sum());
        let lap_h = Mat2::from_fn(|i, j| {
            let mut acc = 0.0;
            for a in 0..2 {
                acc += dlap[a][i] * du[(a, j)] + du[(a, i)] * dlap[a][j];
                for k in 0..2 {
                    acc += 2.0 * d[a][i][k] * d[a][j][k];
                }
            }
            acc
        });
        Ok(Self {
            f: fo.f,
            dt_h,
            lap_h,
            n: reaction_term(jet)?,
        })
    }

    /// Largest entry among the three terms, for relative residuals.
    pub fn scale(&self) -> f64 {
        self.dt_h.amax().max(self.f * self.lap_h.amax()).max(self.n.amax())
    }
}

/// Residuals of `∂t S = F ΔS + N` for the lower-bound tensor `S = h − m²δ`
/// and of `∂t S = F ΔS − N` for the upper-bound tensor `S = M²δ − h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SEvolution {
    pub lower: f64,
    pub upper: f64,
    pub scale: f64,
}

impl SEvolution {
    pub fn residual(&self) -> f64 {
        self.lower.max(self.upper)
    }

    pub fn relative(&self) -> f64 {
        relative(self.residual(), self.scale)
    }
}

pub fn verify_evolution_of_s(jet: &Jet) -> Result<SEvolution> {
    let t = EvolutionTerms::compute(jet)?;
    let lower = (t.dt_h - t.lap_h * t.f - t.n).amax();
    let (dt_upper, lap_upper, n_upper) = (-t.dt_h, -t.lap_h, -t.n);
    let upper = (dt_upper - lap_upper * t.f - n_upper).amax();
    Ok(SEvolution {
        lower,
        upper,
        scale: t.scale(),
    })
}

pub(crate) fn relative(residual: f64, scale: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else {
        residual / scale.max(f64::MIN_POSITIVE)
    }
}

/// `∂_k S₁₂` and `S₂₂` at a minimising jet, from `∂_k h_ij = u^α_{ik} u^α_j + u^α_i u^α_{jk}`.
fn case_data(jet: &MinimizingJet) -> ([f64; 2], f64) {
    let j = jet.to_jet();
    let d = &j.d2u;
    let du = &j.du;
    let ds12 = std::array::from_fn(|k| (0..2).map(|a| d[a][0][k] * du[(a, 1)] + du[(a, 0)] * d[a][1][k]).sum());
    let s22 = jet.lambda2 * jet.lambda2 - jet.lambda1 * jet.lambda1;
    (ds12, s22)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QValues {
    pub closed_form: f64,
    pub by_search: f64,
    /// `N₁₁`
    pub reaction: f64,
    /// Maximiser `Γ²_k`.
    pub gamma: [f64; 2],
}

/// `Q = N₁₁ + 2F sup_Γ (2Γ²_k ∂_kS₁₂ − Γ²_kΓ²_k S₂₂)` at a minimising jet
/// with distinct singular values, together with the closed form
/// `2λ1²F/(λ2² − λ1²) · ((u²₁₁)² + (u²₁₂ + u¹₂₂)²)`.
pub fn q_quantity(jet: &MinimizingJet) -> Result<QValues> {
    if jet.lambda2 - jet.lambda1 <= CASE1_GAP {
        return Err(Error::InvalidJet("equal singular values; use q_case1"));
    }
    let (l1, l2) = (jet.lambda1, jet.lambda2);
    let f = 1.0 / ((l1 + l2) * (l1 + l2));
    let (ds12, s22) = case_data(jet);
    let gamma = [ds12[0] / s22, ds12[1] / s22];
    let sup: f64 = (0..2).map(|k| 2.0 * gamma[k] * ds12[k] - gamma[k] * gamma[k] * s22).sum();
    let n11 = reaction_term(&jet.to_jet())?[(0, 0)];
    let shear = jet.u2_12 + jet.u1_22;
    let closed_form = 2.0 * l1 * l1 * f / s22 * (jet.u2_11 * jet.u2_11 + shear * shear);
    Ok(QValues {
        closed_form,
        by_search: n11 + 2.0 * f * sup,
        reaction: n11,
        gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case1 {
    /// Supremum and `N₁₁` both vanish.
    Zero,
    /// The objective is a non-constant linear function of `Γ`.
    UnboundedAbove,
}

/// With `λ1 = λ2` the quadratic part of the objective vanishes, leaving
/// `2Γ²_k ∂_kS₁₂` with `∂₁S₁₂ = λu²₁₁` and `∂₂S₁₂ = λ(u²₁₂ + u¹₂₂)`.
pub fn q_case1(jet: &MinimizingJet) -> Case1 {
    let (ds12, _) = case_data(jet);
    if ds12 == [0.0, 0.0] {
        Case1::Zero
    } else {
        Case1::UnboundedAbove
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RThetaResiduals {
    pub r: f64,
    pub theta: f64,
    pub scale_r: f64,
    pub scale_theta: f64,
}

impl RThetaResiduals {
    pub fn relative(&self) -> f64 {
        relative(self.r, self.scale_r).max(relative(self.theta, self.scale_theta))
    }
}

/// Pointwise values of the `(r, θ)` system at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RThetaTerms {
    pub r: f64,
    pub r_dot: f64,
    pub theta_dot: f64,
    pub dr: [f64; 2],
    pub dtheta: [f64; 2],
    pub lap_r: f64,
    pub lap_theta: f64,
}

impl RThetaTerms {
    pub fn compute(jet: &Jet) -> Result<Self> {
        require_orientation(jet)?;
        let fo = first_order(jet)?;
        let g = velocity_gradient(jet, &fo);
        let (p, s) = (fo.p, fo.s);
        let r2 = p * p + s * s;
        let r = r2.sqrt();
        let pt = g[0][0] + g[1][1];
        let st = g[1][0] - g[0][1];
        let t3 = &jet.d3u;
        let (mut lap_p, mut lap_s) = (0.0, 0.0);
        for k in 0..2 {
            lap_p += t3[0][0][k][k] + t3[1][1][k][k];
            lap_s += t3[1][0][k][k] - t3[0][1][k][k];
        }
        let radial: [f64; 2] = std::array::from_fn(|k| p * fo.dp[k] + s * fo.ds[k]);
        let angular: [f64; 2] = std::array::from_fn(|k| p * fo.ds[k] - s * fo.dp[k]);
        let mut lap_r = (p * lap_p + s * lap_s) / r;
        let mut lap_theta = (p * lap_s - s * lap_p) / r2;
        for k in 0..2 {
            lap_r += (fo.dp[k] * fo.dp[k] + fo.ds[k] * fo.ds[k]) / r - radial[k] * radial[k] / (r2 * r);
            lap_theta -= 2.0 * angular[k] * radial[k] / (r2 * r2);
        }
        Ok(Self {
            r,
            r_dot: (p * pt + s * st) / r,
            theta_dot: (p * st - s * pt) / r2,
            dr: radial.map(|x| x / r),
            dtheta: angular.map(|x| x / r2),
            lap_r,
            lap_theta,
        })
    }

    /// `−|Dθ|²/r − 2|Dr|²/r³ + 2 (Dr × Dθ)/r²`
    pub fn r_source(&self) -> f64 {
        let r = self.r;
        let dth2 = self.dtheta[0].powi(2) + self.dtheta[1].powi(2);
        let dr2 = self.dr[0].powi(2) + self.dr[1].powi(2);
        let cross = self.dr[0] * self.dtheta[1] - self.dr[1] * self.dtheta[0];
        -dth2 / r - 2.0 * dr2 / (r * r * r) + 2.0 * cross / (r * r)
    }
}

/// Residuals of `∂t r − FΔr = −|Dθ|²/r − 2|Dr|²/r³ + 2(Dr × Dθ)/r²` and
/// `∂t θ − FΔθ = 0` with `F = r⁻²`.
pub fn verify_rtheta_system(jet: &Jet) -> Result<RThetaResiduals> {
    let t = RThetaTerms::compute(jet)?;
    let f = 1.0 / (t.r * t.r);
    let src = t.r_source();
    Ok(RThetaResiduals {
        r: (t.r_dot - f * t.lap_r - src).abs(),
        theta: (t.theta_dot - f * t.lap_theta).abs(),
        scale_r: t.r_dot.abs().max((f * t.lap_r).abs()).max(src.abs()),
        scale_theta: t.theta_dot.abs().max((f * t.lap_theta).abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::super::jet::rotation;
    use super::*;
    use crate::Vec2;

    /// `scale · R(angle)`
    fn conformal(scale: f64, angle: f64) -> Mat2 {
        rotation(angle) * scale
    }
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Richardson-extrapolated central differences: error O(h⁴).
    fn richardson<G: Fn(f64) -> f64>(g: G, h: f64) -> f64 {
        let d = |h: f64| (g(h) - g(-h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    fn richardson2<G: Fn(f64) -> f64>(g: G, h: f64) -> f64 {
        let d = |h: f64| (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    fn axis(i: usize, t: f64) -> Vec2 {
        if i == 0 {
            Vec2::new(t, 0.0)
        } else {
            Vec2::new(0.0, t)
        }
    }

    fn coeff(m: &Mat2) -> f64 {
        let (p, s) = trace_rotation(m);
        1.0 / (p * p + s * s)
    }

    /// `∂_i(F Δu^α)` by differencing the polynomial.
    fn fd_velocity_gradient(jet: &Jet) -> [[f64; 2]; 2] {
        std::array::from_fn(|a| {
            std::array::from_fn(|i| {
                richardson(
                    |t| {
                        let x = axis(i, t);
                        coeff(&jet.du_at(x)) * jet.laplacian_at(x)[a]
                    },
                    1e-3,
                )
            })
        })
    }

    fn h_at(jet: &Jet, x: Vec2) -> Mat2 {
        let du = jet.du_at(x);
        du.transpose() * du
    }

    #[test]
    fn velocity_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let jet = Jet::random(&mut rng, 0.1);
            let fo = first_order(&jet).unwrap();
            let exact = velocity_gradient(&jet, &fo);
            let fd = fd_velocity_gradient(&jet);
            for a in 0..2 {
                for i in 0..2 {
                    let scale = exact[a][i].abs().max(1.0);
                    assert!((exact[a][i] - fd[a][i]).abs() < 1e-7 * scale, "{exact:?} {fd:?}");
                }
            }
        }
    }

    /// Independent evaluation of `∂t h − F Δh`, which must equal `N`.
    fn fd_reaction(jet: &Jet) -> Mat2 {
        let g = fd_velocity_gradient(jet);
        let du = jet.du;
        let dt_h = Mat2::from_fn(|i, j| (0..2).map(|a| g[a][i] * du[(a, j)] + du[(a, i)] * g[a][j]).sum());
        let lap_h = Mat2::from_fn(|i, j| {
            (0..2)
                .map(|k| richardson2(|t| h_at(jet, axis(k, t))[(i, j)], 1e-3))
                .sum()
        });
        dt_h - lap_h * coeff(&du)
    }

    #[test]
    fn reaction_term_matches_finite_difference_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let jet = Jet::random(&mut rng, 0.1);
            let n = reaction_term(&jet).unwrap();
            let fd = fd_reaction(&jet);
            let scale = n.amax().max(1.0);
            assert!((n - fd).amax() < 1e-6 * scale, "{n} {fd}");
        }
    }

    #[test]
    fn literal_contraction_fails_off_the_aligned_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let jet = Jet::random(&mut rng, 0.1);
            let lit = reaction_term_literal(&jet).unwrap();
            worst = worst.max((lit - fd_reaction(&jet)).amax());
        }
        assert!(worst > 1e-2, "{worst}");
        // on the slice θ = 0 both readings agree
        let aligned = Jet::random(&mut rng, 0.1);
        let theta = polar_decompose(&aligned.du).unwrap().theta;
        let aligned = aligned.rotate(-theta, 0.0);
        let diff = reaction_term_literal(&aligned).unwrap() - reaction_term(&aligned).unwrap();
        assert!(diff.amax() < 1e-12);
    }

    #[test]
    fn reaction_term_examples() {
        let zero = Jet::affine(Mat2::new(1.3, 0.2, -0.4, 0.9)).unwrap();
        assert_eq!(reaction_term(&zero).unwrap(), Mat2::zeros());

        let s = 0.7;
        let mut j = Jet::affine(Mat2::identity()).unwrap();
        j.d2u[0][0][0] = s;
        let n = reaction_term(&j).unwrap();
        assert!((n[(0, 0)] + s * s).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let n = reaction_term(&Jet::random(&mut rng, 0.1)).unwrap();
            assert!((n[(0, 1)] - n[(1, 0)]).abs() < 1e-15);
        }
        assert!(matches!(
            reaction_term(&Jet { du: Mat2::new(1.0, 0.0, 0.0, -1.0), ..zero }),
            Err(Error::Orientation(_))
        ));
    }

    #[test]
    fn s_evolution_examples() {
        let affine = Jet::affine(Mat2::new(0.8, 0.3, -0.2, 1.1)).unwrap();
        let res = verify_evolution_of_s(&affine).unwrap();
        assert_eq!(res.residual(), 0.0);
        assert_eq!(res.relative(), 0.0);

        let mut sparse = Jet::affine(Mat2::new(0.8, 0.3, -0.2, 1.1)).unwrap();
        sparse.d2u[1][0][0] = 1.0;
        let res = verify_evolution_of_s(&sparse).unwrap();
        assert!(res.residual() < 1e-15, "{res:?}");

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let res = verify_evolution_of_s(&Jet::random(&mut rng, 0.1)).unwrap();
            assert!(res.relative() < 1e-12, "{res:?}");
        }
    }

    #[test]
    fn s_evolution_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let jet = Jet::random(&mut rng, 0.1);
            let t = EvolutionTerms::compute(&jet).unwrap();
            let rot = EvolutionTerms::compute(&jet.rotate(0.9, 0.9)).unwrap();
            // h, ∂t h, Δh and N are domain tensors; the target rotation drops out
            let r = rotation(0.9);
            assert!((rot.n - r * t.n * r.transpose()).amax() < 1e-12);
            assert!(verify_evolution_of_s(&jet.rotate(0.4, -1.2)).unwrap().relative() < 1e-12);
        }
    }

    #[test]
    fn q_worked_example() {
        let jet = MinimizingJet::new(1.0, 2.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let q = q_quantity(&jet).unwrap();
        assert!((q.closed_form - 2.0 / 27.0).abs() < 1e-16);
        assert!((q.by_search - 2.0 / 27.0).abs() < 1e-15);
        assert!((q.reaction + 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn q_vanishes_without_second_derivatives() {
        let q = q_quantity(&MinimizingJet::new(0.5, 1.5, 0.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(q.closed_form, 0.0);
        assert_eq!(q.by_search, 0.0);
    }

    #[test]
    fn q_rejects_equal_singular_values() {
        let jet = MinimizingJet::new(1.0, 1.0, 0.3, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(q_quantity(&jet), Err(Error::InvalidJet(_))));
    }

    /// Dense grid search over `Γ²`, refined around the best grid point.
    fn grid_search_sup(ds12: [f64; 2], s22: f64) -> f64 {
        let obj = |g: [f64; 2]| (0..2).map(|k| 2.0 * g[k] * ds12[k] - g[k] * g[k] * s22).sum::<f64>();
        let (mut best, mut centre, mut width) = (f64::NEG_INFINITY, [0.0, 0.0], 50.0);
        for _ in 0..40 {
            let c = centre;
            for i in -20..=20 {
                for j in -20..=20 {
                    let g = [c[0] + width * i as f64 / 20.0, c[1] + width * j as f64 / 20.0];
                    let v = obj(g);
                    if v > best {
                        best = v;
                        centre = g;
                    }
                }
            }
            width *= 0.25;
        }
        best
    }

    #[test]
    fn q_search_matches_grid_oracle_and_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let jet = MinimizingJet::random(&mut rng);
            let q = q_quantity(&jet).unwrap();
            let scale = q.closed_form.abs().max(q.by_search.abs()).max(1e-300);
            assert!((q.closed_form - q.by_search).abs() <= 1e-10 * scale, "{q:?}");
            assert!(q.by_search >= -1e-12);
        }
        for _ in 0..50 {
            let jet = MinimizingJet::random(&mut rng);
            let (ds12, s22) = case_data(&jet);
            let q = q_quantity(&jet).unwrap();
            let f = 1.0 / (jet.lambda1 + jet.lambda2).powi(2);
            let oracle = q.reaction + 2.0 * f * grid_search_sup(ds12, s22);
            assert!((oracle - q.by_search).abs() < 1e-9, "{oracle} {}", q.by_search);
        }
    }

    #[test]
    fn q_scales_quadratically() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let jet = MinimizingJet::random(&mut rng);
            let q = q_quantity(&jet).unwrap();
            let q3 = q_quantity(&jet.scale_higher(3.0)).unwrap();
            assert!((q3.closed_form - 9.0 * q.closed_form).abs() < 1e-12 * q3.closed_form.abs().max(1.0));
            assert!((q3.by_search - 9.0 * q.by_search).abs() < 1e-12 * q3.by_search.abs().max(1.0));
        }
    }

    #[test]
    fn case1_classification() {
        let z = MinimizingJet::new(0.7, 0.7, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(q_case1(&z), Case1::Zero);
        assert_eq!(reaction_term(&z.to_jet()).unwrap()[(0, 0)], 0.0);
        let a = MinimizingJet::new(0.7, 0.7, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(q_case1(&a), Case1::UnboundedAbove);
        let b = MinimizingJet::new(0.7, 0.7, -0.3, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(q_case1(&b), Case1::UnboundedAbove);
    }

    fn fd_rtheta(jet: &Jet) -> RThetaTerms {
        let polar_at = |x: Vec2| {
            let (p, s) = trace_rotation(&jet.du_at(x));
            (p.hypot(s), s.atan2(p))
        };
        let g = fd_velocity_gradient(jet);
        let ddu = Mat2::from_fn(|a, i| g[a][i]);
        // short trajectory Du + t ∂t Du
        let along = |t: f64| {
            let (p, s) = trace_rotation(&(jet.du + ddu * t));
            (p.hypot(s), s.atan2(p))
        };
        let r0 = polar_at(Vec2::zeros()).0;
        RThetaTerms {
            r: r0,
            r_dot: richardson(|t| along(t).0, 1e-3),
            theta_dot: richardson(|t| along(t).1, 1e-3),
            dr: std::array::from_fn(|k| richardson(|t| polar_at(axis(k, t)).0, 1e-3)),
            dtheta: std::array::from_fn(|k| richardson(|t| polar_at(axis(k, t)).1, 1e-3)),
            lap_r: (0..2).map(|k| richardson2(|t| polar_at(axis(k, t)).0, 1e-3)).sum(),
            lap_theta: (0..2).map(|k| richardson2(|t| polar_at(axis(k, t)).1, 1e-3)).sum(),
        }
    }

    #[test]
    fn rtheta_terms_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let mut jet = Jet::random(&mut rng, 0.1);
            // keep θ away from the branch cut for the difference quotients
            let theta = polar_decompose(&jet.du).unwrap().theta;
            jet = jet.rotate(-theta, 0.0);
            let a = RThetaTerms::compute(&jet).unwrap();
            let b = fd_rtheta(&jet);
            let close = |x: f64, y: f64| (x - y).abs() < 1e-6 * x.abs().max(1.0);
            assert!(close(a.r_dot, b.r_dot) && close(a.theta_dot, b.theta_dot), "{a:?} {b:?}");
            assert!(close(a.lap_r, b.lap_r) && close(a.lap_theta, b.lap_theta), "{a:?} {b:?}");
            for k in 0..2 {
                assert!(close(a.dr[k], b.dr[k]) && close(a.dtheta[k], b.dtheta[k]));
            }
            // the identity itself, evaluated on the oracle's numbers
            let f = 1.0 / (b.r * b.r);
            assert!((b.theta_dot - f * b.lap_theta).abs() < 1e-5 * b.theta_dot.abs().max(1.0));
            assert!((b.r_dot - f * b.lap_r - b.r_source()).abs() < 1e-5 * b.r_dot.abs().max(1.0));
        }
    }

    #[test]
    fn rtheta_examples() {
        let affine = Jet::affine(Mat2::new(0.9, -0.4, 0.3, 1.2)).unwrap();
        let res = verify_rtheta_system(&affine).unwrap();
        assert_eq!((res.r, res.theta), (0.0, 0.0));

        // conformal first derivatives, harmonic (trace-free) second derivatives
        let mut conf = Jet::affine(conformal(1.3, 0.6)).unwrap();
        conf.d2u[0][0][0] = 0.4;
        conf.d2u[0][1][1] = -0.4;
        conf.d2u[1][0][1] = 0.25;
        conf.d2u[1][1][0] = 0.25;
        let res = verify_rtheta_system(&conf).unwrap();
        assert!(res.r < 1e-10 && res.theta < 1e-10, "{res:?}");

        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..1000 {
            let res = verify_rtheta_system(&Jet::random(&mut rng, 0.1)).unwrap();
            assert!(res.relative() < 1e-12, "{res:?}");
        }
    }

    #[test]
    fn printed_cross_coefficient_is_not_an_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let t = RThetaTerms::compute(&Jet::random(&mut rng, 0.1)).unwrap();
            let f = 1.0 / (t.r * t.r);
            let cross = t.dr[0] * t.dtheta[1] - t.dr[1] * t.dtheta[0];
            let printed = t.r_source() - cross / (t.r * t.r);
            worst = worst.max((t.r_dot - f * t.lap_r - printed).abs());
        }
        assert!(worst > 1e-2, "{worst}");
    }
}
