use rand::Rng;

use crate::{Error, Mat2, Result, Vec2};

/// `d2[α][j][k] = u^α_{jk}`
pub type Second = [[[f64; 2]; 2]; 2];
/// `d3[α][j][k][l] = u^α_{jkl}`
pub type Third = [[[[f64; 2]; 2]; 2]; 2];

/// Exact 3-jet of a map at the origin, i.e. the cubic polynomial
/// `u^α(x) = u^α_j x_j + ½ u^α_{jk} x_j x_k + ⅙ u^α_{jkl} x_j x_k x_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub du: Mat2,
    pub d2u: Second,
    pub d3u: Third,
}

const SYMMETRY_TOL: f64 = 0.0;

impl Jet {
    pub fn new(du: Mat2, d2u: Second, d3u: Third) -> Result<Self> {
        if !(du.determinant() > 0.0) {
            return Err(Error::InvalidJet("det du must be positive"));
        }
        for a in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    if (d2u[a][j][k] - d2u[a][k][j]).abs() > SYMMETRY_TOL {
                        return Err(Error::InvalidJet("second derivatives must be symmetric"));
                    }
                    for l in 0..2 {
                        let v = d3u[a][j][k][l];
                        if (v - d3u[a][k][j][l]).abs() > SYMMETRY_TOL
                            || (v - d3u[a][j][l][k]).abs() > SYMMETRY_TOL
                        {
                            return Err(Error::InvalidJet("third derivatives must be symmetric"));
                        }
                    }
                }
            }
        }
        Ok(Self { du, d2u, d3u })
    }

    pub fn affine(du: Mat2) -> Result<Self> {
        Self::new(du, [[[0.0; 2]; 2]; 2], [[[[0.0; 2]; 2]; 2]; 2])
    }

    /// Entries uniform in `[−1, 1]`, with `du` resampled until
    /// `det du > min_det`.
    pub fn random<R: Rng>(rng: &mut R, min_det: f64) -> Self {
        let du = loop {
            let m = Mat2::from_fn(|_, _| rng.gen_range(-1.0..=1.0));
            if m.determinant() > min_det {
                break m;
            }
        };
        let mut d2u = [[[0.0; 2]; 2]; 2];
        let mut d3u = [[[[0.0; 2]; 2]; 2]; 2];
        for a in 0..2 {
            // independent components indexed by how many derivatives are in x₂
            let second: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
            let third: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
            for j in 0..2 {
                for k in 0..2 {
                    d2u[a][j][k] = second[j + k];
                    for l in 0..2 {
                        d3u[a][j][k][l] = third[j + k + l];
                    }
                }
            }
        }
        Self { du, d2u, d3u }
    }

    /// Multiplies all second and third derivatives by `s`.
    pub fn scale_higher(&self, s: f64) -> Self {
        let mut out = *self;
        for a in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out.d2u[a][j][k] *= s;
                    for l in 0..2 {
                        out.d3u[a][j][k][l] *= s;
                    }
                }
            }
        }
        out
    }

    /// Jet of `R_target · u(R_domainᵀ x)`.
    pub fn rotate(&self, target: f64, domain: f64) -> Self {
        let rt = rotation(target);
        let rd = rotation(domain);
        let mut out = Self {
            du: rt * self.du * rd.transpose(),
            d2u: [[[0.0; 2]; 2]; 2],
            d3u: [[[[0.0; 2]; 2]; 2]; 2],
        };
        for a in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut s2 = 0.0;
                    for b in 0..2 {
                        for m in 0..2 {
                            for n in 0..2 {
                                s2 += rt[(a, b)] * rd[(j, m)] * rd[(k, n)] * self.d2u[b][m][n];
                            }
                        }
                    }
                    out.d2u[a][j][k] = s2;
                    for l in 0..2 {
                        let mut s3 = 0.0;
                        for b in 0..2 {
                            for m in 0..2 {
                                for n in 0..2 {
                                    for o in 0..2 {
                                        s3 += rt[(a, b)]
                                            * rd[(j, m)]
                                            * rd[(k, n)]
                                            * rd[(l, o)]
                                            * self.d3u[b][m][n][o];
                                    }
                                }
                            }
                        }
                        out.d3u[a][j][k][l] = s3;
                    }
                }
            }
        }
        out
    }

    /// `u(x)`
    pub fn value_at(&self, x: Vec2) -> Vec2 {
        Vec2::from_fn(|a, _| {
            let mut v = 0.0;
            for j in 0..2 {
                v += self.du[(a, j)] * x[j];
                for k in 0..2 {
                    v += 0.5 * self.d2u[a][j][k] * x[j] * x[k];
                    for l in 0..2 {
                        v += self.d3u[a][j][k][l] * x[j] * x[k] * x[l] / 6.0;
                    }
                }
            }
            v
        })
    }

    /// `Du(x)`
    pub fn du_at(&self, x: Vec2) -> Mat2 {
        Mat2::from_fn(|a, j| {
            let mut v = self.du[(a, j)];
            for k in 0..2 {
                v += self.d2u[a][j][k] * x[k];
                for l in 0..2 {
                    v += 0.5 * self.d3u[a][j][k][l] * x[k] * x[l];
                }
            }
            v
        })
    }

    /// `Δu(x)`
    pub fn laplacian_at(&self, x: Vec2) -> Vec2 {
        Vec2::from_fn(|a, _| {
            (0..2)
                .map(|k| self.d2u[a][k][k] + (0..2).map(|l| self.d3u[a][k][k][l] * x[l]).sum::<f64>())
                .sum()
        })
    }

    /// `Δu` at the origin.
    pub fn laplacian(&self) -> [f64; 2] {
        std::array::from_fn(|a| self.d2u[a][0][0] + self.d2u[a][1][1])
    }

    /// `∂_i Δu^α` at the origin, indexed `[α][i]`.
    pub fn laplacian_gradient(&self) -> [[f64; 2]; 2] {
        std::array::from_fn(|a| std::array::from_fn(|i| self.d3u[a][i][0][0] + self.d3u[a][i][1][1]))
    }
}

pub(crate) fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Jet at a minimum of `λ1` in the normalised coordinates of the lower-bound
/// argument: `du = diag(λ1, λ2)` and `u¹₁₁ = u¹₁₂ = 0`. The remaining
/// second derivatives are free; third derivatives do not enter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizingJet {
    pub lambda1: f64,
    pub lambda2: f64,
    pub u1_22: f64,
    pub u2_11: f64,
    pub u2_12: f64,
    pub u2_22: f64,
}

impl MinimizingJet {
    pub fn new(lambda1: f64, lambda2: f64, u1_22: f64, u2_11: f64, u2_12: f64, u2_22: f64) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda2 >= lambda1) {
            return Err(Error::InvalidJet("need λ2 ≥ λ1 > 0"));
        }
        Ok(Self {
            lambda1,
            lambda2,
            u1_22,
            u2_11,
            u2_12,
            u2_22,
        })
    }

    /// Singular values uniform in `(0, 1]`, resampled until
    /// `λ1λ2 > 0.1` and `λ2 − λ1 > 0.1`; free entries uniform in `[−1, 1]`.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let (l1, l2) = loop {
            let a: f64 = rng.gen_range(0.0..=1.0);
            let b: f64 = rng.gen_range(0.0..=1.0);
            let (l1, l2) = (a.min(b), a.max(b));
            if l1 * l2 > 0.1 && l2 - l1 > 0.1 {
                break (l1, l2);
            }
        };
        let mut e = || rng.gen_range(-1.0..=1.0);
        Self {
            lambda1: l1,
            lambda2: l2,
            u1_22: e(),
            u2_11: e(),
            u2_12: e(),
            u2_22: e(),
        }
    }

    /// Equal singular values with `u²₂ᵢ = 0`; each of the two remaining
    /// entries is zero with probability ½.
    pub fn random_case1<R: Rng>(rng: &mut R) -> Self {
        let lambda = rng.gen_range(0.4..=1.0);
        let mut maybe = || {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(-1.0..=1.0)
            }
        };
        Self {
            lambda1: lambda,
            lambda2: lambda,
            u1_22: maybe(),
            u2_11: maybe(),
            u2_12: 0.0,
            u2_22: 0.0,
        }
    }

    pub fn scale_higher(&self, s: f64) -> Self {
        Self {
            u1_22: self.u1_22 * s,
            u2_11: self.u2_11 * s,
            u2_12: self.u2_12 * s,
            u2_22: self.u2_22 * s,
            ..*self
        }
    }

    pub fn to_jet(&self) -> Jet {
        let mut d2u = [[[0.0; 2]; 2]; 2];
        d2u[0][1][1] = self.u1_22;
        d2u[1][0][0] = self.u2_11;
        d2u[1][0][1] = self.u2_12;
        d2u[1][1][0] = self.u2_12;
        d2u[1][1][1] = self.u2_22;
        Jet {
            du: Mat2::new(self.lambda1, 0.0, 0.0, self.lambda2),
            d2u,
            d3u: [[[[0.0; 2]; 2]; 2]; 2],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fd_du(jet: &Jet, x: Vec2, h: f64) -> Mat2 {
        Mat2::from_fn(|a, j| {
            let e = Vec2::from_fn(|i, _| if i == j { h } else { 0.0 });
            (jet.value_at(x + e)[a] - jet.value_at(x - e)[a]) / (2.0 * h)
        })
    }

    #[test]
    fn random_jets_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let j = Jet::random(&mut rng, 0.1);
            assert!(Jet::new(j.du, j.d2u, j.d3u).is_ok());
            assert!(j.du.determinant() > 0.1);
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(Jet::affine(Mat2::new(1.0, 0.0, 0.0, -1.0)).is_err());
        let mut d2 = [[[0.0; 2]; 2]; 2];
        d2[0][0][1] = 1.0;
        assert!(Jet::new(Mat2::identity(), d2, [[[[0.0; 2]; 2]; 2]; 2]).is_err());
        assert!(MinimizingJet::new(2.0, 1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(MinimizingJet::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn polynomial_derivatives_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let jet = Jet::random(&mut rng, 0.1);
        assert_eq!(jet.du_at(Vec2::zeros()), jet.du);
        let x = Vec2::new(0.3, -0.2);
        // cubic: central differences are exact up to the h² · u''' term
        let diff = jet.du_at(x) - fd_du(&jet, x, 1e-4);
        assert!(diff.amax() < 1e-7, "{diff}");
        let lap = jet.laplacian_at(Vec2::zeros());
        assert_eq!([lap[0], lap[1]], jet.laplacian());
    }

    #[test]
    fn rotation_commutes_with_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let jet = Jet::random(&mut rng, 0.1);
        let (t, d) = (0.7, -1.1);
        let rot = jet.rotate(t, d);
        let x = Vec2::new(0.2, 0.4);
        let expected = rotation(t) * jet.value_at(rotation(d).transpose() * x);
        assert!((rot.value_at(x) - expected).norm() < 1e-14);
    }

    #[test]
    fn minimizing_jet_layout() {
        let j = MinimizingJet::new(1.0, 2.0, 0.1, 0.2, 0.3, 0.4).unwrap().to_jet();
        assert_eq!(j.du, Mat2::new(1.0, 0.0, 0.0, 2.0));
        assert_eq!(j.d2u[0][0], [0.0, 0.0]);
        assert_eq!(j.d2u[1][0][1], j.d2u[1][1][0]);
        assert!(Jet::new(j.du, j.d2u, j.d3u).is_ok());
    }
}
