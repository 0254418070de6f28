//! Flat tori `ℝ²/Γ` and the homotopy class of maps between them.
//!
//! A lattice is stored by an oriented basis whose columns generate `Γ`.
//! A map `u: ℝ²/Γ₁ → ℝ²/Γ₂` lifts to `ℝ² → ℝ²` with `u(x + z) = u(x) + Bz`
//! for `z ∈ Γ₁`; the linear part `B` must send `Γ₁` into `Γ₂`, which in
//! lattice coordinates means `basis₂⁻¹ · B · basis₁` is an integer matrix.

use crate::{Error, Mat2, Result, Vec2};

/// Tolerance on the integrality of the homomorphism matrix.
pub const INTEGER_TOL: f64 = 1e-9;

/// An oriented rank-2 lattice `Γ ⊂ ℝ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    basis: Mat2,
    inverse: Mat2,
}

impl Lattice {
    pub fn new(basis: Mat2) -> Result<Self> {
        let det = basis.determinant();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateLattice(det));
        }
        let inverse = basis.try_inverse().ok_or(Error::DegenerateLattice(det))?;
        Ok(Self { basis, inverse })
    }

    /// Builds a lattice from four numbers in column-major order
    /// (first generator, then second generator).
    pub fn from_column_major(entries: [f64; 4]) -> Result<Self> {
        Self::new(Mat2::new(entries[0], entries[2], entries[1], entries[3]))
    }

    /// The standard lattice `ℤ²`.
    pub fn unit() -> Self {
        Self {
            basis: Mat2::identity(),
            inverse: Mat2::identity(),
        }
    }

    pub fn basis(&self) -> &Mat2 {
        &self.basis
    }

    pub fn inverse(&self) -> &Mat2 {
        &self.inverse
    }

    pub fn column_major(&self) -> [f64; 4] {
        let b = &self.basis;
        [b[(0, 0)], b[(1, 0)], b[(0, 1)], b[(1, 1)]]
    }

    /// Area of a fundamental domain.
    pub fn area(&self) -> f64 {
        self.basis.determinant()
    }

    /// Lattice coordinates of a point: `x = basis · ξ`.
    pub fn to_lattice_coords(&self, x: &Vec2) -> Vec2 {
        self.inverse * x
    }

    fn contains_coords(xi: &Vec2) -> bool {
        xi.iter().all(|&c| (0.0..1.0).contains(&c))
    }

    /// Reduces `x` into the half-open fundamental parallelogram
    /// `{basis · ξ : ξ ∈ [0,1)²}`.
    ///
    /// Points already inside are returned unchanged, which makes the
    /// operation idempotent in floating point.
    pub fn wrap(&self, x: Vec2) -> Vec2 {
        let xi = self.inverse * x;
        if Self::contains_coords(&xi) {
            return x;
        }
        let shift = xi.map(f64::floor);
        let mut y = x - self.basis * shift;
        // Rounding can leave the image a hair outside the parallelogram.
        for _ in 0..4 {
            let eta = self.inverse * y;
            if Self::contains_coords(&eta) {
                return y;
            }
            for k in 0..2 {
                if eta[k] >= 1.0 {
                    y -= self.basis.column(k);
                } else if eta[k] < 0.0 {
                    y += self.basis.column(k);
                }
            }
        }
        y
    }
}

/// Domain and target tori together with the linear part of the map class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPair {
    domain: Lattice,
    target: Lattice,
    linear_part: Mat2,
    class: [[i64; 2]; 2],
}

impl TorusPair {
    /// Builds a pair from a Cartesian linear part `B`, which must send the
    /// domain lattice into the target lattice and be invertible.
    pub fn new(domain: Lattice, target: Lattice, linear_part: Mat2) -> Result<Self> {
        let (ok, class) = check_homomorphism(&domain, &target, &linear_part, true)?;
        if !ok {
            return Err(Error::NotHomomorphism);
        }
        Ok(Self {
            domain,
            target,
            linear_part,
            class,
        })
    }

    /// Builds a pair from an integer matrix `K` expressed in the lattice
    /// bases; the Cartesian linear part is `basis₂ · K · basis₁⁻¹`.
    pub fn from_class(domain: Lattice, target: Lattice, class: [[i64; 2]; 2]) -> Result<Self> {
        let k = Mat2::new(
            class[0][0] as f64,
            class[0][1] as f64,
            class[1][0] as f64,
            class[1][1] as f64,
        );
        let linear_part = target.basis() * k * domain.inverse();
        Self::new(domain, target, linear_part)
    }

    /// Identity class on the unit torus.
    pub fn unit_identity() -> Self {
        Self::from_class(Lattice::unit(), Lattice::unit(), [[1, 0], [0, 1]])
            .expect("identity is a valid class")
    }

    pub fn domain(&self) -> &Lattice {
        &self.domain
    }

    pub fn target(&self) -> &Lattice {
        &self.target
    }

    /// Cartesian linear part `B`.
    pub fn linear_part(&self) -> &Mat2 {
        &self.linear_part
    }

    /// `B` in lattice bases, row-major.
    pub fn class(&self) -> [[i64; 2]; 2] {
        self.class
    }

    /// Composition `other ∘ self`; requires `self.target == other.domain`.
    pub fn compose(&self, other: &TorusPair) -> Result<TorusPair> {
        TorusPair::new(self.domain, other.target, other.linear_part * self.linear_part)
    }
}

/// Checks that `b` maps `domain` into `target`.
///
/// Returns whether `target⁻¹ · b · domain` is integral within
/// [`INTEGER_TOL`], together with its rounded entries (row-major). With
/// `require_diffeomorphism`, a singular `b` is rejected.
pub fn check_homomorphism(
    domain: &Lattice,
    target: &Lattice,
    b: &Mat2,
    require_diffeomorphism: bool,
) -> Result<(bool, [[i64; 2]; 2])> {
    if require_diffeomorphism && b.determinant().abs() < INTEGER_TOL {
        return Err(Error::SingularClass);
    }
    let k = target.inverse() * b * domain.basis();
    let mut class = [[0i64; 2]; 2];
    let mut ok = true;
    for i in 0..2 {
        for j in 0..2 {
            let rounded = k[(i, j)].round();
            ok &= (k[(i, j)] - rounded).abs() <= INTEGER_TOL;
            class[i][j] = rounded as i64;
        }
    }
    Ok((ok, class))
}
