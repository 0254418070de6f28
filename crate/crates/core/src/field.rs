//! Discrete maps between tori and their difference operators.
//!
//! A map is `u(x) = B x + v(x)` where `v` is periodic and sampled on the
//! uniform grid `x_ij = basis₁ · (i/n1, j/n2)`. `v` is stored unwrapped so
//! that `u` is a continuous lift `ℝ² → ℝ²`.
//!
//! All operators use second-order central stencils in lattice coordinates,
//! chain-ruled to Cartesian derivatives. Grid points are evaluated in
//! parallel; every reduction runs sequentially in index order.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::lattice::{Lattice, TorusPair};
use crate::{Error, Mat2, Result, Vec2};

/// Stencil geometry of a periodic grid over a fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
    domain: Lattice,
    /// `G = A⁻¹A⁻ᵀ`, the Laplacian's coefficients in lattice coordinates.
    metric: Mat2,
}

impl Grid {
    pub fn new(domain: Lattice, n1: usize, n2: usize) -> Result<Self> {
        if n1 < 4 || n2 < 4 {
            return Err(Error::Resolution { n1, n2 });
        }
        let inv = domain.inverse();
        Ok(Self {
            n1,
            n2,
            domain,
            metric: inv * inv.transpose(),
        })
    }

    pub fn domain(&self) -> &Lattice {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n2, idx % self.n2)
    }

    #[inline]
    fn shifted(&self, i: usize, j: usize, di: isize, dj: isize) -> usize {
        let ii = (i as isize + di).rem_euclid(self.n1 as isize) as usize;
        let jj = (j as isize + dj).rem_euclid(self.n2 as isize) as usize;
        self.index(ii, jj)
    }

    /// Lattice coordinates `(i/n1, j/n2)`.
    pub fn lattice_point(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(i as f64 / self.n1 as f64, j as f64 / self.n2 as f64)
    }

    /// Cartesian position of grid node `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        self.domain.basis() * self.lattice_point(i, j)
    }

    /// Cartesian step lengths along the two lattice directions.
    pub fn spacings(&self) -> (f64, f64) {
        let b = self.domain.basis();
        (
            b.column(0).norm() / self.n1 as f64,
            b.column(1).norm() / self.n2 as f64,
        )
    }

    /// Largest step length, the `h` of `O(h²)` statements.
    pub fn h(&self) -> f64 {
        let (h1, h2) = self.spacings();
        h1.max(h2)
    }

    pub fn area(&self) -> f64 {
        self.domain.area()
    }

    /// Gershgorin bound on the spectral radius of the discrete Laplacian.
    pub fn laplacian_bound(&self) -> f64 {
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        let g = &self.metric;
        4.0 * g[(0, 0)] * n1 * n1 + 4.0 * g[(1, 1)] * n2 * n2 + 2.0 * g[(0, 1)].abs() * n1 * n2
    }

    /// Central first differences of a scalar function, returned as the
    /// Cartesian gradient. `diff(a, b)` computes `a − b` and lets callers
    /// substitute a wrapped difference for angle-valued data.
    pub fn gradient_with<D>(&self, f: &[f64], diff: D) -> Vec<Vec2>
    where
        D: Fn(f64, f64) -> f64 + Sync,
    {
        let inv = *self.domain.inverse();
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = self.coords(idx);
                let d1 = diff(f[self.shifted(i, j, 1, 0)], f[self.shifted(i, j, -1, 0)]) * 0.5 * n1;
                let d2 = diff(f[self.shifted(i, j, 0, 1)], f[self.shifted(i, j, 0, -1)]) * 0.5 * n2;
                inv.transpose() * Vec2::new(d1, d2)
            })
            .collect()
    }

    pub fn gradient_scalar(&self, f: &[f64]) -> Vec<Vec2> {
        self.gradient_with(f, |a, b| a - b)
    }

    /// Compact 5-point Laplacian, plus the 4-corner cross term when the
    /// lattice is not orthogonal. Differences are taken from the centre so
    /// `diff` may wrap angles.
    pub fn laplacian_with<D>(&self, f: &[f64], diff: D) -> Vec<f64>
    where
        D: Fn(f64, f64) -> f64 + Sync,
    {
        let g = self.metric;
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        let c11 = g[(0, 0)] * n1 * n1;
        let c22 = g[(1, 1)] * n2 * n2;
        let c12 = 2.0 * g[(0, 1)] * n1 * n2 * 0.25;
        let cross = c12 != 0.0;
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = self.coords(idx);
                let c = f[idx];
                let d = |di, dj| diff(f[self.shifted(i, j, di, dj)], c);
                let mut out = c11 * (d(1, 0) + d(-1, 0)) + c22 * (d(0, 1) + d(0, -1));
                if cross {
                    out += c12 * (d(1, 1) - d(1, -1) - d(-1, 1) + d(-1, -1));
                }
                out
            })
            .collect()
    }

    pub fn laplacian_scalar(&self, f: &[f64]) -> Vec<f64> {
        self.laplacian_with(f, |a, b| a - b)
    }

    /// Central first differences of a vector field: `out[idx][(α, j)] = ∂_j w^α`.
    pub fn jacobian(&self, w: &[Vec2]) -> Vec<Mat2> {
        let inv = *self.domain.inverse();
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = self.coords(idx);
                let d1 = (w[self.shifted(i, j, 1, 0)] - w[self.shifted(i, j, -1, 0)]) * (0.5 * n1);
                let d2 = (w[self.shifted(i, j, 0, 1)] - w[self.shifted(i, j, 0, -1)]) * (0.5 * n2);
                Mat2::from_columns(&[d1, d2]) * inv
            })
            .collect()
    }

    /// Compact Laplacian of a vector field, componentwise.
    pub fn laplacian_vector(&self, w: &[Vec2]) -> Vec<Vec2> {
        let g = self.metric;
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        let c11 = g[(0, 0)] * n1 * n1;
        let c22 = g[(1, 1)] * n2 * n2;
        let c12 = 2.0 * g[(0, 1)] * n1 * n2 * 0.25;
        let cross = c12 != 0.0;
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = self.coords(idx);
                let c = w[idx];
                let s = |di, dj| w[self.shifted(i, j, di, dj)];
                let mut out = (s(1, 0) + s(-1, 0) - c * 2.0) * c11 + (s(0, 1) + s(0, -1) - c * 2.0) * c22;
                if cross {
                    out += (s(1, 1) - s(1, -1) - s(-1, 1) + s(-1, -1)) * c12;
                }
                out
            })
            .collect()
    }

    /// Second derivatives of a vector field, symmetric in the lower indices
    /// by construction: `out[idx][α]` is the Hessian of `w^α`.
    pub fn hessian(&self, w: &[Vec2]) -> Vec<[Mat2; 2]> {
        let inv = *self.domain.inverse();
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = self.coords(idx);
                let c = w[idx];
                let s = |di, dj| w[self.shifted(i, j, di, dj)];
                let xx = (s(1, 0) + s(-1, 0) - c * 2.0) * (n1 * n1);
                let yy = (s(0, 1) + s(0, -1) - c * 2.0) * (n2 * n2);
                let xy = (s(1, 1) - s(1, -1) - s(-1, 1) + s(-1, -1)) * (0.25 * n1 * n2);
                let mut out = [Mat2::zeros(); 2];
                for (alpha, h) in out.iter_mut().enumerate() {
                    let lat = Mat2::new(xx[alpha], xy[alpha], xy[alpha], yy[alpha]);
                    *h = inv.transpose() * lat * inv;
                }
                out
            })
            .collect()
    }

    /// Midpoint rule: mean of grid values times the torus area, summed in
    /// index order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let sum: f64 = values.iter().sum();
        sum / values.len() as f64 * self.area()
    }
}

/// A discrete map `u = B x + v` at flow time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapField {
    pair: TorusPair,
    grid: Grid,
    /// Periodic displacement in target units, row-major over `(i, j)`.
    pub v: Vec<Vec2>,
    pub time: f64,
}

impl MapField {
    /// The affine map `u = B x`.
    pub fn affine(pair: TorusPair, n1: usize, n2: usize) -> Result<Self> {
        let grid = Grid::new(*pair.domain(), n1, n2)?;
        Ok(Self {
            pair,
            grid,
            v: vec![Vec2::zeros(); n1 * n2],
            time: 0.0,
        })
    }

    /// Samples `v` from a function of the lattice coordinates `ξ ∈ [0,1)²`.
    pub fn from_lattice_fn<G>(pair: TorusPair, n1: usize, n2: usize, f: G) -> Result<Self>
    where
        G: Fn(Vec2) -> Vec2,
    {
        let mut field = Self::affine(pair, n1, n2)?;
        for i in 0..n1 {
            for j in 0..n2 {
                let idx = field.grid.index(i, j);
                field.v[idx] = f(field.grid.lattice_point(i, j));
            }
        }
        Ok(field)
    }

    pub fn pair(&self) -> &TorusPair {
        &self.pair
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n1(&self) -> usize {
        self.grid.n1
    }

    pub fn n2(&self) -> usize {
        self.grid.n2
    }

    /// Value of the lift `u(x_ij) = B x_ij + v_ij`.
    pub fn u_at(&self, i: usize, j: usize) -> Vec2 {
        self.pair.linear_part() * self.grid.point(i, j) + self.v[self.grid.index(i, j)]
    }

    /// Translates the whole map in the target.
    pub fn translate(&mut self, by: Vec2) {
        self.v.iter_mut().for_each(|x| *x += by);
    }
}

/// `Du` at every grid point.
pub type GradientField = Vec<Mat2>;
/// `D²u` at every grid point: `[Hess u¹, Hess u²]`.
pub type HessianField = Vec<[Mat2; 2]>;

/// `Du = B + D_c v` with central differences; exact on affine maps.
pub fn gradient(f: &MapField) -> GradientField {
    let b = *f.pair.linear_part();
    let mut du = f.grid.jacobian(&f.v);
    du.iter_mut().for_each(|m| *m += b);
    du
}

/// `Δu = Δv`, since the linear part is harmonic.
pub fn laplacian(f: &MapField) -> Vec<Vec2> {
    f.grid.laplacian_vector(&f.v)
}

pub fn hessian(f: &MapField) -> HessianField {
    f.grid.hessian(&f.v)
}

/// Midpoint-rule integral over a fundamental domain of `grid`.
pub fn integrate(grid: &Grid, values: &[f64]) -> f64 {
    grid.integrate(values)
}

fn mat_column_major(m: &Mat2) -> [f64; 4] {
    [m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]]
}

/// Writes the text dump: `n1 n2 t`, the four entries of `B`, the eight
/// lattice entries (domain then target), all column-major, then one
/// `i j v1 v2` line per node in row-major order.
pub fn write_dump<W: Write>(f: &MapField, mut out: W) -> Result<()> {
    writeln!(out, "{} {} {:?}", f.n1(), f.n2(), f.time)?;
    let b = mat_column_major(f.pair.linear_part());
    writeln!(out, "{:?} {:?} {:?} {:?}", b[0], b[1], b[2], b[3])?;
    let d = f.pair.domain().column_major();
    let t = f.pair.target().column_major();
    writeln!(
        out,
        "{:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
        d[0], d[1], d[2], d[3], t[0], t[1], t[2], t[3]
    )?;
    for i in 0..f.n1() {
        for j in 0..f.n2() {
            let v = f.v[f.grid.index(i, j)];
            writeln!(out, "{} {} {:?} {:?}", i, j, v[0], v[1])?;
        }
    }
    Ok(())
}

fn parse_floats(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
    match vals {
        Ok(v) if v.len() == expected => Ok(v),
        _ => Err(Error::Dump(format!("expected {expected} numbers for {what}"))),
    }
}

/// Reads a dump written by [`write_dump`].
pub fn read_dump<R: BufRead>(input: R) -> Result<MapField> {
    let mut lines = input.lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Dump(format!("missing {what}")))
    };
    let head = next("header")?;
    let mut parts = head.split_whitespace();
    let parse_n = |s: Option<&str>| -> Result<usize> {
        s.and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::Dump("bad resolution".into()))
    };
    let n1 = parse_n(parts.next())?;
    let n2 = parse_n(parts.next())?;
    let time: f64 = parts
        .next()
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Error::Dump("bad time".into()))?;
    let b = parse_floats(&next("linear part")?, 4, "linear part")?;
    let l = parse_floats(&next("lattices")?, 8, "lattices")?;
    let domain = Lattice::from_column_major([l[0], l[1], l[2], l[3]])?;
    let target = Lattice::from_column_major([l[4], l[5], l[6], l[7]])?;
    let pair = TorusPair::new(domain, target, Mat2::new(b[0], b[2], b[1], b[3]))?;
    let mut field = MapField::affine(pair, n1, n2)?;
    field.time = time;
    for k in 0..n1 * n2 {
        let line = next("node")?;
        let vals = parse_floats(&line, 4, "node")?;
        let (i, j) = (vals[0] as usize, vals[1] as usize);
        if i >= n1 || j >= n2 || field.grid.index(i, j) != k {
            return Err(Error::Dump(format!("node line {k} out of order")));
        }
        field.v[k] = Vec2::new(vals[2], vals[3]);
    }
    Ok(field)
}
