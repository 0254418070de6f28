//! Empirical parabolic Hölder seminorms.
//!
//! For a space-time sample `f(x, t)` the seminorm at exponent `α` is
//! estimated as the sup over sampled backward cylinders
//! `Q(X₀, R) = {|x − x₀| < R, t₀ − R² < t ≤ t₀}` of `osc_Q f / R^α`, over
//! dyadic radii that the grid and the snapshot spacing can resolve.

use std::io::Write;

use crate::field::{gradient, Grid, MapField};
use crate::kinematics::{trace_rotation, wrap_angle};
use crate::{Error, Result, Vec2};

/// How oscillation is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Real,
    /// Values in `S¹`, lifted locally around the cylinder centre.
    Angle,
}

/// Pointwise quantities that can be sampled from snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `F = r⁻²`
    Diffusion,
    R,
    Theta,
}

impl Quantity {
    pub fn kind(&self) -> ValueKind {
        match self {
            Quantity::Theta => ValueKind::Angle,
            _ => ValueKind::Real,
        }
    }
}

/// Snapshots of a scalar field on a fixed grid.
#[derive(Debug, Clone)]
pub struct SpaceTimeSamples {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SpaceTimeSamples {
    pub fn from_snapshots(snapshots: &[MapField], quantity: Quantity) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::InsufficientData("no snapshots".into()))?;
        let grid = *first.grid();
        let mut times = Vec::with_capacity(snapshots.len());
        let mut values = Vec::with_capacity(snapshots.len());
        for s in snapshots {
            if *s.grid() != grid {
                return Err(Error::InsufficientData("snapshots on different grids".into()));
            }
            times.push(s.time);
            values.push(
                gradient(s)
                    .iter()
                    .map(|du| {
                        let (p, q) = trace_rotation(du);
                        match quantity {
                            Quantity::Diffusion => 1.0 / (p * p + q * q),
                            Quantity::R => p.hypot(q),
                            Quantity::Theta => q.atan2(p),
                        }
                    })
                    .collect(),
            );
        }
        Ok(Self { grid, times, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderOptions {
    /// Largest radius; halved repeatedly.
    pub r_max: f64,
    /// At most this many radii are used.
    pub max_radii: usize,
    /// Fewer resolvable radii than this is an error.
    pub min_radii: usize,
    /// Spatial centres per lattice direction.
    pub centers_per_dim: usize,
    /// Number of snapshot times used as cylinder tops.
    pub time_centers: usize,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self {
            r_max: 0.25,
            max_radii: 6,
            min_radii: 4,
            centers_per_dim: 8,
            time_centers: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub alpha: f64,
    pub seminorm: f64,
    /// `(R, max osc over cylinders of radius R)`
    pub radii: Vec<(f64, f64)>,
    /// Angle cylinders skipped because a neighbour jump exceeded `π/2`.
    pub discarded: usize,
    pub cylinders: usize,
}

/// Dyadic radii resolvable by the grid (`R ≥ 2h`) and by the snapshot
/// spacing (`R²` spans at least two snapshot intervals).
fn resolvable_radii(samples: &SpaceTimeSamples, opts: &HolderOptions) -> Vec<f64> {
    let h = samples.grid.h();
    let dt_max = samples
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    (0..opts.max_radii)
        .map(|k| opts.r_max / 2f64.powi(k as i32))
        .take_while(|&r| r >= 2.0 * h && r * r >= 2.0 * dt_max)
        .collect()
}

pub fn holder_seminorm(
    samples: &SpaceTimeSamples,
    alpha: f64,
    kind: ValueKind,
    opts: &HolderOptions,
) -> Result<HolderReport> {
    if samples.times.len() < 2 {
        return Err(Error::InsufficientData("need at least two snapshots".into()));
    }
    let radii = resolvable_radii(samples, opts);
    if radii.len() < opts.min_radii {
        return Err(Error::InsufficientResolution(format!(
            "{} dyadic radii resolvable, need {}",
            radii.len(),
            opts.min_radii
        )));
    }
    let grid = &samples.grid;
    let (n1, n2) = (grid.n1, grid.n2);
    let basis = *grid.domain().basis();
    let inv = *grid.domain().inverse();

    // Tops of cylinders: evenly spaced snapshots, starting where the largest
    // cylinder fits inside the sampled time range when possible.
    let t_first = samples.times[0] + radii[0] * radii[0];
    let last = samples.times.len() - 1;
    let start = samples.times.iter().position(|&t| t >= t_first).unwrap_or(last);
    let nt = opts.time_centers.max(1);
    let mut tops: Vec<usize> = (0..nt)
        .map(|k| {
            if nt == 1 {
                last
            } else {
                start + (last - start) * k / (nt - 1)
            }
        })
        .collect();
    tops.dedup();

    let c = opts.centers_per_dim.max(1);
    let centers: Vec<(usize, usize)> = (0..c)
        .flat_map(|a| (0..c).map(move |b| (a * n1 / c, b * n2 / c)))
        .collect();

    let wrapped = |a: f64, b: f64| match kind {
        ValueKind::Real => a - b,
        ValueKind::Angle => wrap_angle(a - b),
    };

    let mut out = Vec::with_capacity(radii.len());
    let mut discarded = 0;
    let mut cylinders = 0;
    for &radius in &radii {
        // Index-space half-widths covering the Euclidean ball.
        let m1 = (radius * inv.row(0).norm() * n1 as f64).ceil() as isize;
        let m2 = (radius * inv.row(1).norm() * n2 as f64).ceil() as isize;
        let offsets: Vec<(isize, isize)> = (-m1..=m1)
            .flat_map(|a| (-m2..=m2).map(move |b| (a, b)))
            .filter(|&(a, b)| {
                let x = basis * Vec2::new(a as f64 / n1 as f64, b as f64 / n2 as f64);
                x.norm() < radius
            })
            .collect();
        let mut max_osc = 0.0f64;
        for &top in &tops {
            let t0 = samples.times[top];
            let slices: Vec<&Vec<f64>> = samples
                .times
                .iter()
                .zip(&samples.values)
                .filter(|(&t, _)| t <= t0 && t > t0 - radius * radius)
                .map(|(_, v)| v)
                .collect();
            for &(ci, cj) in &centers {
                let anchor = samples.values[top][grid.index(ci, cj)];
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                let mut skip = false;
                'scan: for slice in &slices {
                    for &(a, b) in &offsets {
                        let i = (ci as isize + a).rem_euclid(n1 as isize) as usize;
                        let j = (cj as isize + b).rem_euclid(n2 as isize) as usize;
                        let val = slice[grid.index(i, j)];
                        if kind == ValueKind::Angle {
                            let ni = grid.index((i + 1) % n1, j);
                            let nj = grid.index(i, (j + 1) % n2);
                            let jump = wrapped(slice[ni], val).abs().max(wrapped(slice[nj], val).abs());
                            if jump > std::f64::consts::FRAC_PI_2 {
                                skip = true;
                                break 'scan;
                            }
                        }
                        let lifted = wrapped(val, anchor);
                        lo = lo.min(lifted);
                        hi = hi.max(lifted);
                    }
                }
                if skip {
                    discarded += 1;
                    continue;
                }
                cylinders += 1;
                max_osc = max_osc.max(hi - lo);
            }
        }
        out.push((radius, max_osc));
    }
    let seminorm = out
        .iter()
        .map(|&(r, osc)| osc / r.powf(alpha))
        .fold(0.0, f64::max);
    Ok(HolderReport {
        alpha,
        seminorm,
        radii: out,
        discarded,
        cylinders,
    })
}

/// Writes `alpha,R,osc,seminorm` rows for each report.
pub fn write_holder_csv<W: Write>(reports: &[HolderReport], mut out: W) -> Result<()> {
    writeln!(out, "alpha,R,osc,seminorm")?;
    for rep in reports {
        for &(r, osc) in &rep.radii {
            writeln!(out, "{:?},{:?},{:?},{:?}", rep.alpha, r, osc, rep.seminorm)?;
        }
    }
    Ok(())
}
