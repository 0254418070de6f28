//! Measured quantities along a run: energies, extremal singular values,
//! PDE residuals of the closed `(r, θ)` system, affine-limit residuals,
//! empirical Hölder seminorms and decay-rate fits.

mod fit;
mod holder;

use std::io::Write;

use crate::field::{gradient, laplacian, Grid, MapField};
use crate::flow::FlowKind;
use crate::kinematics::{svd2, trace_rotation, wrap_angle};
use crate::{Mat2, Result, Vec2};

pub use fit::{convergence_order, fit_decay_rate, DecayFit};
pub use holder::{
    holder_seminorm, write_holder_csv, HolderOptions, HolderReport, Quantity, SpaceTimeSamples,
    ValueKind,
};

/// Column order of the diagnostics CSV.
pub const CSV_HEADER: &str = "t,E,q,lambda_min,lambda_max,r_min,r_max,dE_dt_lhs,dE_dt_rhs,residual_theta,residual_r,affine_residual,min_det";

/// One time sample of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: u64,
    /// `½∫|Du|²`
    pub energy: f64,
    /// `∫|Δu|²`
    pub q: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub min_det: f64,
    /// Backward difference of `E` against the previous record; `None` on the
    /// first record.
    pub de_dt_lhs: Option<f64>,
    /// `−∫F(Δu)²` with the running flow's coefficient.
    pub de_dt_rhs: f64,
    pub residual_theta: f64,
    pub residual_r: f64,
    /// `sup |v − v̄|`
    pub affine_residual: f64,
    /// Grid node where `lambda_min` is attained.
    pub lambda_min_at: (usize, usize),
}

/// Pointwise fields shared by the record computation.
struct Snapshot {
    du: Vec<Mat2>,
    lap: Vec<Vec2>,
}

impl Snapshot {
    fn new(field: &MapField) -> Self {
        Self {
            du: gradient(field),
            lap: laplacian(field),
        }
    }
}

/// `F = 1/(p² + s²)` for the paper flow, `1` for harmonic map heat flow.
fn coefficient(kind: FlowKind, du: &Mat2) -> f64 {
    match kind {
        FlowKind::Paper => {
            let (p, s) = trace_rotation(du);
            1.0 / (p * p + s * s)
        }
        FlowKind::HarmonicHeat => 1.0,
    }
}

pub fn energy(field: &MapField) -> f64 {
    let e: Vec<f64> = gradient(field).iter().map(|m| 0.5 * m.norm_squared()).collect();
    field.grid().integrate(&e)
}

pub fn second_energy(field: &MapField) -> f64 {
    let q: Vec<f64> = laplacian(field).iter().map(|l| l.norm_squared()).collect();
    field.grid().integrate(&q)
}

/// Grid sup norms of `Pθ` and of `Pr − (−|Dθ|²/r − 2|Dr|²/r³ + 2 Dr×Dθ/r²)`,
/// with `P = ∂t − FΔ`, `F = r⁻²` and `∂t` taken from the semi-discrete
/// velocity of `kind`.
pub fn rtheta_residuals(field: &MapField, kind: FlowKind) -> (f64, f64) {
    let snap = Snapshot::new(field);
    rtheta_residuals_from(field.grid(), &snap, kind)
}

fn rtheta_residuals_from(grid: &Grid, snap: &Snapshot, kind: FlowKind) -> (f64, f64) {
    let velocity: Vec<Vec2> = snap
        .du
        .iter()
        .zip(&snap.lap)
        .map(|(du, l)| l * coefficient(kind, du))
        .collect();
    let ddu = grid.jacobian(&velocity);
    let n = grid.len();
    let mut r = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    let mut rdot = Vec::with_capacity(n);
    let mut thdot = Vec::with_capacity(n);
    for (du, dt) in snap.du.iter().zip(&ddu) {
        let (p, s) = trace_rotation(du);
        let (pd, sd) = trace_rotation(dt);
        let rr = p.hypot(s);
        r.push(rr);
        theta.push(s.atan2(p));
        rdot.push((p * pd + s * sd) / rr);
        thdot.push((p * sd - s * pd) / (rr * rr));
    }
    let wrapped = |a: f64, b: f64| wrap_angle(a - b);
    let dr = grid.gradient_scalar(&r);
    let dth = grid.gradient_with(&theta, wrapped);
    let lr = grid.laplacian_scalar(&r);
    let lth = grid.laplacian_with(&theta, wrapped);

    let (mut res_theta, mut res_r) = (0.0f64, 0.0f64);
    for k in 0..n {
        let rk = r[k];
        let f = 1.0 / (rk * rk);
        let cross = dr[k][0] * dth[k][1] - dr[k][1] * dth[k][0];
        let rhs = -dth[k].norm_squared() / rk - 2.0 * dr[k].norm_squared() / rk.powi(3) + 2.0 * cross / (rk * rk);
        res_theta = res_theta.max((thdot[k] - f * lth[k]).abs());
        res_r = res_r.max((rdot[k] - f * lr[k] - rhs).abs());
    }
    (res_theta, res_r)
}

impl DiagnosticsRecord {
    /// Measures `field` at `step`; `prev` supplies the backward difference
    /// of the energy.
    pub fn compute(field: &MapField, kind: FlowKind, step: u64, prev: Option<&DiagnosticsRecord>) -> Self {
        let grid = field.grid();
        let snap = Snapshot::new(field);
        let n = grid.len();

        let mut e = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut diss = Vec::with_capacity(n);
        let (mut lmin, mut lmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut min_det = f64::INFINITY;
        let mut lambda_min_idx = 0;
        for (k, (du, l)) in snap.du.iter().zip(&snap.lap).enumerate() {
            let svd = svd2(du);
            if svd.lambda1 < lmin {
                lmin = svd.lambda1;
                lambda_min_idx = k;
            }
            lmax = lmax.max(svd.lambda2);
            let (p, s) = trace_rotation(du);
            let r = p.hypot(s);
            rmin = rmin.min(r);
            rmax = rmax.max(r);
            min_det = min_det.min(du.determinant());
            e.push(0.5 * du.norm_squared());
            let l2 = l.norm_squared();
            q.push(l2);
            diss.push(coefficient(kind, du) * l2);
        }
        let energy = grid.integrate(&e);
        let de_dt_lhs = prev.and_then(|p| {
            let dt = field.time - p.t;
            (dt > 0.0).then(|| (energy - p.energy) / dt)
        });
        let (residual_theta, residual_r) = rtheta_residuals_from(grid, &snap, kind);

        Self {
            t: field.time,
            step,
            energy,
            q: grid.integrate(&q),
            lambda_min: lmin,
            lambda_max: lmax,
            r_min: rmin,
            r_max: rmax,
            min_det,
            de_dt_lhs,
            de_dt_rhs: -grid.integrate(&diss),
            residual_theta,
            residual_r,
            affine_residual: affine_fit(field).residual,
            lambda_min_at: grid.coords(lambda_min_idx),
        }
    }

    /// Empirical envelope `max(λ_max, 1/λ_min, r_max, 1/r_min)`.
    pub fn lambda_envelope(&self) -> f64 {
        self.lambda_max
            .max(1.0 / self.lambda_min)
            .max(self.r_max)
            .max(1.0 / self.r_min)
    }

    pub fn is_finite(&self) -> bool {
        [
            self.energy,
            self.q,
            self.lambda_min,
            self.lambda_max,
            self.r_min,
            self.r_max,
            self.de_dt_rhs,
            self.residual_theta,
            self.residual_r,
            self.affine_residual,
            self.min_det,
        ]
        .iter()
        .all(|x| x.is_finite())
    }

    fn csv_row(&self) -> String {
        let lhs = self.de_dt_lhs.map(|x| format!("{x:?}")).unwrap_or_default();
        format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{:?},{:?},{:?},{:?}",
            self.t,
            self.energy,
            self.q,
            self.lambda_min,
            self.lambda_max,
            self.r_min,
            self.r_max,
            lhs,
            self.de_dt_rhs,
            self.residual_theta,
            self.residual_r,
            self.affine_residual,
            self.min_det
        )
    }
}

/// Writes records in [`CSV_HEADER`] order with round-trip float formatting.
/// A missing `dE_dt_lhs` is an empty field.
pub fn write_diagnostics_csv<W: Write>(records: &[DiagnosticsRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Comparison of `ΔE/Δt` with the trapezoidal mean of `−∫F(Δu)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    /// `discrepancy / max(|lhs|, |rhs|)`, zero when both vanish.
    pub relative: f64,
}

pub fn energy_identity_check(a: &DiagnosticsRecord, b: &DiagnosticsRecord) -> EnergyIdentity {
    let dt = b.t - a.t;
    let lhs = if dt > 0.0 { (b.energy - a.energy) / dt } else { 0.0 };
    let rhs = 0.5 * (a.de_dt_rhs + b.de_dt_rhs);
    let discrepancy = (lhs - rhs).abs();
    let scale = lhs.abs().max(rhs.abs());
    EnergyIdentity {
        lhs,
        rhs,
        discrepancy,
        relative: if scale > 0.0 { discrepancy / scale } else { 0.0 },
    }
}

/// Largest energy-identity discrepancy over consecutive record pairs.
pub fn max_energy_discrepancy(series: &[DiagnosticsRecord]) -> f64 {
    series
        .windows(2)
        .map(|w| energy_identity_check(&w[0], &w[1]).discrepancy)
        .fold(0.0, f64::max)
}

/// Index of the first record pair where `E` increases beyond
/// `rel_tol · E`, if any.
pub fn first_energy_increase(series: &[DiagnosticsRecord], rel_tol: f64) -> Option<usize> {
    series
        .windows(2)
        .position(|w| w[1].energy > w[0].energy + rel_tol * w[0].energy.abs())
}

/// Singular-value bound tracking over a series.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub initial_min: f64,
    pub initial_max: f64,
    pub observed_min: f64,
    pub observed_max: f64,
    pub slack: f64,
    /// `max(0, λ_min(0) − min_t λ_min(t))`
    pub lower_excursion: f64,
    /// `max(0, max_t λ_max(t) − λ_max(0))`
    pub upper_excursion: f64,
    /// Time and grid node of the smallest `λ_min`.
    pub worst_lower: (f64, (usize, usize)),
    pub worst_upper_time: f64,
    pub ok: bool,
}

/// Checks `min_t λ_min(t) ≥ λ_min(0) − slack` and
/// `max_t λ_max(t) ≤ λ_max(0) + slack` with `slack = C·h²`; `C` defaults
/// to ten times the initial singular-value range.
pub fn bound_preservation(series: &[DiagnosticsRecord], h: f64, c_slack: Option<f64>) -> Option<BoundReport> {
    let first = series.first()?;
    let c = c_slack.unwrap_or(10.0 * (first.lambda_max - first.lambda_min));
    let slack = c * h * h;
    let worst_lo = series
        .iter()
        .min_by(|a, b| a.lambda_min.total_cmp(&b.lambda_min))?;
    let worst_hi = series
        .iter()
        .max_by(|a, b| a.lambda_max.total_cmp(&b.lambda_max))?;
    let lower_excursion = (first.lambda_min - worst_lo.lambda_min).max(0.0);
    let upper_excursion = (worst_hi.lambda_max - first.lambda_max).max(0.0);
    Some(BoundReport {
        initial_min: first.lambda_min,
        initial_max: first.lambda_max,
        observed_min: worst_lo.lambda_min,
        observed_max: worst_hi.lambda_max,
        slack,
        lower_excursion,
        upper_excursion,
        worst_lower: (worst_lo.t, worst_lo.lambda_min_at),
        worst_upper_time: worst_hi.t,
        ok: lower_excursion <= slack && upper_excursion <= slack,
    })
}

/// Best affine approximation `x ↦ A x + y` of a discrete map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFit {
    /// Always the class's linear part: periodicity of `v` forces it.
    pub a: Mat2,
    pub y: Vec2,
    /// `sup |v − y|`
    pub residual: f64,
    /// Mean of the central-difference `Dv`, zero up to round-off.
    pub gradient_mean: Mat2,
}

pub fn affine_fit(field: &MapField) -> AffineFit {
    let n = field.v.len() as f64;
    let y = field.v.iter().fold(Vec2::zeros(), |acc, v| acc + v) / n;
    let residual = field.v.iter().map(|v| (v - y).norm()).fold(0.0, f64::max);
    let dv = field.grid().jacobian(&field.v);
    let gradient_mean = dv.iter().fold(Mat2::zeros(), |acc, m| acc + m) / n;
    AffineFit {
        a: *field.pair().linear_part(),
        y,
        residual,
        gradient_mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_maps::{build_map, ModeSpec, Preset};
    use crate::lattice::TorusPair;
    use std::f64::consts::PI;

    fn single_mode(n: usize, eps: f64) -> MapField {
        build_map(TorusPair::unit_identity(), &[ModeSpec::new([1, 0], [eps, 0.0], 0.0)], n, n).unwrap()
    }

    #[test]
    fn energy_of_affine_maps() {
        let f = MapField::affine(Preset::Shear.pair(), 16, 16).unwrap();
        assert_eq!(energy(&f), 1.5);
        let id = MapField::affine(TorusPair::unit_identity(), 16, 16).unwrap();
        assert_eq!(energy(&id), 1.0);
        assert_eq!(second_energy(&id), 0.0);
    }

    #[test]
    fn energy_of_single_mode() {
        let eps = 0.02;
        let exact = 1.0 + eps * eps * PI * PI;
        let e64 = (energy(&single_mode(64, eps)) - exact).abs();
        let e128 = (energy(&single_mode(128, eps)) - exact).abs();
        assert!(e64 < 5e-5 && e128 < e64 / 3.5, "{e64} {e128}");
    }

    #[test]
    fn second_energy_of_single_mode_converges() {
        let eps = 0.02;
        let exact = 0.5 * (4.0 * PI * PI).powi(2) * eps * eps;
        let err = |n| (second_energy(&single_mode(n, eps)) - exact).abs() / exact;
        let (a, b, c) = (err(32), err(64), err(128));
        assert!(a < 1e-2);
        assert!(convergence_order(a, b) > 1.9 && convergence_order(b, c) > 1.9);
    }

    #[test]
    fn affine_fit_residuals() {
        let f = MapField::affine(Preset::Shear.pair(), 16, 16).unwrap();
        let fit = affine_fit(&f);
        assert_eq!(fit.residual, 0.0);
        assert_eq!(fit.a, *Preset::Shear.pair().linear_part());

        let eps = 0.03;
        let fit = affine_fit(&single_mode(64, eps));
        assert!((fit.residual - eps).abs() < 1e-12);
        assert!(fit.gradient_mean.amax() < 1e-15);
    }

    #[test]
    fn record_of_affine_map() {
        let f = MapField::affine(Preset::Shear.pair(), 16, 16).unwrap();
        let rec = DiagnosticsRecord::compute(&f, FlowKind::Paper, 0, None);
        let s = svd2(Preset::Shear.pair().linear_part());
        assert!((rec.lambda_min - s.lambda1).abs() < 1e-15);
        assert!((rec.lambda_max - s.lambda2).abs() < 1e-15);
        assert_eq!(rec.q, 0.0);
        assert_eq!(rec.de_dt_rhs, 0.0);
        assert_eq!(rec.residual_theta, 0.0);
        assert_eq!(rec.residual_r, 0.0);
        assert!(rec.de_dt_lhs.is_none());
        assert!(rec.is_finite());
        // r = λ1 + λ2 ≈ 2.236 dominates 1/λ1 ≈ 1.618 for the golden shear
        assert!((rec.lambda_envelope() - (s.lambda1 + s.lambda2)).abs() < 1e-12);
    }

    #[test]
    fn dissipation_is_nonpositive() {
        for p in Preset::ALL {
            let f = p.build(32).unwrap();
            for kind in [FlowKind::Paper, FlowKind::HarmonicHeat] {
                assert!(DiagnosticsRecord::compute(&f, kind, 0, None).de_dt_rhs <= 0.0);
            }
        }
    }

    #[test]
    fn grid_residuals_shrink_under_refinement() {
        let res = |n| rtheta_residuals(&Preset::IdentityPerturbed.build(n).unwrap(), FlowKind::Paper);
        let (t32, r32) = res(32);
        let (t64, r64) = res(64);
        assert!(convergence_order(t32, t64) > 1.8, "{t32} {t64}");
        assert!(convergence_order(r32, r64) > 1.8, "{r32} {r64}");
    }

    #[test]
    fn energy_identity_on_constant_records() {
        let f = MapField::affine(TorusPair::unit_identity(), 8, 8).unwrap();
        let a = DiagnosticsRecord::compute(&f, FlowKind::Paper, 0, None);
        let mut b = a.clone();
        b.t = 1.0;
        let id = energy_identity_check(&a, &b);
        assert_eq!(id.discrepancy, 0.0);
        assert_eq!(id.relative, 0.0);
    }

    #[test]
    fn bound_report_flags_excursions() {
        let f = Preset::Shear.build(16).unwrap();
        let a = DiagnosticsRecord::compute(&f, FlowKind::Paper, 0, None);
        let mut b = a.clone();
        b.t = 1.0;
        b.lambda_min = a.lambda_min - 0.1;
        b.lambda_min_at = (3, 4);
        let report = bound_preservation(&[a.clone(), b], 1.0 / 16.0, None).unwrap();
        assert!(!report.ok);
        assert!((report.lower_excursion - 0.1).abs() < 1e-12);
        assert_eq!(report.worst_lower, (1.0, (3, 4)));

        let report = bound_preservation(&[a.clone(), a], 1.0 / 16.0, None).unwrap();
        assert!(report.ok);
        assert!(bound_preservation(&[], 0.1, None).is_none());
    }

    #[test]
    fn csv_layout() {
        let f = MapField::affine(TorusPair::unit_identity(), 8, 8).unwrap();
        let a = DiagnosticsRecord::compute(&f, FlowKind::Paper, 0, None);
        let mut out = Vec::new();
        write_diagnostics_csv(&[a], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 13);
        assert_eq!(row[0], "0.0");
        assert_eq!(row[1], "1.0");
        assert_eq!(row[7], "");
    }
}
