//! Explicit time integration of `∂t u = F(Du) Δu` and of the harmonic map
//! heat flow `∂t u = Δu`.
//!
//! Only the periodic part `v` moves: `Δ(Bx) = 0`. `F` uses the same central
//! difference `Du` as the diagnostics, and `Δ` the compact stencil.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diagnostics::DiagnosticsRecord;
use crate::field::MapField;
use crate::initial_maps::{check_diffeomorphism, DIFFEO_TOL};
use crate::kinematics::trace_rotation;
use crate::{Error, Mat2, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowKind {
    /// `∂t u = Δu / (|Du|² + 2 det Du)`
    Paper,
    /// `∂t u = Δu`
    HarmonicHeat,
}

impl FlowKind {
    pub fn name(&self) -> &'static str {
        match self {
            FlowKind::Paper => "paper",
            FlowKind::HarmonicHeat => "hmhf",
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper_flow" => Ok(FlowKind::Paper),
            "hmhf" | "harmonic_heat_flow" => Ok(FlowKind::HarmonicHeat),
            _ => Err(Error::Config {
                line: 0,
                msg: format!("unknown flow kind `{s}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stepper {
    Euler,
    /// Explicit midpoint.
    Rk2,
}

impl FromStr for Stepper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Stepper::Euler),
            "rk2" => Ok(Stepper::Rk2),
            _ => Err(Error::Config {
                line: 0,
                msg: format!("unknown stepper `{s}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub flow_kind: FlowKind,
    /// Fraction of the stability limit, in `(0, 1]`.
    pub cfl_safety: f64,
    pub t_end: f64,
    pub stepper: Stepper,
    /// Steps between field snapshots; 0 disables snapshots.
    pub snapshot_stride: u64,
    /// Steps between diagnostics records.
    pub diagnostics_stride: u64,
    /// Stop once `q ≤ q_tol · q(0)`.
    pub q_tol: f64,
    pub max_steps: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            flow_kind: FlowKind::Paper,
            cfl_safety: 0.5,
            t_end: 1.0,
            stepper: Stepper::Rk2,
            snapshot_stride: 0,
            diagnostics_stride: 10,
            q_tol: 1e-12,
            max_steps: u64::MAX,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| {
            Err(Error::Config {
                line: 0,
                msg: msg.to_string(),
            })
        };
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad("t_end must be positive");
        }
        if self.diagnostics_stride == 0 {
            return bad("diagnostics_stride must be at least 1");
        }
        if !(self.q_tol >= 0.0) {
            return bad("q_tol must be nonnegative");
        }
        Ok(())
    }
}

/// First grid point where `det Du ≤ 0` was observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degeneracy {
    pub step: u64,
    pub time: f64,
    pub at: (usize, usize),
    pub det: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub field: MapField,
    pub step_count: u64,
    pub degenerate_flag: bool,
    pub first_degeneracy: Option<Degeneracy>,
}

impl FlowState {
    pub fn new(field: MapField) -> Self {
        Self {
            field,
            step_count: 0,
            degenerate_flag: false,
            first_degeneracy: None,
        }
    }

    fn flag(&mut self, at: usize, det: f64) {
        self.degenerate_flag = true;
        if self.first_degeneracy.is_none() {
            self.first_degeneracy = Some(Degeneracy {
                step: self.step_count,
                time: self.field.time,
                at: self.field.grid().coords(at),
                det,
            });
        }
    }
}

/// Velocity field and the pointwise data needed for step control.
struct Evaluation {
    velocity: Vec<Vec2>,
    /// Largest finite coefficient, or `None` if some coefficient blew up.
    max_f: Option<f64>,
    min_det: f64,
    min_det_at: usize,
}

fn evaluate(field: &MapField, v: &[Vec2], kind: FlowKind) -> Evaluation {
    let grid = field.grid();
    let b = *field.pair().linear_part();
    let du = grid.jacobian(v);
    let lap = grid.laplacian_vector(v);
    let per_point: Vec<(Vec2, f64, f64)> = du
        .par_iter()
        .zip(lap.par_iter())
        .map(|(dv, l)| {
            let m: Mat2 = b + dv;
            let f = match kind {
                FlowKind::Paper => {
                    let (p, s) = trace_rotation(&m);
                    1.0 / (p * p + s * s)
                }
                FlowKind::HarmonicHeat => 1.0,
            };
            (l * f, f, m.determinant())
        })
        .collect();
    let mut max_f = Some(0.0f64);
    let (mut min_det, mut min_det_at) = (f64::INFINITY, 0);
    let mut velocity = Vec::with_capacity(per_point.len());
    for (k, (w, f, det)) in per_point.into_iter().enumerate() {
        velocity.push(w);
        max_f = match max_f {
            Some(m) if f.is_finite() => Some(m.max(f)),
            _ => None,
        };
        if det < min_det {
            min_det = det;
            min_det_at = k;
        }
    }
    Evaluation {
        velocity,
        max_f,
        min_det,
        min_det_at,
    }
}

/// Step size from a coefficient bound: `cfl · 2 / (F_max · ρ)` with `ρ`
/// the Gershgorin bound of the discrete Laplacian. On orthogonal lattices
/// `ρ = 4(1/h1² + 1/h2²)`.
fn stable_dt(field: &MapField, max_f: f64, cfl: f64) -> f64 {
    cfl * 2.0 / (max_f * field.grid().laplacian_bound())
}

/// Outcome of [`max_stable_dt`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableStep {
    pub dt: f64,
    /// `det Du ≤ 0` somewhere or `F` unbounded; the bound fell back to `F = 1`
    /// if needed.
    pub degenerate: bool,
}

pub fn max_stable_dt(state: &FlowState, config: &FlowConfig) -> StableStep {
    let eval = evaluate(&state.field, &state.field.v, config.flow_kind);
    stable_step(&state.field, &eval, config.cfl_safety)
}

fn stable_step(field: &MapField, eval: &Evaluation, cfl: f64) -> StableStep {
    let degenerate = eval.min_det <= 0.0 || eval.max_f.is_none();
    let max_f = eval.max_f.filter(|f| *f > 0.0).unwrap_or(1.0);
    StableStep {
        dt: stable_dt(field, max_f, cfl),
        degenerate,
    }
}

fn axpy(v: &[Vec2], a: f64, w: &[Vec2]) -> Vec<Vec2> {
    v.par_iter().zip(w.par_iter()).map(|(x, y)| x + y * a).collect()
}

fn advance(state: &mut FlowState, dt: f64, kind: FlowKind, stepper: Stepper, first: Evaluation) {
    let field = &state.field;
    let update = match stepper {
        Stepper::Euler => first.velocity,
        Stepper::Rk2 => {
            let mid = axpy(&field.v, 0.5 * dt, &first.velocity);
            evaluate(field, &mid, kind).velocity
        }
    };
    let next = axpy(&state.field.v, dt, &update);
    state.field.v = next;
    state.field.time += dt;
    state.step_count += 1;
}

fn check_degeneracy(state: &mut FlowState, kind: FlowKind) {
    let eval = evaluate(&state.field, &state.field.v, kind);
    if eval.min_det <= 0.0 {
        state.flag(eval.min_det_at, eval.min_det);
    }
}

/// Advances by `dt` and raises the degeneracy flag if `det Du ≤ 0` anywhere
/// afterwards.
pub fn step(state: &mut FlowState, dt: f64, kind: FlowKind, stepper: Stepper) {
    let first = evaluate(&state.field, &state.field.v, kind);
    advance(state, dt, kind, stepper, first);
    check_degeneracy(state, kind);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `q ≤ q_tol · q(0)`
    Converged,
    EndTime,
    /// `det Du ≤ 0` under the paper flow.
    Degenerate,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: FlowState,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<MapField>,
    pub stop_reason: StopReason,
}

/// Integrates from `initial` until convergence, `t_end`, or degeneracy of
/// the paper flow. The harmonic map heat flow keeps running past
/// degeneracy, with the first occurrence recorded in the final state.
pub fn run(initial: MapField, config: &FlowConfig) -> Result<RunOutput> {
    config.validate()?;
    if config.flow_kind == FlowKind::Paper {
        let check = check_diffeomorphism(&initial);
        if check.min_det <= DIFFEO_TOL {
            return Err(Error::NotDiffeomorphism {
                min_det: check.min_det,
            });
        }
    }
    let kind = config.flow_kind;
    let mut state = FlowState::new(initial);
    let mut records = vec![DiagnosticsRecord::compute(&state.field, kind, 0, None)];
    let q0 = records[0].q;
    let mut snapshots = Vec::new();
    if config.snapshot_stride > 0 {
        snapshots.push(state.field.clone());
    }

    let push_record = |records: &mut Vec<DiagnosticsRecord>, state: &FlowState| {
        let rec = DiagnosticsRecord::compute(&state.field, kind, state.step_count, records.last());
        records.push(rec);
    };

    let mut eval = evaluate(&state.field, &state.field.v, kind);
    let stop_reason = loop {
        let last = records.last().expect("initial record");
        if last.step == state.step_count && last.q <= config.q_tol * q0 {
            break StopReason::Converged;
        }
        if eval.min_det <= 0.0 {
            state.flag(eval.min_det_at, eval.min_det);
            if kind == FlowKind::Paper {
                break StopReason::Degenerate;
            }
        }
        let remaining = config.t_end - state.field.time;
        if remaining <= 1e-14 * config.t_end {
            break StopReason::EndTime;
        }
        if state.step_count >= config.max_steps {
            break StopReason::MaxSteps;
        }
        let dt = stable_step(&state.field, &eval, config.cfl_safety).dt.min(remaining);
        advance(&mut state, dt, kind, config.stepper, eval);
        if state.step_count.is_multiple_of(config.diagnostics_stride) {
            push_record(&mut records, &state);
        }
        if config.snapshot_stride > 0 && state.step_count.is_multiple_of(config.snapshot_stride) {
            snapshots.push(state.field.clone());
        }
        eval = evaluate(&state.field, &state.field.v, kind);
    };
    if records.last().map(|r| r.step) != Some(state.step_count) {
        push_record(&mut records, &state);
    }
    Ok(RunOutput {
        final_state: state,
        diagnostics: records,
        snapshots,
        stop_reason,
    })
}
