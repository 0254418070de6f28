//! The `run`, `verify` and `study` entry points.
//!
//! Each command writes its report to the given writers and returns a process
//! exit code, so the thin binary only parses arguments.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::diagnostics::{
    bound_preservation, convergence_order, fit_decay_rate, holder_seminorm, max_energy_discrepancy,
    write_diagnostics_csv, HolderOptions, Quantity, SpaceTimeSamples,
};
use crate::field::write_dump;
use crate::flow::{max_stable_dt, run, FlowKind, FlowState, RunOutput, StopReason};
use crate::initial_maps::Preset;
use crate::kinematics::svd2;
use crate::oracle::{run_suite, JetSource};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub flow: Option<FlowKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.preset {
            cfg.preset = Some(p);
        }
        if cfg.preset.is_none() && cfg.modes.is_empty() && cfg.random_modes.is_none() && self.config.is_none() {
            cfg.preset = Some(Preset::IdentityPerturbed);
        }
        if let Some(k) = self.flow {
            cfg.flow.flow_kind = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        Ok(cfg)
    }
}

/// Runs one flow and writes `diagnostics.csv`, `snapshots/*.txt` and
/// `summary.txt` under the output directory.
pub fn cmd_run(opts: &Overrides, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "invalid configuration: {e}");
            return EXIT_INVALID;
        }
    };
    match run_config(&cfg) {
        Ok(output) => match write_run(&cfg, &output, out) {
            Ok(()) if output.stop_reason == StopReason::Degenerate => {
                let _ = writeln!(err, "paper flow degenerated: det Du ≤ 0");
                EXIT_DEGENERATE
            }
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_FAILURE
            }
        },
        Err(e @ (Error::NotDiffeomorphism { .. } | Error::Config { .. })) => {
            let _ = writeln!(err, "invalid configuration: {e}");
            EXIT_INVALID
        }
        Err(e @ (Error::Resolution { .. } | Error::NotHomomorphism | Error::SingularClass)) => {
            let _ = writeln!(err, "invalid configuration: {e}");
            EXIT_INVALID
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn run_config(cfg: &RunConfig) -> Result<RunOutput> {
    run(cfg.initial_map()?, &cfg.flow)
}

fn write_run(cfg: &RunConfig, output: &RunOutput, out: &mut dyn Write) -> Result<()> {
    let dir = &cfg.output;
    fs::create_dir_all(dir.join("snapshots"))?;
    write_diagnostics_csv(&output.diagnostics, BufWriter::new(File::create(dir.join("diagnostics.csv"))?))?;
    for snap in &output.snapshots {
        let step = output
            .diagnostics
            .iter()
            .find(|r| r.t == snap.time)
            .map(|r| r.step.to_string())
            .unwrap_or_else(|| format!("t{:.6}", snap.time));
        let path = dir.join("snapshots").join(format!("snapshot_{step}.txt"));
        write_dump(snap, BufWriter::new(File::create(path)?))?;
    }
    let mut final_dump = BufWriter::new(File::create(dir.join("final.txt"))?);
    write_dump(&output.final_state.field, &mut final_dump)?;
    final_dump.flush()?;
    let summary = summarize(cfg, output);
    fs::write(dir.join("summary.txt"), &summary)?;
    out.write_all(summary.as_bytes())?;
    Ok(())
}

/// Human-readable run summary.
pub fn summarize(cfg: &RunConfig, output: &RunOutput) -> String {
    let series = &output.diagnostics;
    let last = series.last().expect("runs record at least one row");
    let field = &output.final_state.field;
    let b = *field.pair().linear_part();
    let svd = svd2(&b);
    let qs: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.q)).collect();
    let fit = fit_decay_rate(&qs);
    let bounds = bound_preservation(series, field.grid().h(), None);
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<22} {v}\n"));
    line("flow", cfg.flow.flow_kind.to_string());
    line("resolution", format!("{} x {}", field.n1(), field.n2()));
    line("stop_reason", format!("{:?}", output.stop_reason));
    line("steps", output.final_state.step_count.to_string());
    line("t_final", format!("{:?}", field.time));
    line("energy", format!("{:?}", last.energy));
    line("q", format!("{:?}", last.q));
    line("affine_residual", format!("{:?}", last.affine_residual));
    line("class_singular_values", format!("{:?} {:?}", svd.lambda1, svd.lambda2));
    line("lambda_range", format!("{:?} {:?}", last.lambda_min, last.lambda_max));
    line(
        "decay_rate",
        match &fit {
            Ok(f) => format!("{:?} (R2 {:?}, {} points)", f.omega, f.quality, f.points),
            Err(e) => format!("n/a ({e})"),
        },
    );
    line(
        "bound_preservation",
        match &bounds {
            Some(b) => format!(
                "{} (lower excursion {:?}, upper excursion {:?}, slack {:?})",
                if b.ok { "ok" } else { "violated" },
                b.lower_excursion,
                b.upper_excursion,
                b.slack
            ),
            None => "n/a".into(),
        },
    );
    line(
        "min_det",
        format!("{:?}", series.iter().map(|r| r.min_det).fold(f64::INFINITY, f64::min)),
    );
    line(
        "first_degeneracy",
        match output.final_state.first_degeneracy {
            Some(d) => format!("step {} t {:?} at {:?} det {:?}", d.step, d.time, d.at, d.det),
            None => "none".into(),
        },
    );
    s
}

pub fn cmd_verify(trials: usize, seed: u64, tolerance: f64, source: JetSource, out: &mut dyn Write) -> i32 {
    if trials == 0 {
        let _ = writeln!(out, "trials must be at least 1");
        return EXIT_INVALID;
    }
    let report = run_suite(trials, seed, tolerance, source);
    let _ = write!(out, "seed {seed}\n{}", report.table());
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    /// Energy-identity and `(r, θ)` residual orders under refinement.
    Refinement,
    /// Parabolic Hölder seminorm of `F` across resolutions.
    Holder,
    /// Fitted decay rate of `q` across resolutions.
    Decay,
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refinement" => Ok(StudyKind::Refinement),
            "holder" => Ok(StudyKind::Holder),
            "decay" => Ok(StudyKind::Decay),
            _ => Err(Error::Config {
                line: 0,
                msg: format!("unknown study `{s}`"),
            }),
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::Refinement => "refinement",
            StudyKind::Holder => "holder",
            StudyKind::Decay => "decay",
        })
    }
}

pub const STUDY_RESOLUTIONS: [usize; 3] = [32, 64, 128];

/// Physical time between snapshots in the Hölder study; parabolic
/// cylinders of radius `R` need `R² ≥ 2τ`.
pub const HOLDER_SNAPSHOT_INTERVAL: f64 = 0.0015;

/// Radii `0.5, 0.25, 0.125, 0.0625` are all resolvable at `n = 32`.
pub fn holder_options() -> HolderOptions {
    HolderOptions {
        r_max: 0.5,
        ..Default::default()
    }
}

/// One resolution of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyCell {
    pub n: usize,
    pub h: f64,
    /// Study-specific measurements in the order of [`study_columns`].
    pub values: Vec<f64>,
    pub error: Option<String>,
}

pub fn study_columns(kind: StudyKind) -> &'static [&'static str] {
    match kind {
        StudyKind::Refinement => &["energy_discrepancy", "residual_theta", "residual_r"],
        StudyKind::Holder => &["alpha", "seminorm", "radii"],
        StudyKind::Decay => &["omega", "quality", "points"],
    }
}

fn study_cell(kind: StudyKind, base: &RunConfig, n: usize) -> Result<Vec<f64>> {
    let mut cfg = base.clone();
    cfg.n1 = n;
    cfg.n2 = n;
    match kind {
        StudyKind::Refinement => {
            // dt ∝ h² and a fixed stride make the record interval shrink like
            // h² too, so the energy-identity quadrature error is O(h²)
            let out = run_config(&cfg)?;
            let series = &out.diagnostics;
            let sup = |f: fn(&crate::diagnostics::DiagnosticsRecord) -> f64| {
                series.iter().map(f).fold(0.0, f64::max)
            };
            Ok(vec![
                max_energy_discrepancy(series),
                sup(|r| r.residual_theta),
                sup(|r| r.residual_r),
            ])
        }
        StudyKind::Holder => {
            let initial = cfg.initial_map()?;
            let dt0 = max_stable_dt(&FlowState::new(initial.clone()), &cfg.flow).dt;
            cfg.flow.snapshot_stride = ((HOLDER_SNAPSHOT_INTERVAL / dt0).round() as u64).max(1);
            let out = run(initial, &cfg.flow)?;
            let samples = SpaceTimeSamples::from_snapshots(&out.snapshots, Quantity::Diffusion)?;
            let rep = holder_seminorm(&samples, 0.5, Quantity::Diffusion.kind(), &holder_options())?;
            Ok(vec![0.5, rep.seminorm, rep.radii.len() as f64])
        }
        StudyKind::Decay => {
            let out = run_config(&cfg)?;
            let qs: Vec<(f64, f64)> = out.diagnostics.iter().map(|r| (r.t, r.q)).collect();
            let fit = fit_decay_rate(&qs)?;
            Ok(vec![fit.omega, fit.quality, fit.points as f64])
        }
    }
}

/// Runs one study over `resolutions`; failing cells are kept with their
/// error message.
pub fn run_study(kind: StudyKind, base: &RunConfig, resolutions: &[usize]) -> Vec<StudyCell> {
    resolutions
        .par_iter()
        .map(|&n| {
            let h = base.pair().map(|p| p.domain().basis().amax() / n as f64).unwrap_or(f64::NAN);
            match study_cell(kind, base, n) {
                Ok(values) => StudyCell { n, h, values, error: None },
                Err(e) => StudyCell { n, h, values: Vec::new(), error: Some(e.to_string()) },
            }
        })
        .collect()
}

/// Writes the combined study CSV. Consecutive cells also get observed
/// convergence orders (refinement) or relative changes (other studies).
pub fn write_study_csv<W: Write>(kind: StudyKind, cells: &[StudyCell], mut out: W) -> Result<()> {
    let cols = study_columns(kind);
    let mut header = vec!["n".to_string(), "h".to_string()];
    header.extend(cols.iter().map(|c| c.to_string()));
    let derived = match kind {
        StudyKind::Refinement => "order",
        _ => "relative_change",
    };
    header.extend(cols.iter().map(|c| format!("{derived}_{c}")));
    header.push("error".into());
    writeln!(out, "{}", header.join(","))?;
    for (k, cell) in cells.iter().enumerate() {
        let mut row = vec![cell.n.to_string(), format!("{:?}", cell.h)];
        let prev = k.checked_sub(1).map(|p| &cells[p]);
        for c in 0..cols.len() {
            row.push(cell.values.get(c).map(|v| format!("{v:?}")).unwrap_or_default());
        }
        for c in 0..cols.len() {
            let pair = prev.and_then(|p| Some((*p.values.get(c)?, *cell.values.get(c)?)));
            row.push(match pair {
                Some((a, b)) if kind == StudyKind::Refinement => format!("{:?}", convergence_order(a, b)),
                Some((a, b)) => format!("{:?}", (b - a) / a.abs().max(f64::MIN_POSITIVE)),
                None => String::new(),
            });
        }
        row.push(cell.error.clone().unwrap_or_default().replace(',', ";"));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn cmd_study(kind: StudyKind, opts: &Overrides, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut cfg = match opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "invalid configuration: {e}");
            return EXIT_INVALID;
        }
    };
    if opts.config.is_none() {
        if opts.preset.is_none() {
            cfg.preset = Some(match kind {
                StudyKind::Decay | StudyKind::Holder => Preset::Shear,
                StudyKind::Refinement => Preset::IdentityPerturbed,
            });
        }
        let (t_end, q_tol) = match kind {
            StudyKind::Refinement => (0.1, 0.0),
            StudyKind::Holder => (0.3, 0.0),
            StudyKind::Decay => (50.0, 1e-12),
        };
        cfg.flow.t_end = t_end;
        cfg.flow.q_tol = q_tol;
    }
    let cells = run_study(kind, &cfg, &STUDY_RESOLUTIONS);
    let path = study_path(&cfg.output, kind);
    let written = fs::create_dir_all(&cfg.output)
        .map_err(Error::from)
        .and_then(|_| File::create(&path).map_err(Error::from))
        .and_then(|f| write_study_csv(kind, &cells, BufWriter::new(f)));
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_FAILURE;
    }
    let _ = write_study_csv(kind, &cells, &mut *out);
    if cells.iter().any(|c| c.error.is_some()) {
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}

pub fn study_path(dir: &Path, kind: StudyKind) -> PathBuf {
    dir.join(format!("study_{kind}.csv"))
}
