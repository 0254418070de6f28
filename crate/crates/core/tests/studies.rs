use difflow::cli::{run_study, write_study_csv, StudyKind};
use difflow::config::RunConfig;
use difflow::initial_maps::Preset;

#[test]
fn decay_rate_is_stable_across_resolutions() {
    let mut cfg = RunConfig::from_preset(Preset::Shear);
    cfg.flow.t_end = 50.0;
    cfg.flow.q_tol = 1e-10;
    cfg.flow.diagnostics_stride = 20;
    let cells = run_study(StudyKind::Decay, &cfg, &[16, 32, 64]);
    let omegas: Vec<f64> = cells.iter().map(|c| c.values[0]).collect();
    let hi = omegas.iter().copied().fold(0.0, f64::max);
    let lo = omegas.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi - lo < 0.1 * lo, "{omegas:?}");
    for c in &cells {
        assert!(c.error.is_none());
        assert!(c.values[1] > 0.99);
    }
    let mut csv = Vec::new();
    write_study_csv(StudyKind::Decay, &cells, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 4);
}

#[test]
fn failing_cells_are_kept() {
    let mut cfg = RunConfig::from_preset(Preset::Shear);
    cfg.flow.t_end = 1e-4;
    // too short a run for any decay fit
    let cells = run_study(StudyKind::Decay, &cfg, &[8, 16]);
    assert_eq!(cells.len(), 2);
    assert!(cells.iter().all(|c| c.error.is_some() && c.values.is_empty()));
}
