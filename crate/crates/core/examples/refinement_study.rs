//! Grid-refinement study of the energy identity and the `(r, θ)` residuals
//! at n = 32, 64, 128.

use difflow::cli::{run_study, write_study_csv, StudyKind, STUDY_RESOLUTIONS};
use difflow::config::RunConfig;
use difflow::initial_maps::Preset;

fn main() -> difflow::Result<()> {
    let mut cfg = RunConfig::from_preset(Preset::IdentityPerturbed);
    cfg.flow.t_end = 0.1;
    cfg.flow.q_tol = 0.0;
    cfg.flow.diagnostics_stride = 10;
    let cells = run_study(StudyKind::Refinement, &cfg, &STUDY_RESOLUTIONS);
    write_study_csv(StudyKind::Refinement, &cells, std::io::stdout().lock())
}
