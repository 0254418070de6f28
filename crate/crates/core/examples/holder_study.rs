//! Empirical parabolic Hölder seminorms of `F`, `r` and `θ` along a shear run
//! at three resolutions.

use difflow::cli::{holder_options, HOLDER_SNAPSHOT_INTERVAL};
use difflow::diagnostics::{holder_seminorm, Quantity, SpaceTimeSamples};
use difflow::flow::{max_stable_dt, run, FlowConfig, FlowState};
use difflow::initial_maps::Preset;

fn main() -> difflow::Result<()> {
    for n in [32, 64, 128] {
        let field = Preset::Shear.build(n)?;
        let mut cfg = FlowConfig {
            t_end: 0.3,
            q_tol: 0.0,
            diagnostics_stride: u64::MAX,
            ..Default::default()
        };
        let dt = max_stable_dt(&FlowState::new(field.clone()), &cfg).dt;
        cfg.snapshot_stride = ((HOLDER_SNAPSHOT_INTERVAL / dt).round() as u64).max(1);
        let out = run(field, &cfg)?;
        for q in [Quantity::Diffusion, Quantity::R, Quantity::Theta] {
            let samples = SpaceTimeSamples::from_snapshots(&out.snapshots, q)?;
            for alpha in [0.25, 0.5, 0.75] {
                let rep = holder_seminorm(&samples, alpha, q.kind(), &holder_options())?;
                println!("n={n:<4} {q:?} α={alpha}: {:.4e} over {} cylinders", rep.seminorm, rep.cylinders);
            }
        }
    }
    Ok(())
}
