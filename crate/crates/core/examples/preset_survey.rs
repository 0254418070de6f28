//! Runs every preset to convergence at two resolutions and prints the bound
//! excursion, decay fit and affine residual of each run.

use std::time::Instant;

use difflow::diagnostics::{bound_preservation, fit_decay_rate};
use difflow::flow::{run, FlowConfig};
use difflow::initial_maps::Preset;

fn main() -> difflow::Result<()> {
    difflow::init_threads_from_env();
    let t_end: f64 = std::env::args().nth(1).map_or(20.0, |s| s.parse().expect("t_end"));
    for preset in Preset::ALL {
        for n in [32, 64] {
            let start = Instant::now();
            let cfg = FlowConfig {
                t_end,
                diagnostics_stride: (n * n / 256) as u64,
                ..Default::default()
            };
            let out = run(preset.build(n)?, &cfg)?;
            let series = &out.diagnostics;
            let h = out.final_state.field.grid().h();
            let bounds = bound_preservation(series, h, None).expect("nonempty series");
            let qs: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.q)).collect();
            let fit = fit_decay_rate(&qs)?;
            let last = series.last().expect("nonempty series");
            println!(
                "{preset:<20} n={n:<4} {:?} t={:.3} steps={} lower_exc={:.3e} upper_exc={:.3e} omega={:.4} R2={:.6} affine={:.3e} ({:.2?})",
                out.stop_reason,
                last.t,
                out.final_state.step_count,
                bounds.lower_excursion,
                bounds.upper_excursion,
                fit.omega,
                fit.quality,
                last.affine_residual,
                start.elapsed()
            );
        }
    }
    Ok(())
}
