//! The diffusion flow against the harmonic map heat flow from the same
//! initial map, tracking the smallest Jacobian determinant.

use difflow::flow::{run, FlowConfig, FlowKind};
use difflow::initial_maps::{build_map, Preset};
use difflow::lattice::TorusPair;
use difflow::initial_maps::ModeSpec;

fn main() -> difflow::Result<()> {
    let sheared = build_map(
        TorusPair::unit_identity(),
        &[
            ModeSpec::new([0, 1], [0.9 / (2.0 * std::f64::consts::PI), 0.0], 0.0),
            ModeSpec::new([2, 1], [0.0, 0.03], 0.4),
        ],
        64,
        64,
    )?;
    let cases = [("large-gradient", Preset::LargeGradient.build(64)?), ("crafted shear", sheared)];
    for (name, field) in cases {
        for kind in [FlowKind::Paper, FlowKind::HarmonicHeat] {
            let cfg = FlowConfig {
                flow_kind: kind,
                t_end: 0.5,
                q_tol: 0.0,
                diagnostics_stride: 200,
                ..Default::default()
            };
            let out = run(field.clone(), &cfg)?;
            let trace: Vec<String> = out.diagnostics.iter().map(|r| format!("{:.4}", r.min_det)).collect();
            println!("{name} / {kind}: min det trace {}", trace.join(" "));
            if let Some(d) = out.final_state.first_degeneracy {
                println!("  degenerate at step {} (t = {:.4}) node {:?}", d.step, d.time, d.at);
            }
        }
    }
    Ok(())
}
