//! Runs a configuration file through the same path as `difflow run`.
//!
//! ```text
//! cargo run --release --example config_run -- crates/core/examples/configs/shear.cfg
//! ```

use std::path::PathBuf;

use difflow::cli::{cmd_run, Overrides};

fn main() {
    let config = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/shear.cfg")));
    let opts = Overrides {
        config: Some(config),
        out: Some(std::env::temp_dir().join("difflow-config-run")),
        ..Default::default()
    };
    let code = cmd_run(&opts, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
