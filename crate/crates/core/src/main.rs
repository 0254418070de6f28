use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use difflow::cli::{cmd_run, cmd_study, cmd_verify, Overrides, StudyKind};
use difflow::flow::FlowKind;
use difflow::initial_maps::Preset;
use difflow::oracle::JetSource;

#[derive(Parser)]
#[command(version, about = "Diffusion flow of maps between flat 2-tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    flow: Option<FlowKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(self) -> Overrides {
        Overrides {
            config: self.config,
            preset: self.preset,
            flow: self.flow,
            seed: self.seed,
            out: self.out,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one flow and write diagnostics, snapshots and a summary.
    Run(RunArgs),
    /// Check the pointwise identities on seeded random jets.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Use jets without second and third derivatives.
        #[arg(long)]
        affine: bool,
    },
    /// Run a configuration at n = 32, 64, 128 and write a combined CSV.
    Study {
        kind: StudyKind,
        #[command(flatten)]
        args: RunArgs,
    },
}

fn main() -> ExitCode {
    difflow::init_threads_from_env();
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.command {
        Command::Run(args) => cmd_run(&args.overrides(), &mut out, &mut err),
        Command::Verify {
            trials,
            seed,
            tolerance,
            affine,
        } => {
            let source = if affine { JetSource::Affine } else { JetSource::Random };
            cmd_verify(trials, seed, tolerance, source, &mut out)
        }
        Command::Study { kind, args } => cmd_study(kind, &args.overrides(), &mut out, &mut err),
    };
    ExitCode::from(code as u8)
}
