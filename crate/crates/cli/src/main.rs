use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use epstrack::scenario::ModeName;
use epstrack::{parse_scenario, run, RunError};

/// Plan a continuous-curvature trajectory through waypoints and simulate
/// epsilon-point tracking of it.
#[derive(Parser, Debug)]
#[command(name = "epstrack", version)]
struct Cli {
    /// Scenario file (TOML)
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,

    /// Write the planned trajectory only, without simulating
    #[arg(long)]
    plan_only: bool,

    /// Tracking mode, overriding the scenario file
    #[arg(long, value_enum)]
    mode: Option<Mode>,

    /// Output directory, overriding the scenario's output_dir
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Reserved for perturbation sampling; runs are currently deterministic
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    /// Steer the epsilon-point onto the reference itself
    Plain,
    /// Steer the epsilon-point onto the epsilon-trajectory
    Eps,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("epstrack: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let mut scenario = parse_scenario(&cli.scenario)?;
    if let Some(mode) = cli.mode {
        scenario.override_mode(match mode {
            Mode::Plain => ModeName::Plain,
            Mode::Eps => ModeName::Eps,
        });
    }
    let out = cli.out.clone().unwrap_or_else(|| scenario.output_dir.clone());
    let summary = run(&scenario, &out, cli.plan_only)?;
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    if let Some(m) = summary.metrics {
        println!("final position error {:.3e} m (initial {:.3e} m)", m.final_err_pos, m.initial_err_pos);
    }
    Ok(())
}
