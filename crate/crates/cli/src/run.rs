//! Plan, simulate and write a scenario's outputs.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use epstrack_core::ccplanner::{connect_waypoints, CCTrajectory, PlannerError};
use epstrack_core::epsilon_control::GainMatrix;
use epstrack_core::kinematics::BicycleState;
use epstrack_core::simulator::{
    convergence_metrics, initial_state_on_reference, lyapunov_violations, metrics::HEADING_SLACK,
    metrics::POINT_CONVERGED, run_simulation, ConvergenceMetrics, SimConfig, SimError, SimulationLog, VehicleState,
};
use thiserror::Error;

use crate::scenario::{Scenario, ScenarioError, Vehicle};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SIMULATION_FILE: &str = "simulation.csv";
pub const METRICS_FILE: &str = "metrics.txt";
pub const ECHO_FILE: &str = "scenario.toml";

pub const TRAJECTORY_COLUMNS: [&str; 13] =
    ["t", "x", "y", "xd", "yd", "xdd", "ydd", "xddd", "yddd", "psi", "kappa", "sigma", "segment_id"];
pub const SIMULATION_COLUMNS: [&str; 14] = [
    "t", "x", "y", "psi", "v", "omega_or_phi", "qe_x", "qe_y", "qer_x", "qer_y", "a", "alpha_or_xi", "err_pos", "err_psi",
];

/// Every failure, prefixed with the stage it happened in.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("parse: {0}")]
    Parse(#[from] ScenarioError),
    #[error("plan: {0}")]
    Plan(#[from] PlannerError),
    #[error("simulate: {0}")]
    Simulate(#[from] SimError),
    #[error("write: {path}: {source}")]
    Write { path: PathBuf, source: csv::Error },
}

fn write_error(path: &Path) -> impl FnOnce(csv::Error) -> RunError + '_ {
    move |source| RunError::Write { path: path.to_owned(), source }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Write { path: path.to_owned(), source: source.into() }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub trajectory: CCTrajectory,
    pub log: Option<SimulationLog>,
    pub metrics: Option<ConvergenceMetrics>,
    pub files: Vec<PathBuf>,
}

fn num(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn plan(scenario: &Scenario) -> Result<CCTrajectory, RunError> {
    Ok(connect_waypoints(&scenario.waypoints, &scenario.planner)?)
}

pub fn simulate(scenario: &Scenario, trajectory: &CCTrajectory) -> Result<SimulationLog, RunError> {
    let o = scenario.offset;
    let start = initial_state_on_reference(trajectory, 0.0, o.lateral, o.longitudinal, o.heading)?;
    let initial = match scenario.vehicle {
        Vehicle::Unicycle => VehicleState::Unicycle(start),
        Vehicle::Bicycle { wheelbase } => VehicleState::Bicycle(
            BicycleState::from_unicycle(&start, wheelbase).map_err(|source| SimError::Kinematics { step: 0, source })?,
        ),
    };
    let gains = GainMatrix::new(scenario.gains.matrix()).map_err(|source| SimError::Control { step: 0, source })?;
    let duration = scenario.duration.unwrap_or(trajectory.duration());
    let cfg = SimConfig::new(initial, scenario.epsilon, gains, scenario.planner.dt, duration, scenario.mode.into())?;
    Ok(run_simulation(&cfg, trajectory)?)
}

pub fn write_trajectory(path: &Path, trajectory: &CCTrajectory) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(write_error(path))?;
    w.write_record(TRAJECTORY_COLUMNS).map_err(write_error(path))?;
    for s in trajectory.samples() {
        let mut row: Vec<String> = [
            s.t, s.r.x, s.r.y, s.r_dot.x, s.r_dot.y, s.r_ddot.x, s.r_ddot.y, s.r_dddot.x, s.r_dddot.y, s.psi, s.kappa,
            s.sigma,
        ]
        .into_iter()
        .map(num)
        .collect();
        row.push(s.segment.to_string());
        w.write_record(&row).map_err(write_error(path))?;
    }
    w.flush().map_err(io_error(path))
}

pub fn write_simulation(path: &Path, log: &SimulationLog) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(write_error(path))?;
    w.write_record(SIMULATION_COLUMNS).map_err(write_error(path))?;
    for r in &log.records {
        let row = [
            r.t, r.x, r.y, r.psi, r.v, r.omega_or_phi, r.q_eps.x, r.q_eps.y, r.target.x, r.target.y, r.a, r.alpha_or_xi,
            r.err_pos, r.err_psi,
        ]
        .map(num);
        w.write_record(&row).map_err(write_error(path))?;
    }
    w.flush().map_err(io_error(path))
}

/// `key=value` report of a finished run.
pub fn metrics_report(scenario: &Scenario, trajectory: &CCTrajectory, log: &SimulationLog, m: &ConvergenceMetrics) -> String {
    let opt = |x: Option<f64>| x.map_or_else(|| "none".to_owned(), num);
    let vehicle = match scenario.vehicle {
        Vehicle::Unicycle => "unicycle",
        Vehicle::Bicycle { .. } => "bicycle",
    };
    let slowest = GainMatrix::new(scenario.gains.matrix()).map(|g| g.slowest_rate()).ok();
    let mut out = String::new();
    let mut line = |key: &str, value: String| {
        let _ = writeln!(out, "{key}={value}");
    };
    line("mode", scenario.mode.as_str().to_owned());
    line("vehicle", vehicle.to_owned());
    line("epsilon", num(scenario.epsilon));
    line("trajectory_duration", num(trajectory.duration()));
    line("trajectory_samples", trajectory.samples().len().to_string());
    line("simulated_duration", num(log.records.last().map_or(0.0, |r| r.t)));
    line("simulation_steps", (log.records.len() - 1).to_string());
    line("slowest_closed_loop_rate", opt(slowest));
    line("initial_err_pos", num(m.initial_err_pos));
    line("max_err_pos", num(m.max_err_pos));
    line("final_err_pos", num(m.final_err_pos));
    line("max_err_point", num(m.max_err_point));
    line("final_err_point", num(m.final_err_point));
    for (name, s) in ["settling_time_eps", "settling_time_0.1eps", "settling_time_0.01eps"].iter().zip(&m.settling) {
        line(name, opt(s.time));
    }
    line("point_decay_rate", opt(m.point_decay_rate));
    line("heading_monotone", m.heading_monotone.map_or_else(|| "none".to_owned(), |b| b.to_string()));
    line("lyapunov_violations", lyapunov_violations(log, POINT_CONVERGED, HEADING_SLACK).to_string());
    line(
        "defaults_applied",
        if scenario.defaults_applied.is_empty() { "none".to_owned() } else { scenario.defaults_applied.join(",") },
    );
    out
}

/// Runs `scenario`, writing into `out_dir`.
///
/// With `plan_only` only the trajectory CSV is written.
pub fn run(scenario: &Scenario, out_dir: &Path, plan_only: bool) -> Result<RunSummary, RunError> {
    let trajectory = plan(scenario)?;
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    let trajectory_path = out_dir.join(TRAJECTORY_FILE);
    write_trajectory(&trajectory_path, &trajectory)?;
    if plan_only {
        return Ok(RunSummary { trajectory, log: None, metrics: None, files: vec![trajectory_path] });
    }

    let log = simulate(scenario, &trajectory)?;
    let metrics = convergence_metrics(&log);

    let simulation_path = out_dir.join(SIMULATION_FILE);
    write_simulation(&simulation_path, &log)?;
    let metrics_path = out_dir.join(METRICS_FILE);
    fs::write(&metrics_path, metrics_report(scenario, &trajectory, &log, &metrics)).map_err(io_error(&metrics_path))?;
    let echo_path = out_dir.join(ECHO_FILE);
    let duration = scenario.duration.unwrap_or(trajectory.duration());
    let echo = toml::to_string(&scenario.echo(duration)).expect("scenario echo serializes");
    fs::write(&echo_path, echo).map_err(io_error(&echo_path))?;

    Ok(RunSummary {
        trajectory,
        log: Some(log),
        metrics: Some(metrics),
        files: vec![trajectory_path, simulation_path, metrics_path, echo_path],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario_str;

    const SCENARIO: &str = "
        waypoints = [[0.0, 0.0, 0.0], [20.0, 0.0, 0.0]]
        speed = 2.0
        kappa_max = 0.5
        sigma_max = 0.2
        dt = 0.01
        offset_lateral = 0.3
    ";

    #[test]
    fn report_has_every_key() {
        let s = parse_scenario_str(SCENARIO).unwrap();
        let traj = plan(&s).unwrap();
        let log = simulate(&s, &traj).unwrap();
        let report = metrics_report(&s, &traj, &log, &convergence_metrics(&log));
        for key in ["mode=eps", "final_err_pos=", "settling_time_0.01eps=", "lyapunov_violations=", "defaults_applied="] {
            assert!(report.lines().any(|l| l.starts_with(key)), "{key}\n{report}");
        }
        assert!(report.lines().all(|l| l.split_once('=').is_some()));
    }

    #[test]
    fn straight_line_run_converges() {
        let s = parse_scenario_str(SCENARIO).unwrap();
        let traj = plan(&s).unwrap();
        let log = simulate(&s, &traj).unwrap();
        let m = convergence_metrics(&log);
        assert!((m.initial_err_pos - 0.3).abs() < 1e-12);
        assert!(m.final_err_pos < 0.01 * m.initial_err_pos);
    }

    #[test]
    fn short_reference_fails_in_simulate_stage() {
        let s = parse_scenario_str(&format!("{SCENARIO}\nduration = 100.0")).unwrap();
        let traj = plan(&s).unwrap();
        let err = simulate(&s, &traj).unwrap_err().to_string();
        assert!(err.starts_with("simulate:"), "{err}");
    }

    #[test]
    fn numbers_keep_sixteen_digits() {
        assert_eq!(num(0.1), "1.000000000000000e-1");
        assert_eq!(num(-2.5), "-2.500000000000000e0");
    }
}
