//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::Instant;

use epstrack_core::ccplanner::{clothoid_segment, connect_waypoints, CCTrajectory, PlannerParams, TurnPose, Waypoint};
use epstrack_core::epsilon_control::{EpsilonParams, GainMatrix};
use epstrack_core::flatness::{epsilon_reference, flat_states, TrajectoryDerivatives};
use epstrack_core::kinematics::BicycleState;
use epstrack_core::simulator::{
    convergence_metrics, decay_rate, initial_state_on_reference, lyapunov_violations, run_simulation,
    trailer_heading_oracle, CosineReference, LineReference, Reference, SimConfig, SimulationLog, TrackingMode,
    VehicleState,
};
use epstrack_core::{wrap_angle, Vec2};
use rand::{rngs::StdRng, Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenario_params() -> PlannerParams {
    PlannerParams::new(5.0, 2.7, 0.17, 0.01).unwrap()
}

fn scenario_waypoints() -> [Waypoint; 3] {
    [Waypoint::new(0.0, 0.0, 0.0), Waypoint::new(30.0, 5.0, 5.0 * FRAC_PI_4), Waypoint::new(50.0, 0.0, FRAC_PI_4)]
}

fn scenario_trajectory() -> CCTrajectory {
    connect_waypoints(&scenario_waypoints(), &scenario_params()).expect("scenario plan")
}

fn cosine() -> CosineReference {
    CosineReference { speed: 2.0, amplitude: 3.0, frequency: 0.4 }
}

fn simulate(initial: VehicleState, eps: f64, gains: GainMatrix, duration: f64, mode: TrackingMode, r: &dyn Reference) -> SimulationLog {
    let cfg = SimConfig::new(initial, eps, gains, 0.01, duration, mode).expect("config");
    run_simulation(&cfg, r).expect("simulation")
}

fn scenario_run() -> (CCTrajectory, SimulationLog) {
    let traj = scenario_trajectory();
    let start = initial_state_on_reference(&traj, 0.0, 1.0, 0.0, 0.0).unwrap();
    let log = simulate(VehicleState::Unicycle(start), 5.0, GainMatrix::default(), traj.duration(), TrackingMode::EpsilonTrajectory, &traj);
    (traj, log)
}

fn criterion_1() -> Outcome {
    let clock = Instant::now();
    let (traj, log) = scenario_run();
    let elapsed = clock.elapsed().as_secs_f64();
    let mut worst_pos = 0.0f64;
    let mut worst_psi = 0.0f64;
    for w in scenario_waypoints() {
        let (d, a) = traj
            .samples()
            .iter()
            .map(|s| ((s.r - w.position()).norm(), wrap_angle(s.psi - w.psi).abs()))
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap();
        worst_pos = worst_pos.max(d);
        worst_psi = worst_psi.max(a);
    }
    let m = convergence_metrics(&log);
    let half = log.records.len() / 2;
    let increases = log.records[half..].windows(2).filter(|w| w[1].err_pos > w[0].err_pos).count();
    check(
        worst_pos < 1e-3 && worst_psi < 1e-3 && m.final_err_pos < 0.05 && increases == 0 && elapsed < 5.0,
        format!(
            "waypoint miss {worst_pos:.1e} m / {worst_psi:.1e} rad, final |e| {:.2e} m, increases in last half {increases}, {elapsed:.2} s",
            m.final_err_pos
        ),
    )
}

fn criterion_2() -> Outcome {
    let line = LineReference { start: Vec2::ZERO, velocity: Vec2::new(2.0, 0.0) };
    let start = initial_state_on_reference(&line, 0.0, 0.8, -0.5, 0.3).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.5, 1.0, 5.0] {
        let log = simulate(VehicleState::Unicycle(start), eps, GainMatrix::default(), 40.0, TrackingMode::PlainEpsilon, &line);
        let ratio = convergence_metrics(&log).final_err_pos / eps;
        ok &= (ratio - 1.0).abs() <= 0.01;
        parts.push(format!("eps {eps}: |e|/eps = {ratio:.6}"));
    }
    check(ok, parts.join(", "))
}

/// Random start whose heading stays within π/2 of the ε-trajectory heading.
fn random_start(rng: &mut StdRng, r: &dyn Reference, eps: f64) -> VehicleState {
    let d = r.derivatives(0.0);
    let psi_eps_r = epsilon_reference(&d, &flat_states(&d).unwrap(), &EpsilonParams::new(eps).unwrap()).unwrap().psi_eps_r;
    loop {
        let offset = rng.gen_range(0.2..2.0);
        let bearing = rng.gen_range(-PI..PI);
        let heading = rng.gen_range(-1.0..1.0);
        let s = initial_state_on_reference(r, 0.0, offset * bearing.sin(), offset * bearing.cos(), heading).unwrap();
        if wrap_angle(psi_eps_r - s.psi).abs() < FRAC_PI_2 {
            return VehicleState::Unicycle(s);
        }
    }
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let traj = scenario_trajectory();
    let cos_ref = cosine();
    let cases: [(&str, &dyn Reference, f64, f64); 2] = [("cosine", &cos_ref, 1.0, 40.0), ("planned", &traj, 5.0, traj.duration())];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, r, eps, duration) in cases {
        let mut worst_ratio = 0.0f64;
        let mut violations = 0;
        for _ in 0..50 {
            let start = random_start(&mut rng, r, eps);
            let log = simulate(start, eps, GainMatrix::default(), duration, TrackingMode::EpsilonTrajectory, r);
            let m = convergence_metrics(&log);
            worst_ratio = worst_ratio.max(m.final_err_pos / m.initial_err_pos);
            violations += lyapunov_violations(&log, 1e-3, 1e-8);
        }
        ok &= worst_ratio < 0.01 && violations == 0;
        parts.push(format!("{name}: worst final/initial {worst_ratio:.1e}, Lyapunov violations {violations}"));
    }
    check(ok, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let r = cosine();
    let start = initial_state_on_reference(&r, 0.0, 1.0, -1.0, 0.0).unwrap();
    let gain_sets = [
        ("kp 1 kd 2", GainMatrix::pd(1.0, 2.0).unwrap()),
        ("kp 2 kd 3", GainMatrix::pd(2.0, 3.0).unwrap()),
        ("per-axis (0.5,1.5)/(4,4)", GainMatrix::new([[0.5, 0.0, 1.5, 0.0], [0.0, 4.0, 0.0, 4.0]]).unwrap()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, gains) in gain_sets {
        let lambda = gains.slowest_rate();
        let log = simulate(VehicleState::Unicycle(start), 1.0, gains, 60.0, TrackingMode::EpsilonTrajectory, &r);
        let rate = decay_rate(log.records.iter().map(|r| (r.t, r.err_point))).unwrap_or(f64::NAN);
        let rel = ((rate - lambda) / lambda).abs();
        ok &= rel <= 0.1;
        parts.push(format!("{name}: fit {rate:.4} vs {lambda:.4} ({:.1}%)", 100.0 * rel));
    }
    check(ok, parts.join(", "))
}

/// Random quintic and its first derivative, evaluated by Horner's rule.
struct Quintic {
    cx: [f64; 6],
    cy: [f64; 6],
}

impl Quintic {
    fn horner(c: &[f64], t: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * t + k)
    }

    fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
        c.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect()
    }

    fn position(&self, t: f64) -> Vec2 {
        Vec2::new(Self::horner(&self.cx, t), Self::horner(&self.cy, t))
    }

    fn velocity(&self, t: f64) -> Vec2 {
        Vec2::new(Self::horner(&Self::derivative_coeffs(&self.cx), t), Self::horner(&Self::derivative_coeffs(&self.cy), t))
    }

    fn derivatives(&self, t: f64) -> TrajectoryDerivatives {
        let d1x = Self::derivative_coeffs(&self.cx);
        let d1y = Self::derivative_coeffs(&self.cy);
        let d2x = Self::derivative_coeffs(&d1x);
        let d2y = Self::derivative_coeffs(&d1y);
        let d3x = Self::derivative_coeffs(&d2x);
        let d3y = Self::derivative_coeffs(&d2y);
        TrajectoryDerivatives {
            r: self.position(t),
            r_dot: Vec2::new(Self::horner(&d1x, t), Self::horner(&d1y, t)),
            r_ddot: Vec2::new(Self::horner(&d2x, t), Self::horner(&d2y, t)),
            r_dddot: Vec2::new(Self::horner(&d3x, t), Self::horner(&d3y, t)),
        }
    }
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let h = 1e-4;
    let mut worst = [0.0f64; 5];
    let mut failures = 0;
    let mut count = 0;
    while count < 100 {
        let q = Quintic { cx: std::array::from_fn(|_| rng.gen_range(-2.0..2.0)), cy: std::array::from_fn(|_| rng.gen_range(-2.0..2.0)) };
        let t = rng.gen_range(0.0..1.0);
        if q.velocity(t).norm() < 0.5 {
            continue;
        }
        count += 1;
        let f = flat_states(&q.derivatives(t)).unwrap();
        // finite differences of position for heading and speed, of the
        // velocity's heading and norm for the rest
        let fd_vel = (q.position(t + h) - q.position(t - h)) * (0.5 / h);
        let psi = |s: f64| q.velocity(s).heading();
        let speed = |s: f64| q.velocity(s).norm();
        let (pm, p0, pp) = (psi(t - h), psi(t), psi(t + h));
        let oracle = [
            fd_vel.heading(),
            fd_vel.norm(),
            (speed(t + h) - speed(t - h)) / (2.0 * h),
            wrap_angle(pp - pm) / (2.0 * h),
            (wrap_angle(pp - p0) - wrap_angle(p0 - pm)) / (h * h),
        ];
        let value = [f.psi_r, f.v_r, f.a_r, f.omega_r, f.alpha_r];
        for k in 0..5 {
            let diff = if k == 0 { wrap_angle(value[k] - oracle[k]) } else { value[k] - oracle[k] };
            let scale = value[k].abs().max(oracle[k].abs()).max(1.0);
            worst[k] = worst[k].max(diff.abs() / scale);
            if diff.abs() > 1e-6 * scale {
                failures += 1;
            }
        }
    }
    check(
        failures == 0,
        format!(
            "100 quintics, worst scaled error psi {:.1e} v {:.1e} a {:.1e} omega {:.1e} alpha {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn criterion_6() -> Outcome {
    let step = 0.01;
    let n = (FRAC_PI_2 / step).floor() as i64;
    let mut n_psi_eps = 0u64;
    let mut checked = 0u64;
    let mut violations = 0u64;
    let mut k = 0i64;
    loop {
        let psi_eps_r = -PI + k as f64 * step;
        if psi_eps_r >= PI {
            break;
        }
        n_psi_eps += 1;
        for i in -n..=n {
            // grid offsets stay strictly inside (-π/2, π/2)
            let psi = wrap_angle(psi_eps_r - i as f64 * step);
            for j in (-n..=n).filter(|&j| j != i) {
                let psi_r = wrap_angle(psi_eps_r - j as f64 * step);
                let lhs = wrap_angle(psi - psi_r).signum();
                let rhs = ((psi_eps_r - psi_r).sin() - (psi_eps_r - psi).sin()).signum();
                checked += 1;
                if lhs != rhs {
                    violations += 1;
                }
            }
        }
        k += 1;
    }
    check(violations == 0, format!("{checked} grid points over {n_psi_eps} values of psi_eps_r, {violations} violations"))
}

fn criterion_7() -> Outcome {
    let (traj, log) = scenario_run();
    let Some(start) = log.records.iter().position(|r| r.err_point < 1e-4) else {
        return Err("epsilon-point never came within 1e-4 m".into());
    };
    let rec = &log.records[start];
    let steps = log.records.len() - 1 - start;
    let oracle = trailer_heading_oracle(&traj, &EpsilonParams::new(5.0).unwrap(), rec.psi, rec.t, log.dt, steps).unwrap();
    let worst = log.records[start..]
        .iter()
        .zip(&oracle)
        .map(|(r, psi)| wrap_angle(r.psi - psi).abs())
        .fold(0.0f64, f64::max);
    check(worst < 1e-2, format!("from t = {:.2} s over {steps} steps, max heading gap {worst:.2e} rad", rec.t))
}

fn criterion_8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut feasible = 0;
    let mut attempts = 0;
    let mut worst = [0.0f64; 5];
    let mut failures = Vec::new();
    while feasible < 100 && attempts < 10_000 {
        attempts += 1;
        let p = PlannerParams::new(rng.gen_range(1.0..5.0), rng.gen_range(0.2..1.0), rng.gen_range(0.05..1.0), 0.01).unwrap();
        let wps: Vec<Waypoint> = (0..3)
            .map(|_| Waypoint::new(rng.gen_range(0.0..80.0), rng.gen_range(0.0..80.0), rng.gen_range(-PI..PI)))
            .collect();
        let Ok(traj) = connect_waypoints(&wps, &p) else { continue };
        feasible += 1;
        let s = traj.samples();
        let kappa = s.iter().map(|x| x.kappa.abs() / p.kappa_max).fold(0.0f64, f64::max);
        let mut dkappa = 0.0f64;
        let mut spacing = 0.0f64;
        let mut residual = vec![0usize; traj.segments().len()];
        for w in s.windows(2) {
            let dt = w[1].t - w[0].t;
            dkappa = dkappa.max((w[1].kappa - w[0].kappa).abs() / (p.sigma_max * p.dt));
            if dt < p.dt * (1.0 - 1e-9) {
                residual[w[0].segment] += 1;
                continue;
            }
            spacing = spacing.max(((w[1].r - w[0].r).norm() / (p.v * p.dt) - 1.0).abs());
        }
        let extra_residuals = residual.iter().filter(|&&n| n > 1).count();
        let mut asymmetry = 0.0f64;
        for turn in 0..traj.turns().len() {
            let samples = &s[traj.turn_range(turn)];
            let (t0, t1) = (samples[0].t, samples[samples.len() - 1].t);
            let kappa_at = |t: f64| {
                let i = samples.partition_point(|x| x.t <= t).clamp(1, samples.len() - 1);
                let (a, b) = (&samples[i - 1], &samples[i]);
                a.kappa + (b.kappa - a.kappa) * (t - a.t) / (b.t - a.t)
            };
            for x in samples {
                asymmetry = asymmetry.max((x.kappa - kappa_at(t0 + t1 - x.t)).abs());
            }
        }
        let miss = wps
            .iter()
            .map(|w| s.iter().map(|x| (x.r - w.position()).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max);
        for (slot, value) in worst.iter_mut().zip([kappa, dkappa, spacing, asymmetry, miss]) {
            *slot = slot.max(value);
        }
        if kappa > 1.0 || dkappa > 1.0 + 1e-6 || spacing > 1e-3 || extra_residuals > 0 || asymmetry > 1e-6 || miss > 1e-3 {
            failures.push(attempts);
        }
    }
    check(
        feasible == 100 && failures.is_empty(),
        format!(
            "{feasible} feasible of {attempts} drawn; max |kappa|/kappa_max {:.6}, max |dkappa|/(sigma_max dt) {:.6}, spacing error {:.1e}, turn asymmetry {:.1e}, waypoint miss {:.1e} m, failing draws {failures:?}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let origin = TurnPose { x: 0.0, y: 0.0, psi: 0.0, kappa: 0.0, sigma: 0.0 };
    let traj = scenario_trajectory();
    let first_peak = traj.turns()[0].w_cs.kappa;
    for (name, target) in [("full ramp to kappa_max", 2.7), ("first planned transition", first_peak)] {
        let p = scenario_params();
        let samples = clothoid_segment(origin, target, &p).unwrap();
        let c = target.signum() * p.sigma_max / p.v;
        let (mut x, mut y, mut prev) = (0.0, 0.0, 0.0);
        let mut worst = 0.0f64;
        for s in &samples {
            let arc = p.v * s.t;
            x += simpson(|u| (0.5 * c * u * u).cos(), prev, arc, 128);
            y += simpson(|u| (0.5 * c * u * u).sin(), prev, arc, 128);
            prev = arc;
            worst = worst.max((s.r - Vec2::new(x, y)).norm());
        }
        ok &= worst < 1e-5;
        parts.push(format!("{name}: {} samples, max deviation {worst:.1e} m", samples.len()));
    }
    check(ok, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let traj = scenario_trajectory();
    let cos_ref = cosine();
    let cases: [(&str, &dyn Reference, f64, f64); 2] = [("planned", &traj, 5.0, traj.duration()), ("cosine", &cos_ref, 1.0, 30.0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, r, eps, duration) in cases {
        let start = initial_state_on_reference(r, 0.0, 1.0, 0.0, 0.2).unwrap();
        let bike = BicycleState::from_unicycle(&start, 2.5).unwrap();
        let lu = simulate(VehicleState::Unicycle(start), eps, GainMatrix::default(), duration, TrackingMode::EpsilonTrajectory, r);
        let lb = simulate(VehicleState::Bicycle(bike), eps, GainMatrix::default(), duration, TrackingMode::EpsilonTrajectory, r);
        let gap = lu
            .records
            .iter()
            .zip(&lb.records)
            .map(|(u, b)| Vec2::new(u.x - b.x, u.y - b.y).norm())
            .fold(0.0f64, f64::max);
        ok &= gap < 1e-6;
        parts.push(format!("{name}: max (x, y) gap {gap:.1e} m"));
    }
    check(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "three-waypoint end-to-end regression", criterion_1),
        (2, "plain epsilon tracking settles epsilon behind", criterion_2),
        (3, "zero-error convergence sweep", criterion_3),
        (4, "epsilon-point decay rate", criterion_4),
        (5, "flat states against finite differences", criterion_5),
        (6, "sign equality grid", criterion_6),
        (7, "two-trailer heading equivalence", criterion_7),
        (8, "planner invariants", criterion_8),
        (9, "clothoid against Fresnel integrals", criterion_9),
        (10, "bicycle and unicycle equivalence", criterion_10),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {id} ({name}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}): {detail}");
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
