//! Closed-loop simulation of ε-point tracking.
//!
//! [`run_simulation`] drives a unicycle or bicycle with the ε-point
//! controller along a [`Reference`]. In [`TrackingMode::PlainEpsilon`] the
//! ε-point chases the reference itself and the vehicle settles ε behind it.
//! In [`TrackingMode::EpsilonTrajectory`] the ε-point chases the ε-trajectory
//! and the vehicle converges onto the reference.
//!
//! By default the controller is re-evaluated inside every Runge–Kutta stage
//! against the exact reference at that instant, so the log is an accurate
//! solution of the continuous closed loop. [`InputHold::ZeroOrderHold`]
//! instead computes the input once per step.

pub mod metrics;
pub mod reference;
pub mod trailer;

use alloc::vec::Vec;

pub use metrics::{convergence_metrics, decay_rate, log_linear_slope, ConvergenceMetrics, Settling};
pub use reference::{CircleReference, CosineReference, LineReference, Reference};
pub use trailer::{heading_error_rate, lyapunov_violations, trailer_heading_oracle, two_trailer_oracle, TwoTrailerState};

use crate::epsilon_control::{
    epsilon_point, epsilon_tracking_step, ControlError, EpsilonController, EpsilonParams, GainMatrix, PointReference,
    TrackedVehicle,
};
use crate::flatness::{epsilon_reference, flat_states, EpsilonReference, FlatStates, FlatnessError, TrajectoryDerivatives};
use crate::kinematics::{rk4_step, BicycleState, KinematicsError, StateSpace, UnicycleState};
use crate::math::{wrap_angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{name} = {value} is invalid")]
    InvalidConfig { name: &'static str, value: f64 },
    #[error("reference ends at t = {end}, before the requested duration {duration}")]
    ReferenceTooShort { end: f64, duration: f64 },
    #[error("state became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("control failed at step {step}: {source}")]
    Control { step: usize, source: ControlError },
    #[error("vehicle model failed at step {step}: {source}")]
    Kinematics { step: usize, source: KinematicsError },
    #[error(transparent)]
    Flatness(#[from] FlatnessError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VehicleState {
    Unicycle(UnicycleState),
    Bicycle(BicycleState),
}

impl VehicleState {
    pub fn as_unicycle(&self) -> UnicycleState {
        match self {
            VehicleState::Unicycle(s) => *s,
            VehicleState::Bicycle(s) => s.as_unicycle(),
        }
    }

    /// ω for a unicycle, φ for a bicycle.
    pub fn turn_state(&self) -> f64 {
        match self {
            VehicleState::Unicycle(s) => s.turn_state(),
            VehicleState::Bicycle(s) => s.turn_state(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            VehicleState::Unicycle(s) => StateSpace::is_finite(s),
            VehicleState::Bicycle(s) => StateSpace::is_finite(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackingMode {
    PlainEpsilon,
    EpsilonTrajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputHold {
    #[default]
    Continuous,
    ZeroOrderHold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub initial: VehicleState,
    pub controller: EpsilonController,
    pub dt: f64,
    pub duration: f64,
    pub mode: TrackingMode,
    pub hold: InputHold,
}

impl SimConfig {
    pub fn new(
        initial: VehicleState,
        epsilon: f64,
        gains: GainMatrix,
        dt: f64,
        duration: f64,
        mode: TrackingMode,
    ) -> Result<Self, SimError> {
        trailer::check_step(dt, duration)?;
        let eps = EpsilonParams::new(epsilon).map_err(|source| SimError::Control { step: 0, source })?;
        if !initial.is_finite() {
            return Err(SimError::NonFinite { step: 0 });
        }
        Ok(Self {
            initial,
            controller: EpsilonController::new(gains, eps),
            dt,
            duration,
            mode,
            hold: InputHold::Continuous,
        })
    }

    pub fn with_hold(self, hold: InputHold) -> Self {
        Self { hold, ..self }
    }

    pub fn epsilon(&self) -> f64 {
        self.controller.eps.epsilon()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    /// ω for a unicycle, φ for a bicycle.
    pub omega_or_phi: f64,
    pub q_eps: Vec2,
    /// The point the ε-point is steered to: `q_εr`, or the reference itself.
    pub target: Vec2,
    pub a: f64,
    /// α for a unicycle, ξ for a bicycle.
    pub alpha_or_xi: f64,
    /// `‖x − x_r‖`.
    pub err_pos: f64,
    /// `ψ − ψ_r`, wrapped.
    pub err_psi: f64,
    /// `‖q_ε − target‖`.
    pub err_point: f64,
    pub psi_r: f64,
    pub psi_eps_r: f64,
    /// `ψ_εr − ψ_r`, wrapped.
    pub e_psi_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationLog {
    pub mode: TrackingMode,
    pub epsilon: f64,
    pub dt: f64,
    pub records: Vec<LogRecord>,
}

/// Reference quantities at one instant.
struct Target {
    derivs: TrajectoryDerivatives,
    flat: FlatStates,
    eps_ref: EpsilonReference,
    point: PointReference,
}

fn target_at<R: Reference + ?Sized>(reference: &R, eps: &EpsilonParams, mode: TrackingMode, t: f64) -> Result<Target, SimError> {
    target_from(reference.derivatives(t), eps, mode)
}

fn target_from(derivs: TrajectoryDerivatives, eps: &EpsilonParams, mode: TrackingMode) -> Result<Target, SimError> {
    let flat = flat_states(&derivs)?;
    let eps_ref = epsilon_reference(&derivs, &flat, eps)?;
    let point = match mode {
        TrackingMode::PlainEpsilon => derivs.point_reference(),
        TrackingMode::EpsilonTrajectory => eps_ref.point_reference(),
    };
    Ok(Target { derivs, flat, eps_ref, point })
}

/// Vehicle placed on the reference at time `t` with matching heading, speed
/// and yaw rate, then offset by `lateral` (to the left), `longitudinal` and
/// `heading` (rad).
pub fn initial_state_on_reference<R: Reference + ?Sized>(
    reference: &R,
    t: f64,
    lateral: f64,
    longitudinal: f64,
    heading: f64,
) -> Result<UnicycleState, SimError> {
    let d = reference.derivatives(t);
    let f = flat_states(&d)?;
    let ahead = Vec2::from_heading(f.psi_r);
    let p = d.r + ahead * longitudinal + ahead.perp() * lateral;
    Ok(UnicycleState { x: p.x, y: p.y, psi: wrap_angle(f.psi_r + heading), v: f.v_r, omega: f.omega_r })
}

pub fn run_simulation<R: Reference + ?Sized>(cfg: &SimConfig, reference: &R) -> Result<SimulationLog, SimError> {
    trailer::check_step(cfg.dt, cfg.duration)?;
    let end = reference.end_time();
    if cfg.duration > end + 1e-9 {
        return Err(SimError::ReferenceTooShort { end, duration: cfg.duration });
    }
    let records = match cfg.initial {
        VehicleState::Unicycle(s) => run_model(cfg, reference, s)?,
        VehicleState::Bicycle(s) => run_model(cfg, reference, s)?,
    };
    Ok(SimulationLog { mode: cfg.mode, epsilon: cfg.epsilon(), dt: cfg.dt, records })
}

fn run_model<R, V>(cfg: &SimConfig, reference: &R, initial: V) -> Result<Vec<LogRecord>, SimError>
where
    R: Reference + ?Sized,
    V: TrackedVehicle,
{
    let controller = &cfg.controller;
    let eps = &controller.eps;
    let steps = trailer::step_count(cfg.duration, cfg.dt);
    let mut records = Vec::with_capacity(steps + 1);
    let mut state = initial;
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let target = target_at(reference, eps, cfg.mode, t)?;
        let input = controller.input(&state, &target.point).map_err(|source| SimError::Control { step: k, source })?;
        records.push(record(t, &state, V::input_parts(&input), &target, eps));
        if k == steps {
            break;
        }
        state = match cfg.hold {
            InputHold::ZeroOrderHold => {
                epsilon_tracking_step(&state, &target.point, controller, cfg.dt)
                    .map_err(|source| SimError::Control { step: k, source })?
                    .0
            }
            InputHold::Continuous => {
                let step_end = (k + 1) as f64 * cfg.dt;
                let mut t0 = t;
                let mut s = state;
                // sub-steps end on reference breakpoints so no stage straddles a jump
                loop {
                    let t1 = reference.next_breakpoint(t0).filter(|&b| b < step_end).unwrap_or(step_end);
                    let h = t1 - t0;
                    s = rk4_step(&s, h, |tau, x: &V| -> Result<V::Rate, SimError> {
                        let point = if tau == 0.0 && t0 == t {
                            target.point
                        } else if tau == h {
                            target_from(reference.derivatives_before(t1), eps, cfg.mode)?.point
                        } else {
                            target_at(reference, eps, cfg.mode, t0 + tau)?.point
                        };
                        let u = controller.input(x, &point).map_err(|source| SimError::Control { step: k, source })?;
                        x.derivative(&u).map_err(|source| SimError::Kinematics { step: k, source })
                    })?
                    .normalized();
                    if t1 == step_end {
                        break s;
                    }
                    t0 = t1;
                }
            }
        };
        if !state.is_finite() {
            return Err(SimError::NonFinite { step: k + 1 });
        }
    }
    Ok(records)
}

fn record<V: TrackedVehicle>(t: f64, state: &V, input: (f64, f64), target: &Target, eps: &EpsilonParams) -> LogRecord {
    let uni = state.unicycle_view();
    let q_eps = epsilon_point(&uni, eps).q;
    let psi_r = target.flat.psi_r;
    LogRecord {
        t,
        x: uni.x,
        y: uni.y,
        psi: uni.psi,
        v: uni.v,
        omega_or_phi: state.turn_state(),
        q_eps,
        target: target.point.q,
        a: input.0,
        alpha_or_xi: input.1,
        err_pos: (uni.position() - target.derivs.r).norm(),
        err_psi: wrap_angle(uni.psi - psi_r),
        err_point: (q_eps - target.point.q).norm(),
        psi_r,
        psi_eps_r: target.eps_ref.psi_eps_r,
        e_psi_r: wrap_angle(target.eps_ref.psi_eps_r - psi_r),
    }
}
