//! The two-trailer heading model.
//!
//! Once the ε-point rides exactly on the ε-trajectory, the vehicle heading
//! behaves like a trailer hitched ε behind it, and so does the reference
//! heading. Both obey `ψ̇ = (v_εr/ε) sin(ψ_εr − ψ)`, so the error between
//! them obeys a scalar equation that shrinks it whenever both headings lie
//! within π/2 of `ψ_εr`.

use alloc::vec::Vec;

use super::{Reference, SimError, SimulationLog};
use crate::epsilon_control::EpsilonParams;
use crate::flatness::{epsilon_reference, flat_states};
use crate::kinematics::{rk4_step, Kinematics, KinematicsError, StateSpace, UnicycleInput};
use crate::math::{abs, cos, sin, wrap_angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTrailerState {
    pub q_eps_r: Vec2,
    pub psi_eps_r: f64,
    /// Vehicle heading.
    pub psi: f64,
    /// Reference heading.
    pub psi_r: f64,
    pub v_eps: f64,
    pub omega_eps: f64,
    /// Hitch length shared by both trailers, m.
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoTrailerRate {
    pub q_dot: Vec2,
    pub psi_eps_r_dot: f64,
    pub psi_dot: f64,
    pub psi_r_dot: f64,
    pub v_dot: f64,
    pub omega_dot: f64,
}

impl StateSpace for TwoTrailerState {
    type Rate = TwoTrailerRate;

    fn advance(&self, r: &TwoTrailerRate, h: f64) -> Self {
        Self {
            q_eps_r: self.q_eps_r + r.q_dot * h,
            psi_eps_r: self.psi_eps_r + h * r.psi_eps_r_dot,
            psi: self.psi + h * r.psi_dot,
            psi_r: self.psi_r + h * r.psi_r_dot,
            v_eps: self.v_eps + h * r.v_dot,
            omega_eps: self.omega_eps + h * r.omega_dot,
            epsilon: self.epsilon,
        }
    }

    fn normalized(self) -> Self {
        Self {
            psi_eps_r: wrap_angle(self.psi_eps_r),
            psi: wrap_angle(self.psi),
            psi_r: wrap_angle(self.psi_r),
            ..self
        }
    }

    fn is_finite(&self) -> bool {
        self.q_eps_r.is_finite()
            && [self.psi_eps_r, self.psi, self.psi_r, self.v_eps, self.omega_eps].iter().all(|f| f.is_finite())
    }
}

impl Kinematics for TwoTrailerState {
    /// `a_ε`, `α_ε` of the lead vehicle.
    type Input = UnicycleInput;

    fn derivative(&self, u: &UnicycleInput) -> Result<TwoTrailerRate, KinematicsError> {
        if !(self.epsilon > 0.0) {
            return Err(KinematicsError::Domain { quantity: "epsilon", value: self.epsilon });
        }
        let k = self.v_eps / self.epsilon;
        Ok(TwoTrailerRate {
            q_dot: Vec2::new(self.v_eps * cos(self.psi_eps_r), self.v_eps * sin(self.psi_eps_r)),
            psi_eps_r_dot: self.omega_eps,
            psi_dot: k * sin(self.psi_eps_r - self.psi),
            psi_r_dot: k * sin(self.psi_eps_r - self.psi_r),
            v_dot: u.a,
            omega_dot: u.alpha,
        })
    }
}

/// `ė` for `e = ψ − ψ_r` under the two-trailer model.
pub fn heading_error_rate(psi: f64, psi_r: f64, psi_eps_r: f64, v_eps_r: f64, eps: f64) -> f64 {
    -(v_eps_r / eps) * (sin(psi_eps_r - psi_r) - sin(psi_eps_r - psi))
}

/// Integrates the two-trailer model with lead inputs `inputs(t)`.
///
/// Returns the state at every step, starting with `initial`.
pub fn two_trailer_oracle<F>(
    initial: TwoTrailerState,
    mut inputs: F,
    dt: f64,
    duration: f64,
) -> Result<Vec<TwoTrailerState>, SimError>
where
    F: FnMut(f64) -> UnicycleInput,
{
    check_step(dt, duration)?;
    let steps = step_count(duration, dt);
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = initial;
    out.push(state);
    for k in 0..steps {
        let t = k as f64 * dt;
        state = rk4_step(&state, dt, |tau, s: &TwoTrailerState| s.derivative(&inputs(t + tau)))
            .map_err(|source| SimError::Kinematics { step: k, source })?
            .normalized();
        if !state.is_finite() {
            return Err(SimError::NonFinite { step: k + 1 });
        }
        out.push(state);
    }
    Ok(out)
}

/// Vehicle heading of a trailer hitched ε behind the exact ε-trajectory of
/// `reference`, from `psi0` at `t0`, sampled every `dt` for `steps` steps.
pub fn trailer_heading_oracle<R: Reference + ?Sized>(
    reference: &R,
    eps: &EpsilonParams,
    psi0: f64,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<f64>, SimError> {
    let rate = |t: f64, psi: f64| -> Result<f64, SimError> {
        let d = reference.derivatives(t);
        let e = epsilon_reference(&d, &flat_states(&d)?, eps)?;
        Ok(e.v_eps_r / eps.epsilon() * sin(e.psi_eps_r - psi))
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut psi = psi0;
    out.push(psi);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let k1 = rate(t, psi)?;
        let k2 = rate(t + 0.5 * dt, psi + 0.5 * dt * k1)?;
        let k3 = rate(t + 0.5 * dt, psi + 0.5 * dt * k2)?;
        let k4 = rate(t + dt, psi + dt * k3)?;
        psi = wrap_angle(psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        if !psi.is_finite() {
            return Err(SimError::NonFinite { step: k + 1 });
        }
        out.push(psi);
    }
    Ok(out)
}

/// Number of steps where `V = e_ψ²/2` grows by more than `slack`, counted
/// once the ε-point error has dropped below `point_tol` and while the vehicle
/// heading is within π/2 of `ψ_εr`.
pub fn lyapunov_violations(log: &SimulationLog, point_tol: f64, slack: f64) -> usize {
    let Some(start) = log.records.iter().position(|r| r.err_point < point_tol) else {
        return 0;
    };
    log.records[start..]
        .windows(2)
        .filter(|w| abs(wrap_angle(w[0].psi_eps_r - w[0].psi)) < core::f64::consts::FRAC_PI_2)
        .filter(|w| 0.5 * w[1].err_psi * w[1].err_psi > 0.5 * w[0].err_psi * w[0].err_psi + slack)
        .count()
}

pub(crate) fn check_step(dt: f64, duration: f64) -> Result<(), SimError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::InvalidConfig { name: "dt", value: dt });
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(SimError::InvalidConfig { name: "duration", value: duration });
    }
    Ok(())
}

/// Whole steps of `dt` that fit in `duration`.
pub(crate) fn step_count(duration: f64, dt: f64) -> usize {
    libm::floor(duration / dt + 1e-9) as usize
}
