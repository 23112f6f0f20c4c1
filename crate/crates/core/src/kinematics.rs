//! Vehicle state-space models and a fixed-step integrator.
//!
//! Four planar models are provided: the unicycle (acceleration inputs), the
//! Ackermann bicycle (steering-rate input), the extended Dubins model
//! (curvature-rate input, constant speed) and a unicycle towing a hitched
//! trailer. Model constants (wheelbase, hitch length, Dubins speed) travel
//! with the state value.
//!
//! Every derivative function is pure. [`integrate_step`] advances a state by
//! one classical fourth-order Runge–Kutta step with the input held constant
//! and wraps headings into `[-π, π)` afterwards.

use core::f64::consts::FRAC_PI_2;

use crate::math::{abs, cos, sin, tan, wrap_angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("{quantity} = {value} is outside the model domain")]
    Domain { quantity: &'static str, value: f64 },
    #[error("integration produced a non-finite state")]
    NonFinite,
    #[error("integration step must be positive, got {dt}")]
    InvalidStep { dt: f64 },
}

/// A state that can be advanced along a rate vector.
pub trait StateSpace: Copy {
    type Rate: Copy;

    /// Returns `self + h * rate` without renormalizing headings.
    fn advance(&self, rate: &Self::Rate, h: f64) -> Self;

    /// Wraps every heading field into `[-π, π)`.
    fn normalized(self) -> Self;

    fn is_finite(&self) -> bool;
}

/// A model whose rate is a function of its state and an input.
pub trait Kinematics: StateSpace {
    type Input: Copy;

    fn derivative(&self, input: &Self::Input) -> Result<Self::Rate, KinematicsError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnicycleState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnicycleInput {
    /// Longitudinal acceleration, m/s².
    pub a: f64,
    /// Angular acceleration, rad/s².
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnicycleRate {
    pub x_dot: f64,
    pub y_dot: f64,
    pub psi_dot: f64,
    pub v_dot: f64,
    pub omega_dot: f64,
}

impl UnicycleState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

pub fn unicycle_derivative(s: &UnicycleState, u: &UnicycleInput) -> UnicycleRate {
    UnicycleRate {
        x_dot: s.v * cos(s.psi),
        y_dot: s.v * sin(s.psi),
        psi_dot: s.omega,
        v_dot: u.a,
        omega_dot: u.alpha,
    }
}

impl StateSpace for UnicycleState {
    type Rate = UnicycleRate;

    fn advance(&self, r: &UnicycleRate, h: f64) -> Self {
        Self {
            x: self.x + h * r.x_dot,
            y: self.y + h * r.y_dot,
            psi: self.psi + h * r.psi_dot,
            v: self.v + h * r.v_dot,
            omega: self.omega + h * r.omega_dot,
        }
    }

    fn normalized(self) -> Self {
        Self { psi: wrap_angle(self.psi), ..self }
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.psi, self.v, self.omega].iter().all(|f| f.is_finite())
    }
}

impl Kinematics for UnicycleState {
    type Input = UnicycleInput;

    fn derivative(&self, input: &UnicycleInput) -> Result<UnicycleRate, KinematicsError> {
        Ok(unicycle_derivative(self, input))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicycleState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    /// Steering angle, rad.
    pub phi: f64,
    /// Wheelbase, m.
    pub wheelbase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BicycleInput {
    pub a: f64,
    /// Steering rate, rad/s.
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BicycleRate {
    pub x_dot: f64,
    pub y_dot: f64,
    pub psi_dot: f64,
    pub v_dot: f64,
    pub phi_dot: f64,
}

impl BicycleState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Yaw rate implied by the steering angle, `(v/L) tan φ`.
    pub fn omega(&self) -> f64 {
        self.v / self.wheelbase * tan(self.phi)
    }

    /// The equivalent unicycle state.
    pub fn as_unicycle(&self) -> UnicycleState {
        UnicycleState { x: self.x, y: self.y, psi: self.psi, v: self.v, omega: self.omega() }
    }

    /// Builds a bicycle state matching a unicycle state's yaw rate.
    pub fn from_unicycle(s: &UnicycleState, wheelbase: f64) -> Result<Self, KinematicsError> {
        check_positive("wheelbase", wheelbase)?;
        if s.v == 0.0 && s.omega != 0.0 {
            return Err(KinematicsError::Domain { quantity: "v", value: s.v });
        }
        let phi = if s.omega == 0.0 { 0.0 } else { crate::math::atan(s.omega * wheelbase / s.v) };
        Ok(Self { x: s.x, y: s.y, psi: s.psi, v: s.v, phi, wheelbase })
    }
}

pub fn bicycle_derivative(s: &BicycleState, u: &BicycleInput) -> Result<BicycleRate, KinematicsError> {
    check_positive("wheelbase", s.wheelbase)?;
    if !(abs(s.phi) < FRAC_PI_2) {
        return Err(KinematicsError::Domain { quantity: "phi", value: s.phi });
    }
    Ok(BicycleRate {
        x_dot: s.v * cos(s.psi),
        y_dot: s.v * sin(s.psi),
        psi_dot: s.v / s.wheelbase * tan(s.phi),
        v_dot: u.a,
        phi_dot: u.xi,
    })
}

impl StateSpace for BicycleState {
    type Rate = BicycleRate;

    fn advance(&self, r: &BicycleRate, h: f64) -> Self {
        Self {
            x: self.x + h * r.x_dot,
            y: self.y + h * r.y_dot,
            psi: self.psi + h * r.psi_dot,
            v: self.v + h * r.v_dot,
            phi: self.phi + h * r.phi_dot,
            wheelbase: self.wheelbase,
        }
    }

    fn normalized(self) -> Self {
        Self { psi: wrap_angle(self.psi), ..self }
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.psi, self.v, self.phi].iter().all(|f| f.is_finite())
    }
}

impl Kinematics for BicycleState {
    type Input = BicycleInput;

    fn derivative(&self, input: &BicycleInput) -> Result<BicycleRate, KinematicsError> {
        bicycle_derivative(self, input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedDubinsState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    /// Curvature, 1/m.
    pub kappa: f64,
    /// Constant forward speed, m/s.
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtendedDubinsInput {
    /// Curvature rate dκ/dt, 1/(m·s).
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtendedDubinsRate {
    pub x_dot: f64,
    pub y_dot: f64,
    pub psi_dot: f64,
    pub kappa_dot: f64,
}

pub fn extended_dubins_derivative(
    s: &ExtendedDubinsState,
    u: &ExtendedDubinsInput,
) -> Result<ExtendedDubinsRate, KinematicsError> {
    check_positive("v", s.v)?;
    Ok(ExtendedDubinsRate {
        x_dot: s.v * cos(s.psi),
        y_dot: s.v * sin(s.psi),
        psi_dot: s.v * s.kappa,
        kappa_dot: u.sigma,
    })
}

impl StateSpace for ExtendedDubinsState {
    type Rate = ExtendedDubinsRate;

    fn advance(&self, r: &ExtendedDubinsRate, h: f64) -> Self {
        Self {
            x: self.x + h * r.x_dot,
            y: self.y + h * r.y_dot,
            psi: self.psi + h * r.psi_dot,
            kappa: self.kappa + h * r.kappa_dot,
            v: self.v,
        }
    }

    fn normalized(self) -> Self {
        Self { psi: wrap_angle(self.psi), ..self }
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.psi, self.kappa, self.v].iter().all(|f| f.is_finite())
    }
}

impl Kinematics for ExtendedDubinsState {
    type Input = ExtendedDubinsInput;

    fn derivative(&self, input: &ExtendedDubinsInput) -> Result<ExtendedDubinsRate, KinematicsError> {
        extended_dubins_derivative(self, input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailerState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    /// Trailer heading, rad.
    pub psi_t: f64,
    pub v: f64,
    pub omega: f64,
    /// Hitch length, m.
    pub hitch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrailerRate {
    pub x_dot: f64,
    pub y_dot: f64,
    pub psi_dot: f64,
    pub psi_t_dot: f64,
    pub v_dot: f64,
    pub omega_dot: f64,
}

pub fn trailer_derivative(s: &TrailerState, u: &UnicycleInput) -> Result<TrailerRate, KinematicsError> {
    check_positive("hitch", s.hitch)?;
    Ok(TrailerRate {
        x_dot: s.v * cos(s.psi),
        y_dot: s.v * sin(s.psi),
        psi_dot: s.omega,
        psi_t_dot: s.v / s.hitch * sin(s.psi - s.psi_t),
        v_dot: u.a,
        omega_dot: u.alpha,
    })
}

/// Position of the trailer axle, one hitch length behind the towing point.
pub fn trailer_position(s: &TrailerState) -> Vec2 {
    Vec2::new(s.x - s.hitch * cos(s.psi_t), s.y - s.hitch * sin(s.psi_t))
}

impl StateSpace for TrailerState {
    type Rate = TrailerRate;

    fn advance(&self, r: &TrailerRate, h: f64) -> Self {
        Self {
            x: self.x + h * r.x_dot,
            y: self.y + h * r.y_dot,
            psi: self.psi + h * r.psi_dot,
            psi_t: self.psi_t + h * r.psi_t_dot,
            v: self.v + h * r.v_dot,
            omega: self.omega + h * r.omega_dot,
            hitch: self.hitch,
        }
    }

    fn normalized(self) -> Self {
        Self { psi: wrap_angle(self.psi), psi_t: wrap_angle(self.psi_t), ..self }
    }

    fn is_finite(&self) -> bool {
        [self.x, self.y, self.psi, self.psi_t, self.v, self.omega].iter().all(|f| f.is_finite())
    }
}

impl Kinematics for TrailerState {
    type Input = UnicycleInput;

    fn derivative(&self, input: &UnicycleInput) -> Result<TrailerRate, KinematicsError> {
        trailer_derivative(self, input)
    }
}

/// One classical Runge–Kutta step of a time-varying vector field.
///
/// `rate(tau, state)` is evaluated at `tau ∈ {0, dt/2, dt/2, dt}` relative to
/// the start of the step. Headings are not wrapped here.
pub fn rk4_step<S, E, F>(state: &S, dt: f64, mut rate: F) -> Result<S, E>
where
    S: StateSpace,
    F: FnMut(f64, &S) -> Result<S::Rate, E>,
{
    let half = 0.5 * dt;
    let k1 = rate(0.0, state)?;
    let k2 = rate(half, &state.advance(&k1, half))?;
    let k3 = rate(half, &state.advance(&k2, half))?;
    let k4 = rate(dt, &state.advance(&k3, dt))?;
    Ok(state
        .advance(&k1, dt / 6.0)
        .advance(&k2, dt / 3.0)
        .advance(&k3, dt / 3.0)
        .advance(&k4, dt / 6.0))
}

/// Advances `state` by `dt` with `input` held constant.
pub fn integrate_step<S: Kinematics>(state: &S, input: &S::Input, dt: f64) -> Result<S, KinematicsError> {
    if !(dt > 0.0) {
        return Err(KinematicsError::InvalidStep { dt });
    }
    let next = rk4_step(state, dt, |_, s: &S| s.derivative(input))?.normalized();
    if next.is_finite() {
        Ok(next)
    } else {
        Err(KinematicsError::NonFinite)
    }
}

fn check_positive(quantity: &'static str, value: f64) -> Result<(), KinematicsError> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(KinematicsError::Domain { quantity, value })
    }
}
