//! Flat-state recovery and the ε-trajectory.
//!
//! A planar position trajectory with three time derivatives determines the
//! unicycle state and inputs that would drive it. Shifting that trajectory
//! ε ahead along its own heading gives the target for the ε-point; tracking
//! it drives the vehicle itself onto the original trajectory.

use crate::epsilon_control::{omega_hat, r_eps, EpsilonParams, PointReference};
use crate::math::{cos, sin, Vec2};

/// Speeds below this are treated as degenerate.
pub const DEFAULT_V_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FlatnessError {
    #[error("reference speed {speed} is below the floor {floor}")]
    DegenerateVelocity { speed: f64, floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryDerivatives {
    pub r: Vec2,
    pub r_dot: Vec2,
    pub r_ddot: Vec2,
    pub r_dddot: Vec2,
}

impl TrajectoryDerivatives {
    /// The reference as a point target, for plain ε-tracking.
    pub fn point_reference(&self) -> PointReference {
        PointReference { q: self.r, q_dot: self.r_dot, q_ddot: self.r_ddot }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatStates {
    pub psi_r: f64,
    pub v_r: f64,
    pub a_r: f64,
    pub omega_r: f64,
    pub alpha_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonReference {
    pub q_eps_r: Vec2,
    pub q_eps_r_dot: Vec2,
    pub q_eps_r_ddot: Vec2,
    pub psi_eps_r: f64,
    pub v_eps_r: f64,
    pub omega_eps_r: f64,
}

impl EpsilonReference {
    pub fn point_reference(&self) -> PointReference {
        PointReference { q: self.q_eps_r, q_dot: self.q_eps_r_dot, q_ddot: self.q_eps_r_ddot }
    }
}

pub fn flat_states(d: &TrajectoryDerivatives) -> Result<FlatStates, FlatnessError> {
    flat_states_with_floor(d, DEFAULT_V_FLOOR)
}

pub fn flat_states_with_floor(d: &TrajectoryDerivatives, floor: f64) -> Result<FlatStates, FlatnessError> {
    let v = d.r_dot.norm();
    if !(v >= floor) {
        return Err(FlatnessError::DegenerateVelocity { speed: v, floor });
    }
    let v2 = v * v;
    let a = d.r_dot.dot(d.r_ddot) / v;
    let omega = d.r_dot.cross(d.r_ddot) / v2;
    Ok(FlatStates {
        psi_r: d.r_dot.heading(),
        v_r: v,
        a_r: a,
        omega_r: omega,
        alpha_r: d.r_dot.cross(d.r_dddot) / v2 - 2.0 * a * omega / v,
    })
}

pub fn epsilon_reference(
    d: &TrajectoryDerivatives,
    f: &FlatStates,
    eps: &EpsilonParams,
) -> Result<EpsilonReference, FlatnessError> {
    let e = eps.epsilon();
    let rot = r_eps(f.psi_r, e);
    let vel = Vec2::new(f.v_r, f.omega_r);
    let q_dot = rot.mul_vec(vel);
    let q_ddot = rot.mul_vec(omega_hat(f.omega_r, e).mul_vec(vel)) + rot.mul_vec(Vec2::new(f.a_r, f.alpha_r));
    let v_eps = q_dot.norm();
    if !(v_eps >= DEFAULT_V_FLOOR) {
        return Err(FlatnessError::DegenerateVelocity { speed: v_eps, floor: DEFAULT_V_FLOOR });
    }
    Ok(EpsilonReference {
        q_eps_r: d.r + e * Vec2::new(cos(f.psi_r), sin(f.psi_r)),
        q_eps_r_dot: q_dot,
        q_eps_r_ddot: q_ddot,
        psi_eps_r: q_dot.heading(),
        v_eps_r: v_eps,
        omega_eps_r: q_dot.cross(q_ddot) / (v_eps * v_eps),
    })
}
