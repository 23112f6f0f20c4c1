//! Trajectory planning and zero-error ε-trajectory tracking for vehicles with
//! first-order nonholonomic constraints.
//!
//! The crate is `no_std` and only needs `alloc`:
//!
//! - [`kinematics`]: unicycle, bicycle, extended Dubins and trailer models,
//!   plus a fixed-step Runge–Kutta integrator.
//! - [`epsilon_control`]: the ε-point feedback-linearizing controller.
//! - [`flatness`]: flat-state recovery from a position trajectory and the
//!   ε-trajectory that removes the ε steady-state offset.
//! - [`ccplanner`]: time-indexed continuous-curvature trajectories through
//!   oriented waypoints.
//! - [`simulator`]: closed-loop runs, logs, convergence metrics and the
//!   two-trailer heading model.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ccplanner;
pub mod epsilon_control;
pub mod flatness;
pub mod kinematics;
pub mod math;
pub mod simulator;

pub use math::{wrap_angle, Vec2};
