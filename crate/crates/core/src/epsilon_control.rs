//! ε-point tracking control.
//!
//! A point `q_ε` a fixed distance ε ahead of the vehicle is not subject to the
//! lateral no-slip constraint, so it can be driven as a free double
//! integrator `q̈ = u` with a linear state-feedback law. The commanded point
//! acceleration is then mapped algebraically onto the unicycle inputs
//! `(a, α)` and, if needed, onto the bicycle steering rate `ξ`.
//!
//! The point error state is stacked as `z = [q − q_r; q̇ − q̇_r]`, so the gain
//! matrix `K` is 2×4 with the position gains in its first two columns.

use num_complex::Complex64;

use crate::kinematics::{
    integrate_step, BicycleInput, BicycleState, Kinematics, KinematicsError, UnicycleInput, UnicycleState,
};
use crate::math::{abs, cos, sin, tan, Mat2, Vec2};

/// Default speed floor below which the steering-rate map is refused.
pub const DEFAULT_V_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("gain matrix is not stabilizing: closed-loop characteristic polynomial fails the Hurwitz test")]
    UnstableGain,
    #[error("gain matrix has non-finite entries")]
    NonFiniteGain,
    #[error("speed {v} m/s is within the steering-map singularity floor {v_min} m/s")]
    SingularVelocity { v: f64, v_min: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonParams {
    epsilon: f64,
}

impl EpsilonParams {
    pub fn new(epsilon: f64) -> Result<Self, ControlError> {
        if epsilon > 0.0 && epsilon.is_finite() {
            Ok(Self { epsilon })
        } else {
            Err(ControlError::InvalidEpsilon(epsilon))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Position and velocity of a controlled point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointState {
    pub q: Vec2,
    pub q_dot: Vec2,
}

/// Reference for a controlled point, with acceleration feed-forward.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointReference {
    pub q: Vec2,
    pub q_dot: Vec2,
    pub q_ddot: Vec2,
}

/// State-feedback gain for the point double integrator.
///
/// Construction rejects any `K` for which `A − BK` has an eigenvalue with a
/// non-negative real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMatrix {
    k: [[f64; 4]; 2],
}

impl GainMatrix {
    pub fn new(k: [[f64; 4]; 2]) -> Result<Self, ControlError> {
        if !k.iter().flatten().all(|g| g.is_finite()) {
            return Err(ControlError::NonFiniteGain);
        }
        let gain = Self { k };
        if is_hurwitz_quartic(gain.characteristic_polynomial()) {
            Ok(gain)
        } else {
            Err(ControlError::UnstableGain)
        }
    }

    /// Decoupled PD gain `K = [kp·I, kd·I]`.
    pub fn pd(kp: f64, kd: f64) -> Result<Self, ControlError> {
        Self::new([[kp, 0.0, kd, 0.0], [0.0, kp, 0.0, kd]])
    }

    pub fn entries(&self) -> [[f64; 4]; 2] {
        self.k
    }

    /// `A − BK` for the point dynamics `ṗ = [0 I; 0 0] p + [0; I] u`.
    pub fn closed_loop_matrix(&self) -> [[f64; 4]; 4] {
        let k = &self.k;
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-k[0][0], -k[0][1], -k[0][2], -k[0][3]],
            [-k[1][0], -k[1][1], -k[1][2], -k[1][3]],
        ]
    }

    /// Coefficients `[c3, c2, c1, c0]` of the monic characteristic polynomial
    /// `det(sI − (A − BK)) = s⁴ + c3 s³ + c2 s² + c1 s + c0`.
    ///
    /// With `K = [Kq Kv]` this equals `det(s² I + s Kv + Kq)`.
    pub fn characteristic_polynomial(&self) -> [f64; 4] {
        let k = &self.k;
        let (q11, q12, q21, q22) = (k[0][0], k[0][1], k[1][0], k[1][1]);
        let (v11, v12, v21, v22) = (k[0][2], k[0][3], k[1][2], k[1][3]);
        [
            v11 + v22,
            q11 + q22 + v11 * v22 - v12 * v21,
            v11 * q22 + v22 * q11 - v12 * q21 - q12 * v21,
            q11 * q22 - q12 * q21,
        ]
    }

    pub fn closed_loop_eigenvalues(&self) -> [Complex64; 4] {
        quartic_roots(self.characteristic_polynomial())
    }

    /// Largest real part among the closed-loop eigenvalues (negative).
    pub fn slowest_rate(&self) -> f64 {
        self.closed_loop_eigenvalues().iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max)
    }

    fn apply(&self, z_pos: Vec2, z_vel: Vec2) -> Vec2 {
        let k = &self.k;
        Vec2::new(
            k[0][0] * z_pos.x + k[0][1] * z_pos.y + k[0][2] * z_vel.x + k[0][3] * z_vel.y,
            k[1][0] * z_pos.x + k[1][1] * z_pos.y + k[1][2] * z_vel.x + k[1][3] * z_vel.y,
        )
    }
}

impl Default for GainMatrix {
    fn default() -> Self {
        Self { k: [[1.0, 0.0, 2.0, 0.0], [0.0, 1.0, 0.0, 2.0]] }
    }
}

fn is_hurwitz_quartic([c3, c2, c1, c0]: [f64; 4]) -> bool {
    let d2 = c3 * c2 - c1;
    let d3 = c1 * d2 - c3 * c3 * c0;
    c3 > 0.0 && d2 > 0.0 && d3 > 0.0 && c0 > 0.0
}

/// Roots of `s⁴ + c3 s³ + c2 s² + c1 s + c0`.
///
/// Durand–Kerner iteration with simultaneous updates; an m-fold cluster is
/// then collapsed onto the nearby simple root of the (m−1)-th derivative,
/// which is well conditioned where the cluster itself is not.
fn quartic_roots(coeffs: [f64; 4]) -> [Complex64; 4] {
    let [c3, c2, c1, c0] = coeffs;
    let poly = [1.0, c3, c2, c1, c0];
    let scale = 1.0 + coeffs.iter().fold(0.0f64, |m, c| m.max(abs(*c)));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    let mut p = Complex64::new(scale, 0.0);
    for r in roots.iter_mut() {
        p *= seed;
        *r = p;
    }
    for _ in 0..500 {
        let mut next = roots;
        let mut shift = 0.0f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in (0..4).filter(|&j| j != i) {
                denom *= roots[i] - roots[j];
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let delta = eval_derivative(&poly, 0, roots[i]) / denom;
            next[i] = roots[i] - delta;
            shift = shift.max(delta.norm());
        }
        roots = next;
        if shift < 1e-15 * scale {
            break;
        }
    }

    let mut assigned = [false; 4];
    for i in 0..4 {
        if assigned[i] {
            continue;
        }
        let tol = 1e-3 * (1.0 + roots[i].norm());
        let members: [bool; 4] = core::array::from_fn(|j| !assigned[j] && (roots[j] - roots[i]).norm() < tol);
        let m = members.iter().filter(|&&b| b).count();
        if m > 1 {
            let mut c = roots
                .iter()
                .zip(members)
                .filter(|(_, b)| *b)
                .fold(Complex64::new(0.0, 0.0), |acc, (r, _)| acc + r)
                / m as f64;
            for _ in 0..50 {
                let d = eval_derivative(&poly, m, c);
                if d.norm() == 0.0 {
                    break;
                }
                let step = eval_derivative(&poly, m - 1, c) / d;
                c -= step;
                if step.norm() < 1e-16 * (1.0 + c.norm()) {
                    break;
                }
            }
            for j in (0..4).filter(|&j| members[j]) {
                roots[j] = c;
            }
        }
        for j in (0..4).filter(|&j| members[j]) {
            assigned[j] = true;
        }
    }
    roots
}

/// k-th derivative of the polynomial with descending coefficients `poly`.
fn eval_derivative(poly: &[f64; 5], k: usize, s: Complex64) -> Complex64 {
    let degree = poly.len() - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &c) in poly.iter().enumerate() {
        let power = degree - i;
        if power < k {
            break;
        }
        let falling: f64 = (power - k + 1..=power).map(|p| p as f64).product();
        acc = acc * s + c * falling;
    }
    acc
}

/// Linear point controller `u = q̈_r − K (p − p_r)`.
pub fn point_control(p: &PointState, reference: &PointReference, gains: &GainMatrix) -> Vec2 {
    reference.q_ddot - gains.apply(p.q - reference.q, p.q_dot - reference.q_dot)
}

/// `R_ε(ψ) = [cos ψ, −ε sin ψ; sin ψ, ε cos ψ]`, mapping `(v, ω)` to `q̇_ε`.
pub fn r_eps(psi: f64, eps: f64) -> Mat2 {
    let (s, c) = (sin(psi), cos(psi));
    Mat2::new(c, -eps * s, s, eps * c)
}

/// Exact inverse of [`r_eps`]; its determinant is ε.
pub fn r_eps_inv(psi: f64, eps: f64) -> Mat2 {
    let (s, c) = (sin(psi), cos(psi));
    Mat2::new(c, s, -s / eps, c / eps)
}

/// `ω̂ = [0, −εω; ω/ε, 0]`, so that `q̈_ε = R_ε ω̂ v + R_ε a`.
pub fn omega_hat(omega: f64, eps: f64) -> Mat2 {
    Mat2::new(0.0, -eps * omega, omega / eps, 0.0)
}

pub fn epsilon_point(s: &UnicycleState, eps: &EpsilonParams) -> PointState {
    let e = eps.epsilon;
    PointState {
        q: s.position() + e * Vec2::from_heading(s.psi),
        q_dot: r_eps(s.psi, e).mul_vec(Vec2::new(s.v, s.omega)),
    }
}

/// Unicycle inputs that realize the point acceleration `u_eps` exactly:
/// `a = R_ε⁻¹ u_ε − ω̂ v`.
pub fn unicycle_input_from_point(u_eps: Vec2, s: &UnicycleState, eps: &EpsilonParams) -> UnicycleInput {
    let e = eps.epsilon;
    let a = r_eps_inv(s.psi, e).mul_vec(u_eps) - omega_hat(s.omega, e).mul_vec(Vec2::new(s.v, s.omega));
    UnicycleInput { a: a.x, alpha: a.y }
}

/// Steering rate realizing a unicycle angular acceleration on the bicycle:
/// `ξ = cos²φ (Lα − a tan φ) / v`.
pub fn bicycle_input_from_unicycle(
    a: f64,
    alpha: f64,
    s: &BicycleState,
    v_min: f64,
) -> Result<BicycleInput, ControlError> {
    if !(abs(s.v) > v_min) {
        return Err(ControlError::SingularVelocity { v: s.v, v_min });
    }
    let c = cos(s.phi);
    Ok(BicycleInput { a, xi: c * c * (s.wheelbase * alpha - a * tan(s.phi)) / s.v })
}

/// Angular acceleration produced by bicycle inputs:
/// `α = (a/L) tan φ + (v/L) ξ / cos²φ`.
pub fn unicycle_alpha_from_bicycle(s: &BicycleState, u: &BicycleInput) -> f64 {
    let c = cos(s.phi);
    u.a / s.wheelbase * tan(s.phi) + s.v / s.wheelbase * u.xi / (c * c)
}

/// A vehicle model that can be driven through the unicycle input map.
pub trait TrackedVehicle: Kinematics {
    fn unicycle_view(&self) -> UnicycleState;

    fn input_from_unicycle(&self, u: &UnicycleInput, v_min: f64) -> Result<Self::Input, ControlError>;

    /// The model's own `(a, second input)` pair, the second being α or ξ.
    fn input_parts(input: &Self::Input) -> (f64, f64);

    /// ω for the unicycle, φ for the bicycle.
    fn turn_state(&self) -> f64;
}

impl TrackedVehicle for UnicycleState {
    fn unicycle_view(&self) -> UnicycleState {
        *self
    }

    fn input_from_unicycle(&self, u: &UnicycleInput, _v_min: f64) -> Result<UnicycleInput, ControlError> {
        Ok(*u)
    }

    fn input_parts(input: &UnicycleInput) -> (f64, f64) {
        (input.a, input.alpha)
    }

    fn turn_state(&self) -> f64 {
        self.omega
    }
}

impl TrackedVehicle for BicycleState {
    fn unicycle_view(&self) -> UnicycleState {
        self.as_unicycle()
    }

    fn input_from_unicycle(&self, u: &UnicycleInput, v_min: f64) -> Result<BicycleInput, ControlError> {
        bicycle_input_from_unicycle(u.a, u.alpha, self, v_min)
    }

    fn input_parts(input: &BicycleInput) -> (f64, f64) {
        (input.a, input.xi)
    }

    fn turn_state(&self) -> f64 {
        self.phi
    }
}

/// Gains, ε and the steering-map speed floor of one ε-tracking loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonController {
    pub gains: GainMatrix,
    pub eps: EpsilonParams,
    pub v_min: f64,
}

impl EpsilonController {
    pub fn new(gains: GainMatrix, eps: EpsilonParams) -> Self {
        Self { gains, eps, v_min: DEFAULT_V_MIN }
    }

    /// Vehicle input commanding the ε-point toward `reference`.
    pub fn input<V: TrackedVehicle>(&self, vehicle: &V, reference: &PointReference) -> Result<V::Input, ControlError> {
        let uni = vehicle.unicycle_view();
        let p = epsilon_point(&uni, &self.eps);
        let u_eps = point_control(&p, reference, &self.gains);
        let u = unicycle_input_from_point(u_eps, &uni, &self.eps);
        vehicle.input_from_unicycle(&u, self.v_min)
    }
}

/// One sampled-data control step: the input is computed once from the current
/// state and held over `dt`.
pub fn epsilon_tracking_step<V: TrackedVehicle>(
    vehicle: &V,
    reference: &PointReference,
    controller: &EpsilonController,
    dt: f64,
) -> Result<(V, V::Input), ControlError> {
    let input = controller.input(vehicle, reference)?;
    let next = integrate_step(vehicle, &input, dt)?;
    Ok((next, input))
}
