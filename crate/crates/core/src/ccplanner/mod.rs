//! Continuous-curvature trajectories through oriented waypoints.
//!
//! A trajectory is driven at constant speed `v` and built from three
//! primitives: clothoids (curvature ramping at `±σ_max`), circular arcs at
//! `κ_max`, and straight lines. A CCTurn chains clothoid-in, arc and
//! clothoid-out to change heading by a prescribed angle with curvature
//! continuous throughout.
//!
//! Consecutive waypoints are joined turn–line–turn: the first turn swings
//! from the start heading onto a line, the second from the line onto the end
//! heading. Every waypoint is therefore passed exactly, at zero curvature.
//!
//! ```
//! use epstrack_core::ccplanner::{connect_waypoints, PlannerParams, Waypoint};
//!
//! let params = PlannerParams::new(5.0, 0.5, 0.2, 0.01).unwrap();
//! let waypoints = [Waypoint::new(0.0, 0.0, 0.0), Waypoint::new(40.0, 10.0, 1.0)];
//! let traj = connect_waypoints(&waypoints, &params).unwrap();
//! let end = traj.samples().last().unwrap();
//! assert!((end.r.x - 40.0).abs() < 1e-9 && (end.psi - 1.0).abs() < 1e-9);
//! ```

pub mod segments;

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

pub use segments::{arc_segment, cc_turn, clothoid_segment, line_segment, turn_duration, CCTurnWaypoints, Piece};

use crate::flatness::TrajectoryDerivatives;
use crate::kinematics::KinematicsError;
use crate::math::{abs, cos, sin, wrap_angle, Vec2, TAU};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PlannerError {
    #[error("{name} = {value} is not a positive finite number")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("waypoint {index} is not finite")]
    InvalidWaypoint { index: usize },
    #[error("need at least two waypoints, got {count}")]
    TooFewWaypoints { count: usize },
    #[error("curvature {kappa} exceeds the limit {kappa_max}")]
    KappaOutOfRange { kappa: f64, kappa_max: f64 },
    #[error("arc sweep {sweep} is negative")]
    NegativeSweep { sweep: f64 },
    #[error("line endpoints coincide")]
    DegenerateLine,
    #[error("no turn-line-turn connection from waypoint {from} to waypoint {to}")]
    Infeasible { from: usize, to: usize },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerParams {
    /// Constant speed, m/s.
    pub v: f64,
    /// Curvature limit, 1/m.
    pub kappa_max: f64,
    /// Curvature-rate limit, 1/(m·s).
    pub sigma_max: f64,
    /// Sample spacing in time, s.
    pub dt: f64,
}

impl PlannerParams {
    pub fn new(v: f64, kappa_max: f64, sigma_max: f64, dt: f64) -> Result<Self, PlannerError> {
        for (name, value) in [("v", v), ("kappa_max", kappa_max), ("sigma_max", sigma_max), ("dt", dt)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PlannerError::InvalidParam { name, value });
            }
        }
        Ok(Self { v, kappa_max, sigma_max, dt })
    }

    /// Duration of a full clothoid from zero to `κ_max`.
    pub fn t_cs(&self) -> f64 {
        self.kappa_max / self.sigma_max
    }

    /// Heading swept by a full clothoid from zero to `κ_max`.
    pub fn psi_cs(&self) -> f64 {
        self.v * self.kappa_max * self.kappa_max / (2.0 * self.sigma_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Waypoint {
    /// Heading is wrapped into `[-π, π)`.
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi: wrap_angle(psi) }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.psi.is_finite()
    }
}

/// Pose with curvature and curvature rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnPose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub kappa: f64,
    pub sigma: f64,
}

impl TurnPose {
    pub fn from_sample(s: &TrajectorySample) -> Self {
        Self { x: s.r.x, y: s.r.y, psi: s.psi, kappa: s.kappa, sigma: s.sigma }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub(crate) fn transformed(&self, rotation: f64, offset: Vec2) -> Self {
        let p = self.position().rotate(rotation) + offset;
        Self { x: p.x, y: p.y, psi: wrap_angle(self.psi + rotation), ..*self }
    }
}

impl From<Waypoint> for TurnPose {
    fn from(w: Waypoint) -> Self {
        Self { x: w.x, y: w.y, psi: w.psi, kappa: 0.0, sigma: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    ClothoidIn,
    Arc,
    ClothoidOut,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: Vec2,
    pub r_dot: Vec2,
    pub r_ddot: Vec2,
    pub r_dddot: Vec2,
    pub psi: f64,
    pub kappa: f64,
    /// Curvature rate on the interval that starts at this sample.
    pub sigma: f64,
    pub segment: usize,
}

impl TrajectorySample {
    /// Builds a sample with derivatives from the extended Dubins state.
    pub fn new(t: f64, r: Vec2, psi: f64, kappa: f64, sigma: f64, v: f64, segment: usize) -> Self {
        let (s, c) = (sin(psi), cos(psi));
        let v2 = v * v;
        Self {
            t,
            r,
            r_dot: Vec2::new(v * c, v * s),
            r_ddot: Vec2::new(-v2 * kappa * s, v2 * kappa * c),
            r_dddot: Vec2::new(
                -v2 * (sigma * s + v * kappa * kappa * c),
                -v2 * (-sigma * c + v * kappa * kappa * s),
            ),
            psi,
            kappa,
            sigma,
            segment,
        }
    }

    pub fn derivatives(&self) -> TrajectoryDerivatives {
        TrajectoryDerivatives { r: self.r, r_dot: self.r_dot, r_ddot: self.r_ddot, r_dddot: self.r_dddot }
    }

    pub(crate) fn transformed(&self, rotation: f64, offset: Vec2) -> Self {
        Self {
            r: self.r.rotate(rotation) + offset,
            r_dot: self.r_dot.rotate(rotation),
            r_ddot: self.r_ddot.rotate(rotation),
            r_dddot: self.r_dddot.rotate(rotation),
            psi: wrap_angle(self.psi + rotation),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentInfo {
    pub kind: SegmentKind,
    pub t_start: f64,
    pub duration: f64,
    /// Index of the segment's first sample.
    pub first_sample: usize,
    /// Index into [`CCTrajectory::turns`] for turn stages.
    pub turn: Option<usize>,
}

/// A time-indexed continuous-curvature trajectory.
///
/// A sample at a segment boundary belongs to the segment that starts there.
#[derive(Debug, Clone, PartialEq)]
pub struct CCTrajectory {
    params: PlannerParams,
    samples: Vec<TrajectorySample>,
    segments: Vec<SegmentInfo>,
    turns: Vec<CCTurnWaypoints>,
}

impl CCTrajectory {
    pub fn params(&self) -> &PlannerParams {
        &self.params
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn segments(&self) -> &[SegmentInfo] {
        &self.segments
    }

    pub fn turns(&self) -> &[CCTurnWaypoints] {
        &self.turns
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Sample indices of segment `i`, including the sample that ends it.
    pub fn segment_range(&self, i: usize) -> Range<usize> {
        let start = self.segments[i].first_sample;
        let end = self.segments.get(i + 1).map_or(self.samples.len(), |s| s.first_sample + 1);
        start..end
    }

    /// Sample indices of turn `i`, including the sample that ends it.
    pub fn turn_range(&self, i: usize) -> Range<usize> {
        let mut ids = self.segments.iter().enumerate().filter(|(_, s)| s.turn == Some(i)).map(|(k, _)| k);
        let first = ids.next().expect("turn index out of range");
        let last = ids.next_back().unwrap_or(first);
        self.segment_range(first).start..self.segment_range(last).end
    }

    /// Index of the last sample at or before `t`, clamped to the first sample.
    pub fn index_at(&self, t: f64) -> usize {
        self.samples.partition_point(|s| s.t <= t).saturating_sub(1)
    }

    /// Exact state at time `t`, propagated from the preceding sample.
    ///
    /// Past the end the trajectory continues straight.
    pub fn sample_at(&self, t: f64) -> TrajectorySample {
        self.propagate(self.index_at(t), t)
    }

    /// Like [`sample_at`](Self::sample_at) but taking the left limit at a
    /// segment boundary, where the curvature rate jumps.
    pub fn sample_before(&self, t: f64) -> TrajectorySample {
        let k = self.samples.partition_point(|s| s.t < t).saturating_sub(1);
        self.propagate(k, t)
    }

    /// Start times of every segment after the first.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.t_start)
    }

    /// First segment boundary strictly after `t`.
    pub fn next_breakpoint(&self, t: f64) -> Option<f64> {
        let i = self.segments.partition_point(|s| s.t_start <= t);
        self.segments.get(i).map(|s| s.t_start)
    }

    fn propagate(&self, k: usize, t: f64) -> TrajectorySample {
        let base = &self.samples[k];
        let tau = t - base.t;
        if tau == 0.0 {
            return *base;
        }
        let v = self.params.v;
        let sigma = if k + 1 == self.samples.len() { 0.0 } else { base.sigma };
        let heading = |s: f64| base.psi + v * (base.kappa * s + 0.5 * sigma * s * s);
        let r = base.r + gauss_legendre(tau, |s| Vec2::from_heading(heading(s))) * v;
        TrajectorySample::new(t, r, wrap_angle(heading(tau)), base.kappa + sigma * tau, sigma, v, base.segment)
    }

    pub fn derivatives_at(&self, t: f64) -> TrajectoryDerivatives {
        self.sample_at(t).derivatives()
    }
}

/// Five-point Gauss–Legendre quadrature of `f` over `[0, h]`.
fn gauss_legendre(h: f64, f: impl Fn(f64) -> Vec2) -> Vec2 {
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let half = 0.5 * h;
    NODES.iter().fold(Vec2::ZERO, |acc, &(x, w)| acc + f(half * (1.0 + x)) * (w * half))
}

/// Recomputes every sample's derivatives from its heading, curvature and
/// curvature rate.
pub fn annotate_derivatives(mut traj: CCTrajectory) -> CCTrajectory {
    let v = traj.params.v;
    for s in &mut traj.samples {
        *s = TrajectorySample::new(s.t, s.r, s.psi, s.kappa, s.sigma, v, s.segment);
    }
    traj
}

/// Plans a trajectory through `waypoints` in order.
pub fn connect_waypoints(waypoints: &[Waypoint], params: &PlannerParams) -> Result<CCTrajectory, PlannerError> {
    if waypoints.len() < 2 {
        return Err(PlannerError::TooFewWaypoints { count: waypoints.len() });
    }
    if let Some(index) = waypoints.iter().position(|w| !w.is_finite()) {
        return Err(PlannerError::InvalidWaypoint { index });
    }
    let waypoints: Vec<Waypoint> = waypoints.iter().map(|w| Waypoint::new(w.x, w.y, w.psi)).collect();

    let mut pieces: Vec<(Piece, Option<usize>)> = Vec::new();
    let mut turns = Vec::new();
    for (i, pair) in waypoints.windows(2).enumerate() {
        let plan = connect_pair(&pair[0], &pair[1], params)?.ok_or(PlannerError::Infeasible { from: i, to: i + 1 })?;
        for stage in plan {
            match stage {
                Stage::Turn(w, turn_pieces) => {
                    let id = turns.len();
                    turns.push(w);
                    pieces.extend(turn_pieces.into_iter().map(|p| (p, Some(id))));
                }
                Stage::Line(p) => pieces.push((p, None)),
            }
        }
        // land exactly on the waypoint
        let end = &pair[1];
        if let Some((last, _)) = pieces.last_mut() {
            if let Some(s) = last.samples.last_mut() {
                *s = TrajectorySample::new(s.t, end.position(), end.psi, 0.0, s.sigma, params.v, 0);
            }
        }
    }

    let mut samples = Vec::new();
    let mut segments = Vec::with_capacity(pieces.len());
    let mut t_offset = 0.0;
    let count = pieces.len();
    for (id, (piece, turn)) in pieces.into_iter().enumerate() {
        let duration = piece.duration();
        segments.push(SegmentInfo { kind: piece.kind, t_start: t_offset, duration, first_sample: samples.len(), turn });
        let keep = if id + 1 == count { piece.samples.len() } else { piece.samples.len() - 1 };
        samples.extend(piece.samples[..keep].iter().map(|s| TrajectorySample { t: s.t + t_offset, segment: id, ..*s }));
        t_offset += duration;
    }
    Ok(annotate_derivatives(CCTrajectory { params: *params, samples, segments, turns }))
}

enum Stage {
    Turn(CCTurnWaypoints, Vec<Piece>),
    Line(Piece),
}

/// Number of line headings tried before bisecting sign changes.
const HEADING_SCAN: usize = 720;

/// Turn–line–turn connection from `a` to `b` with the shortest duration.
fn connect_pair(a: &Waypoint, b: &Waypoint, params: &PlannerParams) -> Result<Option<Vec<Stage>>, PlannerError> {
    let (pa, pb) = (a.position(), b.position());
    let chord = pb - pa;
    if chord.norm() == 0.0 {
        return Ok(None);
    }
    if abs(wrap_angle(b.psi - a.psi)) < 1e-12 && abs(Vec2::from_heading(a.psi).cross(chord)) < 1e-9 * chord.norm() && Vec2::from_heading(a.psi).dot(chord) > 0.0 {
        return Ok(Some(alloc::vec![Stage::Line(Piece { kind: SegmentKind::Line, samples: line_segment(pa, pb, params)? })]));
    }

    let geometry = |theta: f64| -> Result<Connection, PlannerError> {
        let delta_in = wrap_angle(theta - a.psi);
        let delta_out = wrap_angle(b.psi - theta);
        let p1 = pa + turn_displacement(delta_in, params)?.rotate(a.psi);
        let p2 = pb - turn_displacement(delta_out, params)?.rotate(theta);
        let gap = p2 - p1;
        let u = Vec2::from_heading(theta);
        Ok(Connection { theta, delta_in, delta_out, p1, p2, residual: u.cross(gap), along: u.dot(gap) })
    };

    let tolerance = 1e-9 * (1.0 + chord.norm());
    let mut best: Option<(f64, Connection)> = None;
    let mut consider = |c: Connection| {
        if abs(c.residual) > tolerance || c.along < -tolerance {
            return;
        }
        let time = turn_duration(c.delta_in, params) + turn_duration(c.delta_out, params) + c.along.max(0.0) / params.v;
        if best.as_ref().is_none_or(|(t, _)| time < *t) {
            best = Some((time, c));
        }
    };

    let step = TAU / HEADING_SCAN as f64;
    let mut prev = geometry(-PI)?;
    for k in 1..=HEADING_SCAN {
        let next = geometry(-PI + k as f64 * step)?;
        if prev.residual == 0.0 {
            consider(prev);
        } else if prev.residual.signum() != next.residual.signum() && next.residual != 0.0 {
            let (mut lo, mut hi) = (prev, next);
            for _ in 0..100 {
                let mid = geometry(0.5 * (lo.theta + hi.theta))?;
                if mid.theta <= lo.theta || mid.theta >= hi.theta || mid.residual == 0.0 {
                    lo = mid;
                    break;
                }
                if mid.residual.signum() == lo.residual.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            consider(if abs(lo.residual) <= abs(hi.residual) { lo } else { hi });
        }
        prev = next;
    }

    let Some((_, c)) = best else {
        return Ok(None);
    };
    let mut stages = Vec::with_capacity(3);
    let (w_in, pieces_in) = cc_turn(TurnPose::from(Waypoint::new(0.0, 0.0, 0.0)), c.delta_in, params)?;
    if !pieces_in.is_empty() {
        stages.push(Stage::Turn(w_in.transformed(a.psi, pa), pieces_in.iter().map(|p| p.transformed(a.psi, pa)).collect()));
    }
    if (c.p2 - c.p1).norm() > 1e-12 {
        stages.push(Stage::Line(Piece { kind: SegmentKind::Line, samples: line_segment(c.p1, c.p2, params)? }));
    }
    let (w_out, pieces_out) = cc_turn(TurnPose::from(Waypoint::new(0.0, 0.0, 0.0)), c.delta_out, params)?;
    if !pieces_out.is_empty() {
        stages.push(Stage::Turn(w_out.transformed(c.theta, c.p2), pieces_out.iter().map(|p| p.transformed(c.theta, c.p2)).collect()));
    }
    Ok(Some(stages))
}

#[derive(Debug, Clone, Copy)]
struct Connection {
    theta: f64,
    delta_in: f64,
    delta_out: f64,
    p1: Vec2,
    p2: Vec2,
    residual: f64,
    along: f64,
}

/// End position of a turn of `delta` starting at the origin heading along +x.
fn turn_displacement(delta: f64, params: &PlannerParams) -> Result<Vec2, PlannerError> {
    let (_, pieces) = cc_turn(TurnPose::from(Waypoint::new(0.0, 0.0, 0.0)), delta, params)?;
    Ok(pieces.last().and_then(Piece::end_pose).map_or(Vec2::ZERO, |p| p.position()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatness::flat_states;
    use core::f64::consts::FRAC_PI_4;

    fn scenario_params() -> PlannerParams {
        PlannerParams::new(5.0, 2.7, 0.17, 0.01).unwrap()
    }

    fn scenario_waypoints() -> [Waypoint; 3] {
        [Waypoint::new(0.0, 0.0, 0.0), Waypoint::new(30.0, 5.0, 5.0 * FRAC_PI_4), Waypoint::new(50.0, 0.0, FRAC_PI_4)]
    }

    fn passes(traj: &CCTrajectory, w: &Waypoint) -> bool {
        traj.samples()
            .iter()
            .any(|s| (s.r - w.position()).norm() < 1e-3 && abs(wrap_angle(s.psi - w.psi)) < 1e-3)
    }

    #[test]
    fn param_validation() {
        assert!(matches!(PlannerParams::new(0.0, 1.0, 1.0, 0.1), Err(PlannerError::InvalidParam { name: "v", .. })));
        assert!(matches!(PlannerParams::new(1.0, 1.0, f64::NAN, 0.1), Err(PlannerError::InvalidParam { name: "sigma_max", .. })));
    }

    #[test]
    fn aligned_waypoints_give_one_line() {
        let p = PlannerParams::new(5.0, 1.0, 1.0, 0.1).unwrap();
        let traj = connect_waypoints(&[Waypoint::new(0.0, 0.0, 0.0), Waypoint::new(10.0, 0.0, 0.0)], &p).unwrap();
        assert_eq!(traj.segments().len(), 1);
        assert_eq!(traj.segments()[0].kind, SegmentKind::Line);
        assert_eq!(traj.samples().len(), 21);
    }

    #[test]
    fn waypoint_errors() {
        let p = scenario_params();
        assert_eq!(connect_waypoints(&[Waypoint::new(0.0, 0.0, 0.0)], &p), Err(PlannerError::TooFewWaypoints { count: 1 }));
        let bad = [Waypoint::new(0.0, 0.0, 0.0), Waypoint { x: f64::NAN, y: 0.0, psi: 0.0 }];
        assert_eq!(connect_waypoints(&bad, &p), Err(PlannerError::InvalidWaypoint { index: 1 }));
        let same = [Waypoint::new(0.0, 0.0, 0.0), Waypoint::new(40.0, 5.0, 0.0), Waypoint::new(40.0, 5.0, 0.0)];
        assert_eq!(connect_waypoints(&same, &p), Err(PlannerError::Infeasible { from: 1, to: 2 }));
    }

    #[test]
    fn three_waypoint_scenario_is_feasible() {
        let traj = connect_waypoints(&scenario_waypoints(), &scenario_params()).unwrap();
        for w in scenario_waypoints() {
            assert!(passes(&traj, &w));
        }
        let first = traj.samples()[0];
        assert_eq!((first.t, first.r, first.psi), (0.0, Vec2::ZERO, 0.0));
    }

    #[test]
    fn samples_are_continuous() {
        let p = scenario_params();
        let traj = connect_waypoints(&scenario_waypoints(), &p).unwrap();
        for w in traj.samples().windows(2) {
            let dt = w[1].t - w[0].t;
            assert!(dt > 0.0 && dt <= p.dt * (1.0 + 1e-9));
            assert!(abs((w[1].r - w[0].r).norm() - p.v * dt) <= 1e-3 * p.v * p.dt);
            assert!(abs(w[1].kappa - w[0].kappa) <= p.sigma_max * dt * (1.0 + 1e-6));
            assert!(w[1].kappa.abs() <= p.kappa_max);
        }
    }

    #[test]
    fn joins_match_propagation() {
        let p = scenario_params();
        let traj = connect_waypoints(&scenario_waypoints(), &p).unwrap();
        for k in 1..traj.samples().len() {
            let s = traj.samples()[k];
            let prev = traj.samples()[k - 1];
            let exact = traj.sample_at(s.t);
            assert_eq!(exact, s);
            let just_before = traj.sample_at(prev.t + 0.999_999 * (s.t - prev.t));
            assert!((just_before.r - s.r).norm() < 1e-6 * p.v);
            assert!(abs(wrap_angle(just_before.psi - s.psi)) < 1e-6);
            assert!(abs(just_before.kappa - s.kappa) < 1e-6);
        }
    }

    #[test]
    fn flat_states_reproduce_samples() {
        let p = scenario_params();
        let traj = connect_waypoints(&scenario_waypoints(), &p).unwrap();
        for s in traj.samples() {
            let f = flat_states(&s.derivatives()).unwrap();
            assert!(abs(wrap_angle(f.psi_r - s.psi)) < 1e-6);
            assert!(abs(f.v_r - p.v) < 1e-6);
            assert!(abs(f.omega_r - p.v * s.kappa) < 1e-6);
            assert!(abs(f.a_r) < 1e-9);
            let sigma_from_alpha = f.alpha_r / p.v;
            assert!(abs(sigma_from_alpha - s.sigma) < 1e-9);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = scenario_params();
        let traj = connect_waypoints(&scenario_waypoints(), &p).unwrap();
        let n = traj.samples().len();
        for k in 1..n - 1 {
            let (a, s, b) = (traj.samples()[k - 1], traj.samples()[k], traj.samples()[k + 1]);
            if a.segment != s.segment || b.segment != s.segment || abs((b.t - s.t) - (s.t - a.t)) > 1e-12 {
                continue;
            }
            let h = s.t - a.t;
            let vel = (b.r - a.r) * (0.5 / h);
            let acc = (b.r_dot - a.r_dot) * (0.5 / h);
            let jerk = (b.r_ddot - a.r_ddot) * (0.5 / h);
            assert!((vel - s.r_dot).norm() < 1e-3 * p.v);
            assert!((acc - s.r_ddot).norm() < 1e-3 * p.v);
            assert!((jerk - s.r_dddot).norm() < 1e-3 * p.v);
        }
    }

    #[test]
    fn arc_has_constant_acceleration() {
        let p = PlannerParams::new(2.0, 0.5, 0.5, 0.01).unwrap();
        let w = [Waypoint::new(0.0, 0.0, 0.0), Waypoint::new(0.0, 20.0, PI)];
        let traj = connect_waypoints(&w, &p).unwrap();
        let arc = traj.segments().iter().position(|s| s.kind == SegmentKind::Arc).expect("turn has an arc");
        for k in traj.segment_range(arc) {
            let s = traj.samples()[k];
            if s.segment == arc {
                assert!(abs(s.r_ddot.norm() - p.v * p.v * p.kappa_max) < 1e-12);
            }
        }
        for s in traj.samples().iter().filter(|s| s.kappa == 0.0 && s.sigma == 0.0) {
            assert_eq!((s.r_ddot, s.r_dddot), (Vec2::ZERO, Vec2::ZERO));
        }
    }

    #[test]
    fn reversed_layout_is_mirrored() {
        // a layout symmetric about the y axis: driving it backwards is its mirror image
        let p = PlannerParams::new(3.0, 0.6, 0.4, 0.01).unwrap();
        let fwd = [Waypoint::new(-20.0, 0.0, 0.3), Waypoint::new(0.0, 6.0, 0.0), Waypoint::new(20.0, 0.0, -0.3)];
        let rev: Vec<Waypoint> = fwd.iter().rev().map(|w| Waypoint::new(w.x, w.y, w.psi + PI)).collect();
        for (r, f) in rev.iter().zip(&fwd) {
            assert!((r.position() - Vec2::new(-f.x, f.y)).norm() < 1e-12);
            assert!(abs(wrap_angle(r.psi - (PI - f.psi))) < 1e-12);
        }
        let a = connect_waypoints(&fwd, &p).unwrap();
        let b = connect_waypoints(&rev, &p).unwrap();
        assert_eq!(a.samples().len(), b.samples().len());
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert!((x.r - Vec2::new(-y.r.x, y.r.y)).norm() < 1e-6);
            assert!(abs(wrap_angle(x.psi - (PI - y.psi))) < 1e-6);
            assert!(abs(x.kappa + y.kappa) < 1e-9);
        }
    }
}
