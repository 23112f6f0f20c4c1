//! Clothoid, arc and line primitives and the CCTurn built from them.
//!
//! Each primitive returns samples on its own time grid: `j·dt` from zero,
//! plus a final sample exactly at the segment end when the duration is not a
//! whole number of steps.

use alloc::vec::Vec;

use super::{PlannerError, PlannerParams, SegmentKind, TrajectorySample, TurnPose};
use crate::kinematics::{integrate_step, ExtendedDubinsInput, ExtendedDubinsState};
use crate::math::{abs, cos, sin, sqrt, wrap_angle, Vec2};

/// Residual steps shorter than this fraction of `dt` are merged into the last
/// full step.
const RESIDUAL_FRACTION: f64 = 1e-9;

/// Sample times on `[0, duration]`.
pub(crate) fn time_grid(duration: f64, dt: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut j = 0usize;
    loop {
        let t = j as f64 * dt;
        if t >= duration - RESIDUAL_FRACTION * dt {
            break;
        }
        times.push(t);
        j += 1;
    }
    times.push(duration);
    times
}

/// Clothoid from `start` to `target_kappa` at the maximum curvature rate.
///
/// Positions come from integrating the extended Dubins model; heading and
/// curvature at the final sample are set to their closed-form values.
pub fn clothoid_segment(
    start: TurnPose,
    target_kappa: f64,
    params: &PlannerParams,
) -> Result<Vec<TrajectorySample>, PlannerError> {
    for kappa in [start.kappa, target_kappa] {
        if !(abs(kappa) <= params.kappa_max * (1.0 + 1e-12)) {
            return Err(PlannerError::KappaOutOfRange { kappa, kappa_max: params.kappa_max });
        }
    }
    let delta_kappa = target_kappa - start.kappa;
    if delta_kappa == 0.0 {
        return Ok(Vec::new());
    }
    let sigma = params.sigma_max * delta_kappa.signum();
    let duration = abs(delta_kappa) / params.sigma_max;
    let v = params.v;
    let input = ExtendedDubinsInput { sigma };

    let times = time_grid(duration, params.dt);
    let mut out = Vec::with_capacity(times.len());
    let mut state = ExtendedDubinsState { x: start.x, y: start.y, psi: start.psi, kappa: start.kappa, v };
    let mut prev_t = 0.0;
    for (j, &t) in times.iter().enumerate() {
        if j > 0 {
            state = integrate_step(&state, &input, t - prev_t)?;
        }
        prev_t = t;
        let (psi, kappa) = if j + 1 == times.len() {
            (
                wrap_angle(start.psi + v * (start.kappa * duration + 0.5 * sigma * duration * duration)),
                target_kappa,
            )
        } else {
            (state.psi, state.kappa)
        };
        out.push(TrajectorySample::new(t, Vec2::new(state.x, state.y), psi, kappa, sigma, v, 0));
    }
    Ok(out)
}

/// Circular arc at curvature `κ_max` sweeping `sweep` radians of heading.
///
/// `direction` is `+1` for clockwise and `-1` for counter-clockwise.
pub fn arc_segment(
    start: TurnPose,
    sweep: f64,
    params: &PlannerParams,
    direction: i8,
) -> Result<Vec<TrajectorySample>, PlannerError> {
    if !(sweep >= 0.0) {
        return Err(PlannerError::NegativeSweep { sweep });
    }
    if sweep == 0.0 {
        return Ok(Vec::new());
    }
    let kappa = -f64::from(direction.signum()) * params.kappa_max;
    let v = params.v;
    let radius = 1.0 / params.kappa_max;
    let start_pos = Vec2::new(start.x, start.y);
    let center = start_pos + Vec2::from_heading(start.psi).perp() * (1.0 / kappa);
    let psi_c0 = (start_pos - center).heading();
    let half_turn = kappa.signum() * core::f64::consts::FRAC_PI_2;
    let duration = sweep / (v * params.kappa_max);

    Ok(time_grid(duration, params.dt)
        .into_iter()
        .map(|t| {
            let psi_c = psi_c0 + v * kappa * t;
            let pos = center + Vec2::new(cos(psi_c), sin(psi_c)) * radius;
            TrajectorySample::new(t, pos, wrap_angle(psi_c + half_turn), kappa, 0.0, v, 0)
        })
        .collect())
}

/// Straight line from `p1` to `p2` at constant speed.
pub fn line_segment(p1: Vec2, p2: Vec2, params: &PlannerParams) -> Result<Vec<TrajectorySample>, PlannerError> {
    let delta = p2 - p1;
    let length = delta.norm();
    if !(length > 0.0) {
        return Err(PlannerError::DegenerateLine);
    }
    let psi = delta.heading();
    let duration = length / params.v;
    let times = time_grid(duration, params.dt);
    let last = times.len() - 1;
    Ok(times
        .into_iter()
        .enumerate()
        .map(|(j, t)| {
            let pos = if j == last { p2 } else { p1 + delta * (t / duration) };
            TrajectorySample::new(t, pos, psi, 0.0, 0.0, params.v, 0)
        })
        .collect())
}

/// The four poses bounding the stages of a CCTurn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CCTurnWaypoints {
    pub w_s: TurnPose,
    pub w_cs: TurnPose,
    pub w_ce: TurnPose,
    pub w_e: TurnPose,
    /// Signed heading change, positive counter-clockwise.
    pub delta: f64,
    /// `+1` clockwise, `-1` counter-clockwise, `0` for a null turn.
    pub direction: i8,
}

impl CCTurnWaypoints {
    /// Moves every pose by a rotation about the origin followed by a translation.
    pub(crate) fn transformed(&self, rotation: f64, offset: Vec2) -> Self {
        let f = |p: TurnPose| p.transformed(rotation, offset);
        Self { w_s: f(self.w_s), w_cs: f(self.w_cs), w_ce: f(self.w_ce), w_e: f(self.w_e), ..*self }
    }
}

/// One stage of a turn or connection, with samples on local time.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub kind: SegmentKind,
    pub samples: Vec<TrajectorySample>,
}

impl Piece {
    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn end_pose(&self) -> Option<TurnPose> {
        self.samples.last().map(TurnPose::from_sample)
    }

    pub(crate) fn transformed(&self, rotation: f64, offset: Vec2) -> Self {
        Self {
            kind: self.kind,
            samples: self.samples.iter().map(|s| s.transformed(rotation, offset)).collect(),
        }
    }
}

/// Peak curvature and arc sweep for a heading change of `|delta|`.
pub fn turn_profile(delta: f64, params: &PlannerParams) -> (f64, f64) {
    let magnitude = abs(delta);
    let psi_cs = params.psi_cs();
    if magnitude >= 2.0 * psi_cs {
        (params.kappa_max, magnitude - 2.0 * psi_cs)
    } else {
        (sqrt(magnitude * params.sigma_max / params.v), 0.0)
    }
}

/// Time a turn of `delta` takes.
pub fn turn_duration(delta: f64, params: &PlannerParams) -> f64 {
    let (peak, sweep) = turn_profile(delta, params);
    2.0 * peak / params.sigma_max + sweep / (params.v * params.kappa_max)
}

/// Clothoid-in, arc, clothoid-out realizing the heading change `delta` from
/// `entry`.
///
/// Turns too small for two full transitions use a clothoid pair with a lower
/// peak curvature and no arc.
pub fn cc_turn(
    entry: TurnPose,
    delta: f64,
    params: &PlannerParams,
) -> Result<(CCTurnWaypoints, Vec<Piece>), PlannerError> {
    if !delta.is_finite() {
        return Err(PlannerError::InvalidParam { name: "delta", value: delta });
    }
    let entry = TurnPose { kappa: 0.0, sigma: 0.0, ..entry };
    let sign = delta.signum();
    let direction = if delta == 0.0 { 0 } else { -(sign as i8) };
    let (peak, sweep) = turn_profile(delta, params);

    let clothoid_in = clothoid_segment(entry, sign * peak, params)?;
    let w_cs = clothoid_in.last().map_or(entry, TurnPose::from_sample);
    let arc = arc_segment(w_cs, sweep, params, direction)?;
    let w_ce = arc.last().map_or(w_cs, TurnPose::from_sample);
    let mut clothoid_out = clothoid_segment(w_ce, 0.0, params)?;
    if let Some(last) = clothoid_out.last_mut() {
        // heading over the whole turn is known exactly
        *last = TrajectorySample::new(last.t, last.r, wrap_angle(entry.psi + delta), 0.0, last.sigma, params.v, 0);
    }
    let w_e = clothoid_out.last().map_or(w_ce, TurnPose::from_sample);

    let pieces = [
        (SegmentKind::ClothoidIn, clothoid_in),
        (SegmentKind::Arc, arc),
        (SegmentKind::ClothoidOut, clothoid_out),
    ]
    .into_iter()
    .filter(|(_, s)| !s.is_empty())
    .map(|(kind, samples)| Piece { kind, samples })
    .collect();
    let waypoints = CCTurnWaypoints {
        w_s: entry,
        w_cs: TurnPose { sigma: 0.0, ..w_cs },
        w_ce: TurnPose { sigma: -sign * params.sigma_max, ..w_ce },
        w_e: TurnPose { sigma: 0.0, ..w_e },
        delta,
        direction,
    };
    Ok((waypoints, pieces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn params(v: f64, kappa_max: f64, sigma_max: f64, dt: f64) -> PlannerParams {
        PlannerParams::new(v, kappa_max, sigma_max, dt).unwrap()
    }

    fn origin() -> TurnPose {
        TurnPose { x: 0.0, y: 0.0, psi: 0.0, kappa: 0.0, sigma: 0.0 }
    }

    #[test]
    fn grid_includes_residual_end() {
        assert_eq!(time_grid(0.25, 0.1).len(), 4);
        assert_eq!(*time_grid(0.25, 0.1).last().unwrap(), 0.25);
        assert_eq!(time_grid(2.0, 0.1).len(), 21);
    }

    #[test]
    fn line_examples() {
        let p = params(5.0, 1.0, 1.0, 0.1);
        let s = line_segment(Vec2::ZERO, Vec2::new(10.0, 0.0), &p).unwrap();
        assert_eq!(s.len(), 21);
        for w in s.windows(2) {
            assert!(((w[1].r - w[0].r).norm() - 0.5).abs() < 1e-12);
        }
        assert!(s.iter().all(|x| x.psi == 0.0 && x.kappa == 0.0 && x.sigma == 0.0));
        let s = line_segment(Vec2::ZERO, Vec2::new(0.0, -3.0), &p).unwrap();
        assert_eq!(s[0].psi, -FRAC_PI_2);
        let s = line_segment(Vec2::ZERO, Vec2::new(3.0, 4.0), &p).unwrap();
        assert!((s.last().unwrap().t - 1.0).abs() < 1e-15);
        assert_eq!(line_segment(Vec2::ZERO, Vec2::ZERO, &p), Err(PlannerError::DegenerateLine));
    }

    #[test]
    fn clothoid_duration_and_heading() {
        let p = params(5.0, 2.7, 0.17, 0.01);
        let s = clothoid_segment(origin(), 2.7, &p).unwrap();
        let end = s.last().unwrap();
        assert!((p.t_cs() - 15.882352941176471).abs() < 1e-12);
        assert!((end.t - p.t_cs()).abs() < 1e-12);
        let psi_cs = 5.0 * 2.7 * 2.7 / (2.0 * 0.17);
        assert!((end.psi - wrap_angle(psi_cs)).abs() < 1e-9);
        // the ramp itself matches the closed form
        for x in &s {
            assert!((x.kappa - 0.17 * x.t).abs() < 1e-12);
        }
        assert!(clothoid_segment(origin(), 0.0, &p).unwrap().is_empty());
        assert!(matches!(clothoid_segment(origin(), 3.0, &p), Err(PlannerError::KappaOutOfRange { .. })));
    }

    #[test]
    fn quarter_arc() {
        let p = params(1.0, 1.0, 1.0, 0.01);
        let s = arc_segment(origin(), FRAC_PI_2, &p, -1).unwrap();
        let end = s.last().unwrap();
        assert!((end.t - FRAC_PI_2).abs() < 1e-15);
        assert!((end.r - Vec2::new(1.0, 1.0)).norm() < 1e-12);
        assert!((end.psi - FRAC_PI_2).abs() < 1e-12);
        for w in s.windows(2).take(s.len() - 2) {
            let chord = 2.0 * sin(0.5 * 0.01);
            assert!(((w[1].r - w[0].r).norm() - chord).abs() < 1e-12);
        }
        let s = arc_segment(origin(), FRAC_PI_2, &p, 1).unwrap();
        assert!((s.last().unwrap().r - Vec2::new(1.0, -1.0)).norm() < 1e-12);
        assert!(arc_segment(origin(), 0.0, &p, 1).unwrap().is_empty());
        assert!(arc_segment(origin(), -0.1, &p, 1).is_err());
    }

    #[test]
    fn full_turn_has_trapezoid_profile() {
        let p = params(1.0, 1.0, 1.0, 0.01);
        let (w, pieces) = cc_turn(origin(), 2.0, &p).unwrap();
        assert_eq!(pieces.iter().map(|x| x.kind).collect::<Vec<_>>(), [SegmentKind::ClothoidIn, SegmentKind::Arc, SegmentKind::ClothoidOut]);
        assert_eq!(w.w_cs.kappa, 1.0);
        assert_eq!(w.w_ce.kappa, 1.0);
        assert_eq!(w.direction, -1);
        assert!((w.w_e.psi - 2.0).abs() < 1e-12);
        assert!(pieces[1].samples.iter().all(|s| s.kappa == 1.0 && s.sigma == 0.0));
    }

    #[test]
    fn boundary_turn_has_no_arc() {
        let p = params(1.0, 1.0, 1.0, 0.01);
        let (w, pieces) = cc_turn(origin(), -2.0 * p.psi_cs(), &p).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(w.w_cs.kappa, -1.0);
        assert_eq!(w.direction, 1);
    }

    #[test]
    fn null_turn_is_empty() {
        let p = params(1.0, 1.0, 1.0, 0.01);
        let (w, pieces) = cc_turn(origin(), 0.0, &p).unwrap();
        assert!(pieces.is_empty());
        assert_eq!(w.w_e, origin());
    }

    #[test]
    fn turn_duration_matches_samples() {
        let p = params(5.0, 0.5, 0.3, 0.01);
        for delta in [0.05, 0.4, 1.0, 3.0, -2.5] {
            let (_, pieces) = cc_turn(origin(), delta, &p).unwrap();
            let total: f64 = pieces.iter().map(Piece::duration).sum();
            assert!((total - turn_duration(delta, &p)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn turn_heading_change(delta in -PI..PI, v in 1.0f64..5.0, kappa_max in 0.2f64..2.0, sigma_max in 0.05f64..1.0) {
            let p = params(v, kappa_max, sigma_max, 0.01);
            let (w, pieces) = cc_turn(origin(), delta, &p).unwrap();
            // heading integral of the sampled curvature (piecewise linear in t)
            let mut heading = 0.0;
            for piece in &pieces {
                for pair in piece.samples.windows(2) {
                    heading += v * 0.5 * (pair[0].kappa + pair[1].kappa) * (pair[1].t - pair[0].t);
                }
            }
            prop_assert!((heading - delta).abs() < 1e-6);
            prop_assert!((wrap_angle(w.w_e.psi - delta)).abs() < 1e-12);
            prop_assert!(pieces.iter().flat_map(|x| &x.samples).all(|s| s.kappa.abs() <= kappa_max));
        }
    }
}
