//! Time-indexed references a simulation can track.

use crate::ccplanner::CCTrajectory;
use crate::flatness::TrajectoryDerivatives;
use crate::math::{cos, sin, Vec2};

/// A position trajectory with three time derivatives, evaluable at any time.
pub trait Reference {
    fn derivatives(&self, t: f64) -> TrajectoryDerivatives;

    /// Left limit of [`derivatives`](Self::derivatives) at `t`; differs only
    /// at a breakpoint.
    fn derivatives_before(&self, t: f64) -> TrajectoryDerivatives {
        self.derivatives(t)
    }

    /// First time strictly after `t` where the third derivative jumps.
    fn next_breakpoint(&self, _t: f64) -> Option<f64> {
        None
    }

    /// Last time the reference is defined for.
    fn end_time(&self) -> f64 {
        f64::INFINITY
    }
}

impl<R: Reference + ?Sized> Reference for &R {
    fn derivatives(&self, t: f64) -> TrajectoryDerivatives {
        (**self).derivatives(t)
    }

    fn derivatives_before(&self, t: f64) -> TrajectoryDerivatives {
        (**self).derivatives_before(t)
    }

    fn next_breakpoint(&self, t: f64) -> Option<f64> {
        (**self).next_breakpoint(t)
    }

    fn end_time(&self) -> f64 {
        (**self).end_time()
    }
}

impl Reference for CCTrajectory {
    fn derivatives(&self, t: f64) -> TrajectoryDerivatives {
        self.derivatives_at(t)
    }

    fn derivatives_before(&self, t: f64) -> TrajectoryDerivatives {
        self.sample_before(t).derivatives()
    }

    fn next_breakpoint(&self, t: f64) -> Option<f64> {
        CCTrajectory::next_breakpoint(self, t)
    }

    fn end_time(&self) -> f64 {
        self.duration()
    }
}

/// Constant-velocity straight line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineReference {
    pub start: Vec2,
    pub velocity: Vec2,
}

impl Reference for LineReference {
    fn derivatives(&self, t: f64) -> TrajectoryDerivatives {
        TrajectoryDerivatives { r: self.start + self.velocity * t, r_dot: self.velocity, ..Default::default() }
    }
}

/// `x = speed·t`, `y = amplitude·cos(frequency·t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineReference {
    pub speed: f64,
    pub amplitude: f64,
    /// rad/s.
    pub frequency: f64,
}

impl Reference for CosineReference {
    fn derivatives(&self, t: f64) -> TrajectoryDerivatives {
        let (a, w) = (self.amplitude, self.frequency);
        let (s, c) = (sin(w * t), cos(w * t));
        TrajectoryDerivatives {
            r: Vec2::new(self.speed * t, a * c),
            r_dot: Vec2::new(self.speed, -a * w * s),
            r_ddot: Vec2::new(0.0, -a * w * w * c),
            r_dddot: Vec2::new(0.0, a * w * w * w * s),
        }
    }
}

/// Counter-clockwise circle at constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleReference {
    pub center: Vec2,
    pub radius: f64,
    pub speed: f64,
    /// Polar angle of the start point, rad.
    pub phase: f64,
}

impl Reference for CircleReference {
    fn derivatives(&self, t: f64) -> TrajectoryDerivatives {
        let w = self.speed / self.radius;
        let radial = Vec2::from_heading(self.phase + w * t);
        let tangent = radial.perp();
        TrajectoryDerivatives {
            r: self.center + radial * self.radius,
            r_dot: tangent * self.speed,
            r_ddot: radial * (-self.speed * w),
            r_dddot: tangent * (-self.speed * w * w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_consistent(r: &dyn Reference, t: f64) {
        let h = 1e-5;
        let (m, c, p) = (r.derivatives(t - h), r.derivatives(t), r.derivatives(t + h));
        let d = |a: Vec2, b: Vec2| (b - a) * (0.5 / h);
        assert!((d(m.r, p.r) - c.r_dot).norm() < 1e-7);
        assert!((d(m.r_dot, p.r_dot) - c.r_ddot).norm() < 1e-7);
        assert!((d(m.r_ddot, p.r_ddot) - c.r_dddot).norm() < 1e-7);
    }

    #[test]
    fn analytic_references_are_self_consistent() {
        let refs: [&dyn Reference; 3] = [
            &LineReference { start: Vec2::new(1.0, 2.0), velocity: Vec2::new(3.0, -1.0) },
            &CosineReference { speed: 2.0, amplitude: 3.0, frequency: 0.4 },
            &CircleReference { center: Vec2::new(-1.0, 4.0), radius: 7.0, speed: 2.0, phase: 0.3 },
        ];
        for r in refs {
            for k in 0..20 {
                check_consistent(r, 0.7 * k as f64);
            }
        }
    }
}
