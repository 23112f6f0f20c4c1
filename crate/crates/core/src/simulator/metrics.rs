//! Summary figures of a simulation log.

use super::SimulationLog;
use crate::math::abs;

/// ε-point error below which the vehicle counts as being in the pulling phase.
pub const POINT_CONVERGED: f64 = 1e-3;

/// Slack allowed per step when checking that |e_ψ| does not grow.
pub const HEADING_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settling {
    pub threshold: f64,
    /// Earliest time after which the position error stays at or below the
    /// threshold, if it ever does.
    pub time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceMetrics {
    pub initial_err_pos: f64,
    pub max_err_pos: f64,
    pub final_err_pos: f64,
    pub max_err_point: f64,
    pub final_err_point: f64,
    /// Thresholds `ε`, `0.1ε` and `0.01ε`.
    pub settling: [Settling; 3],
    /// Log-linear decay rate of the ε-point error, 1/s.
    pub point_decay_rate: Option<f64>,
    /// Whether |e_ψ| stays non-increasing once the ε-point has converged;
    /// `None` if it never converges.
    pub heading_monotone: Option<bool>,
}

pub fn convergence_metrics(log: &SimulationLog) -> ConvergenceMetrics {
    let records = &log.records;
    let first = records.first().expect("simulation log is empty");
    let last = records.last().expect("simulation log is empty");
    let max = |f: fn(&super::LogRecord) -> f64| records.iter().map(f).fold(0.0f64, f64::max);

    let settling = [1.0, 0.1, 0.01].map(|scale| {
        let threshold = scale * log.epsilon;
        let time = match records.iter().rposition(|r| r.err_pos > threshold) {
            None => Some(first.t),
            Some(k) if k + 1 < records.len() => Some(records[k + 1].t),
            Some(_) => None,
        };
        Settling { threshold, time }
    });

    let heading_monotone = records.iter().position(|r| r.err_point < POINT_CONVERGED).map(|start| {
        records[start..]
            .windows(2)
            .all(|w| abs(w[1].err_psi) <= abs(w[0].err_psi) + HEADING_SLACK)
    });

    ConvergenceMetrics {
        initial_err_pos: first.err_pos,
        max_err_pos: max(|r| r.err_pos),
        final_err_pos: last.err_pos,
        max_err_point: max(|r| r.err_point),
        final_err_point: last.err_point,
        settling,
        point_decay_rate: decay_rate(records.iter().map(|r| (r.t, r.err_point))),
        heading_monotone,
    }
}

/// Least-squares slope of `ln e` against `t` over the stretch where `e` lies
/// between `1e-8` and `1e-2` of its initial value.
///
/// Falls back to every positive sample when the window holds fewer than ten.
pub fn decay_rate(samples: impl Iterator<Item = (f64, f64)> + Clone) -> Option<f64> {
    let e0 = samples.clone().next()?.1;
    let window = samples.clone().filter(|&(_, e)| e <= 1e-2 * e0 && e >= 1e-8 * e0);
    if window.clone().count() >= 10 {
        log_linear_slope(window)
    } else {
        log_linear_slope(samples.filter(|&(_, e)| e > 0.0))
    }
}

/// Least-squares slope of `ln e` against `t`.
pub fn log_linear_slope(samples: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let (mut n, mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (t, e) in samples {
        let l = libm::log(e);
        n += 1.0;
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }
    let denom = n * stt - st * st;
    if n < 2.0 || denom == 0.0 {
        return None;
    }
    Some((n * stl - st * sl) / denom)
}
