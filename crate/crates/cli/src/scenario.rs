//! Scenario files.
//!
//! A scenario is a flat TOML table. Units are SI, angles in radians.
//!
//! | key                   | type                   | default          |
//! |-----------------------|------------------------|------------------|
//! | `waypoints`           | array of `[x, y, psi]` | required         |
//! | `speed`               | m/s                    | required         |
//! | `kappa_max`           | 1/m                    | required         |
//! | `sigma_max`           | 1/(m·s)                | required         |
//! | `dt`                  | s                      | required         |
//! | `epsilon`             | m                      | `1.0`            |
//! | `kp`, `kd`            | decoupled PD gains     | `1.0`, `2.0`     |
//! | `gain_matrix`         | `[[f64; 4]; 2]`        | built from kp/kd |
//! | `vehicle`             | `"unicycle"`/`"bicycle"` | `"unicycle"`   |
//! | `wheelbase`           | m, bicycle only        | `2.5`            |
//! | `mode`                | `"eps"`/`"plain"`      | `"eps"`          |
//! | `duration`            | s                      | trajectory length |
//! | `offset_lateral`      | m, to the left         | `0.0`            |
//! | `offset_longitudinal` | m, ahead               | `0.0`            |
//! | `offset_heading`      | rad                    | `0.0`            |
//! | `output_dir`          | path                   | `output`         |
//!
//! `gain_matrix` and `kp`/`kd` are mutually exclusive. `defaults_applied`
//! lists fields that were filled in by default; it is written by the
//! scenario echo so a rerun reports the same defaults.

use std::fs;
use std::path::{Path, PathBuf};

use epstrack_core::ccplanner::{PlannerError, PlannerParams, Waypoint};
use epstrack_core::epsilon_control::{EpsilonParams, GainMatrix};
use epstrack_core::simulator::TrackingMode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_EPSILON: f64 = 1.0;
pub const DEFAULT_KP: f64 = 1.0;
pub const DEFAULT_KD: f64 = 2.0;
pub const DEFAULT_WHEELBASE: f64 = 2.5;
pub const DEFAULT_OUTPUT_DIR: &str = "output";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleKind {
    Unicycle,
    Bicycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Plain,
    Eps,
}

impl From<ModeName> for TrackingMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Plain => TrackingMode::PlainEpsilon,
            ModeName::Eps => TrackingMode::EpsilonTrajectory,
        }
    }
}

impl ModeName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeName::Plain => "plain",
            ModeName::Eps => "eps",
        }
    }
}

/// The file as written, before defaults and validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub waypoints: Option<Vec<[f64; 3]>>,
    pub speed: Option<f64>,
    pub kappa_max: Option<f64>,
    pub sigma_max: Option<f64>,
    pub dt: Option<f64>,
    pub epsilon: Option<f64>,
    pub kp: Option<f64>,
    pub kd: Option<f64>,
    pub gain_matrix: Option<[[f64; 4]; 2]>,
    pub vehicle: Option<VehicleKind>,
    pub wheelbase: Option<f64>,
    pub mode: Option<ModeName>,
    pub duration: Option<f64>,
    pub offset_lateral: Option<f64>,
    pub offset_longitudinal: Option<f64>,
    pub offset_heading: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub defaults_applied: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gains {
    Pd { kp: f64, kd: f64 },
    Matrix([[f64; 4]; 2]),
}

impl Gains {
    pub fn matrix(&self) -> [[f64; 4]; 2] {
        match *self {
            Gains::Pd { kp, kd } => [[kp, 0.0, kd, 0.0], [0.0, kp, 0.0, kd]],
            Gains::Matrix(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Vehicle {
    Unicycle,
    Bicycle { wheelbase: f64 },
}

/// Initial pose relative to the reference at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Offset {
    pub lateral: f64,
    pub longitudinal: f64,
    pub heading: f64,
}

/// A validated scenario with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub waypoints: Vec<Waypoint>,
    pub planner: PlannerParams,
    pub epsilon: f64,
    pub gains: Gains,
    pub vehicle: Vehicle,
    pub mode: ModeName,
    /// `None` runs for the whole planned trajectory.
    pub duration: Option<f64>,
    pub offset: Offset,
    pub output_dir: PathBuf,
    pub defaults_applied: Vec<String>,
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_owned(), source })?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text)?;
    Scenario::from_raw(raw)
}

fn required(value: Option<f64>, field: &str) -> Result<f64, ScenarioError> {
    value.ok_or_else(|| invalid(field, "missing"))
}

fn finite(value: f64, field: &str) -> Result<f64, ScenarioError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(field, format!("{value} is not finite")))
    }
}

fn positive(value: f64, field: &str) -> Result<f64, ScenarioError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(field, format!("{value} is not a positive finite number")))
    }
}

impl Scenario {
    pub fn from_raw(raw: RawScenario) -> Result<Self, ScenarioError> {
        let mut defaults = raw.defaults_applied.clone();
        let mut default = |field: &str| {
            if !defaults.iter().any(|d| d == field) {
                defaults.push(field.to_owned());
            }
        };

        let points = raw.waypoints.ok_or_else(|| invalid("waypoints", "missing"))?;
        if points.len() < 2 {
            return Err(invalid("waypoints", format!("need at least two, got {}", points.len())));
        }
        let mut waypoints = Vec::with_capacity(points.len());
        for (i, [x, y, psi]) in points.into_iter().enumerate() {
            if !(x.is_finite() && y.is_finite() && psi.is_finite()) {
                return Err(invalid(format!("waypoints[{i}]"), format!("[{x}, {y}, {psi}] is not finite")));
            }
            waypoints.push(Waypoint::new(x, y, psi));
        }

        let speed = required(raw.speed, "speed")?;
        let kappa_max = required(raw.kappa_max, "kappa_max")?;
        let sigma_max = required(raw.sigma_max, "sigma_max")?;
        let dt = required(raw.dt, "dt")?;
        let planner = PlannerParams::new(speed, kappa_max, sigma_max, dt).map_err(|e| match e {
            PlannerError::InvalidParam { name, value } => {
                let field = if name == "v" { "speed" } else { name };
                invalid(field, format!("{value} is not a positive finite number"))
            }
            other => invalid("planner", other.to_string()),
        })?;

        let epsilon = raw.epsilon.unwrap_or_else(|| {
            default("epsilon");
            DEFAULT_EPSILON
        });
        EpsilonParams::new(epsilon).map_err(|e| invalid("epsilon", e.to_string()))?;

        let gains = match (raw.gain_matrix, raw.kp, raw.kd) {
            (Some(_), Some(_), _) => return Err(invalid("gain_matrix", "cannot be combined with kp")),
            (Some(_), _, Some(_)) => return Err(invalid("gain_matrix", "cannot be combined with kd")),
            (Some(k), None, None) => Gains::Matrix(k),
            (None, kp, kd) => Gains::Pd {
                kp: kp.unwrap_or_else(|| {
                    default("kp");
                    DEFAULT_KP
                }),
                kd: kd.unwrap_or_else(|| {
                    default("kd");
                    DEFAULT_KD
                }),
            },
        };
        let gain_field = if matches!(gains, Gains::Matrix(_)) { "gain_matrix" } else { "kp/kd" };
        GainMatrix::new(gains.matrix()).map_err(|e| invalid(gain_field, e.to_string()))?;

        let vehicle = match raw.vehicle.unwrap_or_else(|| {
            default("vehicle");
            VehicleKind::Unicycle
        }) {
            VehicleKind::Unicycle => {
                if raw.wheelbase.is_some() {
                    return Err(invalid("wheelbase", "only applies to vehicle = \"bicycle\""));
                }
                Vehicle::Unicycle
            }
            VehicleKind::Bicycle => {
                let wheelbase = raw.wheelbase.unwrap_or_else(|| {
                    default("wheelbase");
                    DEFAULT_WHEELBASE
                });
                Vehicle::Bicycle { wheelbase: positive(wheelbase, "wheelbase")? }
            }
        };

        let mode = raw.mode.unwrap_or_else(|| {
            default("mode");
            ModeName::Eps
        });
        let duration = raw.duration.map(|d| positive(d, "duration")).transpose()?;
        if duration.is_none() {
            default("duration");
        }

        let mut offset = |value: Option<f64>, field: &str| -> Result<f64, ScenarioError> {
            match value {
                Some(v) => finite(v, field),
                None => {
                    default(field);
                    Ok(0.0)
                }
            }
        };
        let offset = Offset {
            lateral: offset(raw.offset_lateral, "offset_lateral")?,
            longitudinal: offset(raw.offset_longitudinal, "offset_longitudinal")?,
            heading: offset(raw.offset_heading, "offset_heading")?,
        };

        Ok(Self {
            waypoints,
            planner,
            epsilon,
            gains,
            vehicle,
            mode,
            duration,
            offset,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            defaults_applied: defaults,
        })
    }

    /// Applies a mode given on the command line.
    pub fn override_mode(&mut self, mode: ModeName) {
        self.mode = mode;
        self.defaults_applied.retain(|d| d != "mode");
    }

    /// Fully explicit form of the scenario, without `output_dir`.
    ///
    /// `duration` is the simulated duration actually used.
    pub fn echo(&self, duration: f64) -> RawScenario {
        let (kp, kd, gain_matrix) = match self.gains {
            Gains::Pd { kp, kd } => (Some(kp), Some(kd), None),
            Gains::Matrix(k) => (None, None, Some(k)),
        };
        let (vehicle, wheelbase) = match self.vehicle {
            Vehicle::Unicycle => (VehicleKind::Unicycle, None),
            Vehicle::Bicycle { wheelbase } => (VehicleKind::Bicycle, Some(wheelbase)),
        };
        RawScenario {
            waypoints: Some(self.waypoints.iter().map(|w| [w.x, w.y, w.psi]).collect()),
            speed: Some(self.planner.v),
            kappa_max: Some(self.planner.kappa_max),
            sigma_max: Some(self.planner.sigma_max),
            dt: Some(self.planner.dt),
            epsilon: Some(self.epsilon),
            kp,
            kd,
            gain_matrix,
            vehicle: Some(vehicle),
            wheelbase,
            mode: Some(self.mode),
            duration: Some(duration),
            offset_lateral: Some(self.offset.lateral),
            offset_longitudinal: Some(self.offset.longitudinal),
            offset_heading: Some(self.offset.heading),
            output_dir: None,
            defaults_applied: self.defaults_applied.clone(),
        }
    }
}
