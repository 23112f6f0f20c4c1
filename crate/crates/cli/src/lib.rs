//! Scenario files and CSV output for `epstrack-core`.
//!
//! [`scenario`] reads and validates a TOML scenario, [`run`] plans the
//! trajectory, simulates the tracking loop and writes the results.

pub mod run;
pub mod scenario;

pub use run::{run, RunError, RunSummary};
pub use scenario::{parse_scenario, Scenario};
