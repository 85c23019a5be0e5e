//! Discrete-event simulation of an online game sharing an ADSL uplink with
//! a bulk TCP upload.
//!
//! The crate is layered bottom-up: [`kernel`] orders events in integer
//! nanoseconds, [`net`] models links and drop-tail queues on a dumbbell,
//! [`tcp`] implements the endpoints, [`traffic`] generates application
//! load, and [`sim`] wires them into a run whose traces [`metrics`]
//! summarizes. [`scenario`] parses the experiment description and
//! [`bundle`] writes result directories.

pub mod bundle;
pub mod kernel;
pub mod metrics;
pub mod net;
pub mod scenario;
pub mod sim;
pub mod tcp;
pub mod traffic;

pub use scenario::{ConfigError, FlowSpec, Overrides, Role, ScenarioConfig};
pub use sim::{run_scenario, RunOutput, RunSummary, SimError};
