//! Deterministic discrete-event simulator for mobile ad hoc networks, with
//! AODV and DSR routing, CBR and reliable (Tahoe-style) traffic, an ns-2
//! style trace format and the analysis that turns traces into delivery,
//! loss and delay bands.

pub mod analysis;
pub mod config;
pub mod error;
pub mod medium;
pub mod mobility;
pub mod network;
pub mod packet;
pub mod routing;
pub mod runner;
pub mod sim;
pub mod trace;
pub mod traffic;

pub use analysis::{compute_metrics, compute_metrics_script_compat, AnalysisError, MetricsReport};
pub use config::{load_config, write_config, ScenarioConfig};
pub use error::{ConfigError, RunError, SimError};
pub use routing::Protocol;
pub use runner::{run_scenario, run_sweep, simulate, RunOutput, SweepGrid, SweepSummary};
pub use sim::SimTime;
pub use trace::TraceRecord;
pub use traffic::TrafficKind;
