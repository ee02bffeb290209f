//! Experiment orchestration around the `l1ilc-core` numerics: TOML
//! scenarios, repetitions run in parallel, learning-state transfer files
//! and comparison reports.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dump;
pub mod error;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod transfer;

pub use error::{HarnessError, Result};
pub use report::{compare_report, Report, ReportEntry, TransferEntry};
pub use runner::{run_scenario, run_scenario_from, ScenarioResult};
pub use scenario::{ControllerConfig, InitConfig, PlantSource, ScenarioConfig};
pub use transfer::{export_learning, import_learning, TransferFile};
