//! Monte Carlo harness for source-count estimation: configuration, the
//! parallel sweep engine and plot-ready curve extraction.

pub mod config;
pub mod curves;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig, MethodKind};
pub use curves::{emit_curves, Curve, Quantity};
pub use sweep::{run_sweep, RunRecord, SummaryRow, SweepResult};
