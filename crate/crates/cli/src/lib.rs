//! Experiment harness for the CPM detection workbench: Monte-Carlo BER
//! sweeps, detector-versus-oracle suites, complexity table dumps and
//! plot-data export. The `cpmsim` binary is a thin wrapper over this
//! library.

pub mod config;
pub mod curves;
pub mod suite;
pub mod sweep;
pub mod tables;

pub use config::{DetectorChoice, ExperimentConfig};
pub use curves::{emit_curves, parse_curves, CurvePoint};
pub use suite::{run_oracle_suite, OracleReport};
pub use sweep::{run_sweep, BerRecord};
