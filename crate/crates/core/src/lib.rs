//! Quantum sensor fusion workbench.
//!
//! Phase-noise sensor model, fault-tolerant interval fusion, unified MSE
//! lower bounds over the SQL/Heisenberg range, network-layer helpers, a
//! seeded Monte Carlo harness and the dataset pipelines built on them.

pub mod bounds;
pub mod datasets;
pub mod error;
pub mod fusion;
pub mod montecarlo;
pub mod netmodel;
pub mod sensor;
pub mod stats;

pub use bounds::{unified_bound, BoundQuery, BoundValue, Strategy};
pub use error::{Error, Result};
pub use fusion::{FusionResult, Interval};
pub use montecarlo::{ExperimentConfig, Method, TrialStats};
pub use sensor::{SensorParams, SensorReading};
