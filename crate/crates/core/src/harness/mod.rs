//! Configuration, twin experiments, sweeps, rate fits and output.

pub mod config;
pub mod series;
pub mod sweep;
pub mod twin;
pub mod verify;

pub use config::{load_config, parse_config, write_config, AssimInit, ExperimentConfig, InitialProfile, VelocityInit};
pub use series::{fit_exponential_rate, write_series, ErrorRow, ErrorSeries, RunMetadata, Window};
pub use sweep::{sweep, SweepAxis, SweepRow};
pub use twin::{run_shared, run_twin_experiment};
