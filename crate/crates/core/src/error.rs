use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver, the assimilation layer and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent grids, parities, interpolants or parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A time step was rejected because the advective CFL number was too large.
    #[error("CFL violation at t = {t}: number {cfl:.4} exceeds limit {limit}")]
    Cfl { t: f64, cfl: f64, limit: f64 },

    /// Explicitly treated nudging with `mu * dt` beyond the stability guard.
    #[error("explicit nudging unstable: mu * dt = {product} > 1")]
    NudgeStability { product: f64 },

    /// A config file line that could not be accepted.
    #[error("{path}:{line}: {key}: {message}")]
    Parse {
        path: String,
        line: usize,
        key: String,
        message: String,
    },

    /// Malformed field snapshot.
    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    /// A window handed to the rate fit that cannot be fitted.
    #[error("rate fit rejected: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
