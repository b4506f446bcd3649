//! Pseudo-spectral solver for Benard convection in a porous box (Darcy's law)
//! and the temperature-only nudging data assimilation scheme built on it.

pub mod assimilation;
pub mod darcy;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod interpolant;
pub mod random;
pub mod snapshot;
pub mod transform;

pub use dynamics::{StepOutput, StepParams, Stepper, SystemState};
pub use error::{Error, Result};
pub use field::{PhysicalField, SpectralField, VelocityField};
pub use harness::{ErrorSeries, ExperimentConfig};
pub use grid::{Axis, Basis, Grid, Parity};
pub use interpolant::{Interpolant, InterpolantKind};
pub use transform::Transforms;
