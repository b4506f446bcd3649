//! Seeded random band-limited fields for estimators and property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::darcy::leray_project;
use crate::field::{SpectralField, VelocityField};
use crate::grid::{Axis, Grid, Parity};

/// Gaussian coefficients inside the dealias band, weighted by `(1 + |k|^2 / k0^2)^(-decay / 2)`.
pub fn random_field<R: Rng + ?Sized>(grid: Grid, parity: Parity, rng: &mut R, decay: f64) -> SpectralField {
    let k0 = std::f64::consts::PI;
    let mut coeffs = vec![0.0; grid.len()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let idx = grid.unflat(i);
        if !parity.admits(idx) || !grid.in_dealias_band(idx) {
            continue;
        }
        let k = grid.wavevector(idx);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / (k0 * k0);
        let z: f64 = rng.sample(StandardNormal);
        *c = z * (1.0 + k2).powf(-0.5 * decay);
    }
    SpectralField::from_coeffs(grid, parity, coeffs).expect("sized to grid")
}

/// Random temperature-parity field with a random spectral slope in `[0, 3]`.
pub fn random_temperature<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> SpectralField {
    let decay = rng.random_range(0.0..3.0);
    random_field(grid, Parity::TEMPERATURE, rng, decay)
}

/// Random divergence-free, wall-tangent velocity inside the dealias band.
pub fn random_velocity<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> VelocityField {
    let decay = rng.random_range(0.0..3.0);
    let raw = VelocityField { u: Axis::ALL.map(|a| random_field(grid, Parity::velocity(a), rng, decay)) };
    leray_project(&raw)
}
