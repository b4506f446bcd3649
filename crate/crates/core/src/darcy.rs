//! Velocity recovery from temperature through Darcy's law.
//!
//! In the parity-tagged basis the gradient of a pressure mode at index `k`
//! has coefficients `-(kx, ky, kz) p` in the three velocity bases and the
//! divergence of a velocity is `kx u1 + ky u2 + kz u3`, so the Leray
//! projection is the per-mode orthogonal projection `f - k (k . f) / |k|^2`.

use crate::error::{config, Result};
use crate::field::{SpectralField, VelocityField};
use crate::grid::{Axis, Parity};

/// Pressure (zero mean) that makes `f - grad p` divergence free.
pub fn pressure_for(f: &VelocityField) -> SpectralField {
    let grid = *f.grid();
    let mut p = SpectralField::zeros(grid, Parity::PRESSURE);
    for (i, v) in p.coeffs_mut().iter_mut().enumerate() {
        let idx = grid.unflat(i);
        let k = grid.wavevector(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let div = k[0] * f.u[0].coeffs()[i] + k[1] * f.u[1].coeffs()[i] + k[2] * f.u[2].coeffs()[i];
        *v = -div / k2;
    }
    p
}

/// Gradient of a pressure-parity field as a velocity-parity triple.
pub fn gradient(p: &SpectralField) -> Result<VelocityField> {
    p.ensure_parity(Parity::PRESSURE)?;
    Ok(VelocityField { u: Axis::ALL.map(|a| crate::field::differentiate(p, a)) })
}

/// Orthogonal projection onto divergence-free fields tangent to the walls.
pub fn leray_project(f: &VelocityField) -> VelocityField {
    let grid = *f.grid();
    let mut out = f.clone();
    for i in 0..grid.len() {
        let k = grid.wavevector(grid.unflat(i));
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let div = k[0] * f.u[0].coeffs()[i] + k[1] * f.u[1].coeffs()[i] + k[2] * f.u[2].coeffs()[i];
        let s = div / k2;
        for (a, comp) in out.u.iter_mut().enumerate() {
            // Components with a zero wavenumber on a sine axis stay zero because k[a] = 0 there.
            comp.coeffs_mut()[i] -= k[a] * s;
        }
    }
    out
}

/// Darcy velocity for `gamma = 0`: `u = Ra P(theta k_hat)`.
pub fn leray_project_buoyancy(theta: &SpectralField, ra: f64) -> Result<VelocityField> {
    theta.ensure_parity(Parity::TEMPERATURE)?;
    let grid = *theta.grid();
    let mut u = VelocityField::zeros(grid);
    let th = theta.coeffs();
    for i in 0..grid.len() {
        let t = th[i];
        if t == 0.0 {
            continue;
        }
        let k = grid.wavevector(grid.unflat(i));
        let horiz = k[0] * k[0] + k[1] * k[1];
        let k2 = horiz + k[2] * k[2];
        let s = ra * t / k2;
        u.u[0].coeffs_mut()[i] = -k[0] * k[2] * s;
        u.u[1].coeffs_mut()[i] = -k[1] * k[2] * s;
        u.u[2].coeffs_mut()[i] = horiz * s;
    }
    Ok(u)
}

/// `div u` in pressure parity.
pub fn divergence(u: &VelocityField) -> SpectralField {
    let grid = *u.grid();
    let mut d = SpectralField::zeros(grid, Parity::PRESSURE);
    for (i, v) in d.coeffs_mut().iter_mut().enumerate() {
        let k = grid.wavevector(grid.unflat(i));
        *v = k[0] * u.u[0].coeffs()[i] + k[1] * u.u[1].coeffs()[i] + k[2] * u.u[2].coeffs()[i];
    }
    d
}

/// Exact solution of `gamma du/dt + u = Ra P(theta k_hat)` over `dt` with `theta` frozen.
pub fn step_velocity_gamma(
    u: &VelocityField,
    theta: &SpectralField,
    ra: f64,
    gamma: f64,
    dt: f64,
) -> Result<VelocityField> {
    if !(gamma > 0.0) {
        return config(format!("gamma = {gamma}: the relaxation update needs gamma > 0"));
    }
    if !(dt > 0.0) {
        return config(format!("dt = {dt} must be positive"));
    }
    let decay = (-dt / gamma).exp();
    let target = leray_project_buoyancy(theta, ra)?;
    let mut out = u.clone();
    out.scale(decay);
    out.axpy(-(-dt / gamma).exp_m1(), &target);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::l2_norm;
    use crate::grid::Grid;

    #[test]
    fn vertical_profile_produces_no_flow() {
        let g = Grid::new(1.0, 1.0, 6, 4, 6).unwrap();
        let theta = SpectralField::mode(g, Parity::TEMPERATURE, [0, 0, 1]);
        let u = leray_project_buoyancy(&theta, 37.0).unwrap();
        assert_eq!(u.l2_norm(), 0.0);
    }

    #[test]
    fn rejects_wrong_parity() {
        let g = Grid::new(1.0, 1.0, 6, 1, 6).unwrap();
        let p = SpectralField::zeros(g, Parity::PRESSURE);
        assert!(leray_project_buoyancy(&p, 1.0).is_err());
        assert!(step_velocity_gamma(&VelocityField::zeros(g), &p, 1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn frozen_temperature_equilibrium_is_fixed() {
        let g = Grid::new(2.0, 1.0, 8, 1, 8).unwrap();
        let mut theta = SpectralField::zeros(g, Parity::TEMPERATURE);
        theta.set([1, 0, 1], 0.4);
        theta.set([2, 0, 3], -0.1);
        let eq = leray_project_buoyancy(&theta, 20.0).unwrap();
        let next = step_velocity_gamma(&eq, &theta, 20.0, 0.7, 0.05).unwrap();
        assert!((&next - &eq).l2_norm() < 1e-13 * eq.l2_norm());
    }

    #[test]
    fn pure_decay_without_buoyancy() {
        let g = Grid::new(1.0, 1.0, 6, 1, 6).unwrap();
        let mut theta = SpectralField::zeros(g, Parity::TEMPERATURE);
        theta.set([1, 0, 1], 1.0);
        let u = leray_project_buoyancy(&theta, 3.0).unwrap();
        let zero = SpectralField::zeros(g, Parity::TEMPERATURE);
        let next = step_velocity_gamma(&u, &zero, 3.0, 0.5, 0.1).unwrap();
        let expected = (-0.2f64).exp() * u.l2_norm();
        assert!((next.l2_norm() - expected).abs() < 1e-14);
        assert!(l2_norm(&divergence(&next)) < 1e-14);
    }
}
