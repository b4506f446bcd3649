//! Scalar and vector fields in the cosine/sine tensor basis.
//!
//! Basis functions are L2-orthonormal on the box, so a coefficient is the
//! inner product of the field with its basis function and every norm is a
//! plain (weighted) sum of squares.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{config, Result};
use crate::grid::{Axis, Basis, Grid, Parity};

/// Coefficients of a scalar field in the parity-tagged tensor basis.
///
/// Coefficients of non-admitted indices (sine zero modes) are always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    parity: Parity,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid, parity: Parity) -> SpectralField {
        SpectralField { grid, parity, coeffs: vec![0.0; grid.len()] }
    }

    /// Builds a field from raw coefficients, zeroing non-admitted indices.
    pub fn from_coeffs(grid: Grid, parity: Parity, mut coeffs: Vec<f64>) -> Result<SpectralField> {
        if coeffs.len() != grid.len() {
            return config(format!(
                "coefficient count {} does not match grid size {}",
                coeffs.len(),
                grid.len()
            ));
        }
        for (i, c) in coeffs.iter_mut().enumerate() {
            if !parity.admits(grid.unflat(i)) {
                *c = 0.0;
            }
        }
        Ok(SpectralField { grid, parity, coeffs })
    }

    /// Field with a single unit coefficient.
    pub fn mode(grid: Grid, parity: Parity, idx: [usize; 3]) -> SpectralField {
        let mut f = SpectralField::zeros(grid, parity);
        f.set(idx, 1.0);
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Mutable coefficient access. Callers must keep non-admitted entries at zero.
    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn get(&self, idx: [usize; 3]) -> f64 {
        self.coeffs[self.grid.flat(idx)]
    }

    /// Sets a coefficient; writes to non-admitted indices are ignored.
    pub fn set(&mut self, idx: [usize; 3], value: f64) {
        if self.parity.admits(idx) {
            let i = self.grid.flat(idx);
            self.coeffs[i] = value;
        }
    }

    pub fn is_compatible(&self, other: &SpectralField) -> bool {
        self.grid == other.grid && self.parity == other.parity
    }

    pub fn ensure_parity(&self, parity: Parity) -> Result<()> {
        if self.parity != parity {
            return config(format!("expected parity {parity}, got {}", self.parity));
        }
        Ok(())
    }

    /// L2 inner product.
    pub fn dot(&self, other: &SpectralField) -> f64 {
        debug_assert!(self.is_compatible(other));
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert!(self.is_compatible(x));
        for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += a * v;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut f = self.clone();
        f.scale(a);
        f
    }

    /// Multiplies coefficients entry-wise by a symbol of the same layout.
    pub fn apply_symbol(&mut self, symbol: &[f64]) {
        debug_assert_eq!(symbol.len(), self.coeffs.len());
        for (c, s) in self.coeffs.iter_mut().zip(symbol) {
            *c *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Samples of a field on the midpoint collocation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> PhysicalField {
        PhysicalField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<PhysicalField> {
        if values.len() != grid.len() {
            return config(format!("{} samples for a grid of {} nodes", values.len(), grid.len()));
        }
        Ok(PhysicalField { grid, values })
    }

    /// Samples `f(x, y, z)` on the collocation nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> PhysicalField {
        let [xs, ys, zs] = Axis::ALL.map(|a| grid.nodes(a));
        let mut values = Vec::with_capacity(grid.len());
        for x in &xs {
            for y in &ys {
                for z in &zs {
                    values.push(f(*x, *y, *z));
                }
            }
        }
        PhysicalField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Midpoint-rule integral of `self * other` over the box.
    pub fn quadrature_dot(&self, other: &PhysicalField) -> f64 {
        let w = self.grid.volume() / self.grid.len() as f64;
        w * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Velocity components, each carrying its fixed parity.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u: [SpectralField; 3],
}

impl VelocityField {
    pub fn zeros(grid: Grid) -> VelocityField {
        VelocityField { u: Axis::ALL.map(|a| SpectralField::zeros(grid, Parity::velocity(a))) }
    }

    /// Assembles a velocity from components, checking their parities.
    pub fn from_components(u: [SpectralField; 3]) -> Result<VelocityField> {
        for a in Axis::ALL {
            u[a.index()].ensure_parity(Parity::velocity(a))?;
            if u[a.index()].grid() != u[0].grid() {
                return config("velocity components on different grids");
            }
        }
        Ok(VelocityField { u })
    }

    pub fn grid(&self) -> &Grid {
        self.u[0].grid()
    }

    pub fn component(&self, axis: Axis) -> &SpectralField {
        &self.u[axis.index()]
    }

    pub fn dot(&self, other: &VelocityField) -> f64 {
        (0..3).map(|i| self.u[i].dot(&other.u[i])).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn h1_seminorm(&self) -> f64 {
        self.u.iter().map(|c| h1_seminorm(c).powi(2)).sum::<f64>().sqrt()
    }

    pub fn axpy(&mut self, a: f64, x: &VelocityField) {
        for i in 0..3 {
            self.u[i].axpy(a, &x.u[i]);
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.u.iter_mut().for_each(|c| c.scale(a));
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(SpectralField::is_finite)
    }
}

impl Sub<&VelocityField> for &VelocityField {
    type Output = VelocityField;
    fn sub(self, rhs: &VelocityField) -> VelocityField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

/// Spectral derivative along `axis`; the parity flips on that axis.
///
/// With orthonormal bases `d/dx cos_k = -(k pi / L) sin_k` and `d/dx sin_k = (k pi / L) cos_k`.
pub fn differentiate(c: &SpectralField, axis: Axis) -> SpectralField {
    let grid = *c.grid();
    let from = c.parity().along(axis);
    let sign = match from {
        Basis::Cos => -1.0,
        Basis::Sin => 1.0,
    };
    let mut out = SpectralField::zeros(grid, c.parity().differentiated(axis));
    for (i, v) in out.coeffs.iter_mut().enumerate() {
        let idx = grid.unflat(i);
        let k = idx[axis.index()];
        if k > 0 && out.parity.admits(idx) {
            *v = sign * grid.wavenumber(axis, k) * c.coeffs[i];
        }
    }
    out
}

/// `|k|^2` per index (the symbol of `-Laplacian`); entries of non-admitted indices are 0.
pub fn laplacian_symbol(grid: &Grid, parity: Parity) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let idx = grid.unflat(i);
            if parity.admits(idx) {
                grid.wavevector(idx).iter().map(|k| k * k).sum()
            } else {
                0.0
            }
        })
        .collect()
}

/// Smallest eigenvalue of `-Laplacian` over the admitted modes of `parity`.
pub fn lambda1(grid: &Grid, parity: Parity) -> f64 {
    let sym = laplacian_symbol(grid, parity);
    (0..grid.len())
        .filter(|&i| parity.admits(grid.unflat(i)))
        .map(|i| sym[i])
        .fold(f64::INFINITY, f64::min)
}

pub fn l2_norm(c: &SpectralField) -> f64 {
    c.dot(c).sqrt()
}

/// `||A^{1/2} c|| = ||grad c||`.
pub fn h1_seminorm(c: &SpectralField) -> f64 {
    let grid = c.grid();
    c.coeffs
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let k = grid.wavevector(grid.unflat(i));
            (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// `||A c|| = ||Laplacian c||`.
pub fn h2_seminorm(c: &SpectralField) -> f64 {
    let grid = c.grid();
    c.coeffs
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let k = grid.wavevector(grid.unflat(i));
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            k2 * k2 * v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Zeroes every mode with an axis index outside the 2/3 band.
pub fn dealias(c: &SpectralField) -> SpectralField {
    let mut out = c.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(c: &mut SpectralField) {
    let grid = c.grid;
    for (i, v) in c.coeffs.iter_mut().enumerate() {
        if !grid.in_dealias_band(grid.unflat(i)) {
            *v = 0.0;
        }
    }
}
