//! Box geometry, collocation nodes and per-axis basis parities.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{config, Result};

/// One of the three coordinate directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Basis family along one axis: `cos(k pi x / L)` for `k >= 0` or `sin(k pi x / L)` for `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Cos,
    Sin,
}

impl Basis {
    pub fn flip(self) -> Basis {
        match self {
            Basis::Cos => Basis::Sin,
            Basis::Sin => Basis::Cos,
        }
    }

    /// Whether mode index `k` exists in this family.
    pub fn admits(self, k: usize) -> bool {
        !(self == Basis::Sin && k == 0)
    }

    fn tag(self) -> &'static str {
        match self {
            Basis::Cos => "COS",
            Basis::Sin => "SIN",
        }
    }
}

/// Per-axis basis tags of a scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Parity(pub [Basis; 3]);

impl Parity {
    /// Temperature-like fields: insulated side walls, Dirichlet top and bottom.
    pub const TEMPERATURE: Parity = Parity([Basis::Cos, Basis::Cos, Basis::Sin]);
    /// Pressure-like fields.
    pub const PRESSURE: Parity = Parity([Basis::Cos, Basis::Cos, Basis::Cos]);
    pub const VELOCITY_X: Parity = Parity([Basis::Sin, Basis::Cos, Basis::Cos]);
    pub const VELOCITY_Y: Parity = Parity([Basis::Cos, Basis::Sin, Basis::Cos]);
    pub const VELOCITY_Z: Parity = Parity([Basis::Cos, Basis::Cos, Basis::Sin]);

    pub fn velocity(component: Axis) -> Parity {
        match component {
            Axis::X => Self::VELOCITY_X,
            Axis::Y => Self::VELOCITY_Y,
            Axis::Z => Self::VELOCITY_Z,
        }
    }

    pub fn along(self, axis: Axis) -> Basis {
        self.0[axis.index()]
    }

    /// Parity of the derivative along `axis`.
    pub fn differentiated(self, axis: Axis) -> Parity {
        let mut p = self.0;
        p[axis.index()] = p[axis.index()].flip();
        Parity(p)
    }

    /// Whether the index triple is part of the basis.
    pub fn admits(self, idx: [usize; 3]) -> bool {
        (0..3).all(|a| self.0[a].admits(idx[a]))
    }

    pub fn parse(s: &str) -> Option<Parity> {
        let mut tags = s.split(',').map(|t| match t.trim() {
            "COS" => Some(Basis::Cos),
            "SIN" => Some(Basis::Sin),
            _ => None,
        });
        let p = [tags.next()??, tags.next()??, tags.next()??];
        if tags.next().is_some() {
            return None;
        }
        Some(Parity(p))
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0[0].tag(), self.0[1].tag(), self.0[2].tag())
    }
}

/// The box `[0, lx] x [0, ly] x [0, 1]` with `n` modes (and `n` midpoint nodes) per axis.
///
/// An axis with a single mode is a collapsed (invariant) direction; that is how
/// the two-dimensional `(x, z)` slice is represented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lengths: [f64; 3],
    pub n: [usize; 3],
}

impl Grid {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize, nz: usize) -> Result<Grid> {
        if !(lx > 0.0 && lx.is_finite()) || !(ly > 0.0 && ly.is_finite()) {
            return config(format!("domain lengths must be positive, got Lx={lx}, Ly={ly}"));
        }
        if nx < 4 || nz < 4 {
            return config(format!("Nx and Nz must be >= 4, got Nx={nx}, Nz={nz}"));
        }
        if ny != 1 && ny < 4 {
            return config(format!("Ny must be 1 (slice) or >= 4, got {ny}"));
        }
        Ok(Grid { lengths: [lx, ly, 1.0], n: [nx, ny, nz] })
    }

    /// The y-invariant `(x, z)` slice.
    pub fn slice(lx: f64, nx: usize, nz: usize) -> Result<Grid> {
        Grid::new(lx, 1.0, nx, 1, nz)
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_slice(&self) -> bool {
        self.n[1] == 1
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Row-major flat index, x slowest.
    #[inline]
    pub fn flat(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.n[1] + idx[1]) * self.n[2] + idx[2]
    }

    #[inline]
    pub fn unflat(&self, i: usize) -> [usize; 3] {
        let iz = i % self.n[2];
        let r = i / self.n[2];
        [r / self.n[1], r % self.n[1], iz]
    }

    /// Memory stride of `axis` in the flat layout.
    pub fn stride(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.n[1] * self.n[2],
            Axis::Y => self.n[2],
            Axis::Z => 1,
        }
    }

    /// Wavenumber `k pi / L` of mode index `k` along `axis`.
    #[inline]
    pub fn wavenumber(&self, axis: Axis, k: usize) -> f64 {
        k as f64 * PI / self.lengths[axis.index()]
    }

    pub fn wavevector(&self, idx: [usize; 3]) -> [f64; 3] {
        [
            self.wavenumber(Axis::X, idx[0]),
            self.wavenumber(Axis::Y, idx[1]),
            self.wavenumber(Axis::Z, idx[2]),
        ]
    }

    /// Node spacing `L / N`.
    pub fn spacing(&self, axis: Axis) -> f64 {
        self.lengths[axis.index()] / self.n[axis.index()] as f64
    }

    /// Midpoint collocation nodes `(j + 1/2) L / N` along `axis`.
    pub fn nodes(&self, axis: Axis) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.n[axis.index()]).map(|j| (j as f64 + 0.5) * h).collect()
    }

    /// Largest retained index per axis under the 2/3 rule (`3k < 2N`).
    pub fn dealias_cutoff(&self, axis: Axis) -> usize {
        let n = self.n[axis.index()];
        (2 * n - 1) / 3
    }

    #[inline]
    pub fn in_dealias_band(&self, idx: [usize; 3]) -> bool {
        (0..3).all(|a| 3 * idx[a] < 2 * self.n[a])
    }

    pub fn indices(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        (0..self.len()).map(move |i| self.unflat(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_index_round_trip() {
        let g = Grid::new(2.0, 1.5, 6, 4, 5).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.flat(g.unflat(i)), i);
        }
        assert_eq!(g.flat([1, 0, 0]), g.stride(Axis::X));
        assert_eq!(g.flat([0, 1, 0]), g.stride(Axis::Y));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0.0, 1.0, 8, 1, 8).is_err());
        assert!(Grid::new(1.0, 1.0, 3, 1, 8).is_err());
        assert!(Grid::new(1.0, 1.0, 8, 2, 8).is_err());
        assert!(Grid::slice(2.0, 8, 8).is_ok());
    }

    #[test]
    fn dealias_cutoff_matches_two_thirds_rule() {
        let g = Grid::new(1.0, 1.0, 96, 1, 49).unwrap();
        assert_eq!(g.dealias_cutoff(Axis::X), 63);
        assert_eq!(g.dealias_cutoff(Axis::Y), 0);
        assert_eq!(g.dealias_cutoff(Axis::Z), 32);
    }

    #[test]
    fn parity_text_round_trip() {
        for p in [Parity::TEMPERATURE, Parity::PRESSURE, Parity::VELOCITY_X, Parity::VELOCITY_Y] {
            assert_eq!(Parity::parse(&p.to_string()), Some(p));
        }
        assert_eq!(Parity::parse("COS,SIN"), None);
    }
}
