//! Coarse temperature observables `I_h`.
//!
//! All kinds act on temperature-parity fields and return temperature-parity
//! fields inside the dealias band. `FOURIER_LOWPASS` is a mask on `|k|`.
//! `VOLUME_AVERAGE` and `NODAL` are tensor products of per-axis coefficient
//! matrices: box means (orthogonal projection onto the band-limited box
//! indicators) and point samples extended piecewise-constant, respectively.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{config, Error, Result};
use crate::field::{h1_seminorm, h2_seminorm, l2_norm, laplacian_symbol, SpectralField};
use crate::grid::{Axis, Basis, Grid, Parity};
use crate::random::random_field;
use crate::transform::basis_values;

/// Minimum trial count accepted by the constant estimators.
pub const MIN_TRIALS: usize = 100;

/// Power-iteration refinements applied to every `c0` trial.
const POWER_STEPS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterpolantKind {
    FourierLowpass,
    VolumeAverage,
    Nodal,
}

impl InterpolantKind {
    pub const ALL: [InterpolantKind; 3] =
        [InterpolantKind::FourierLowpass, InterpolantKind::VolumeAverage, InterpolantKind::Nodal];

    pub fn name(self) -> &'static str {
        match self {
            InterpolantKind::FourierLowpass => "fourier_lowpass",
            InterpolantKind::VolumeAverage => "volume_average",
            InterpolantKind::Nodal => "nodal",
        }
    }
}

impl fmt::Display for InterpolantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterpolantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<InterpolantKind> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        InterpolantKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown interpolant kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Operator {
    /// Keep flag per coefficient.
    Mask(Vec<bool>),
    /// Row-major `n x n` matrix per axis; `None` acts as the identity.
    Separable([Option<Vec<f64>>; 3]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    kind: InterpolantKind,
    h: f64,
    grid: Grid,
    op: Operator,
}

impl Interpolant {
    pub fn new(kind: InterpolantKind, grid: Grid, h: f64) -> Result<Interpolant> {
        if !(h > 0.0 && h.is_finite()) {
            return config(format!("observation length h = {h} must be positive"));
        }
        let op = match kind {
            InterpolantKind::FourierLowpass => Operator::Mask(lowpass_mask(&grid, h)),
            InterpolantKind::VolumeAverage | InterpolantKind::Nodal => {
                let mut mats: [Option<Vec<f64>>; 3] = [None, None, None];
                for axis in Axis::ALL {
                    let n = grid.n[axis.index()];
                    if n == 1 {
                        continue;
                    }
                    let dx = grid.spacing(axis);
                    if h < dx * (1.0 - 1e-12) {
                        return config(format!(
                            "h = {h} is finer than the grid spacing {dx} along {axis:?}; the resolution is unobservable"
                        ));
                    }
                    let basis = Parity::TEMPERATURE.along(axis);
                    let len = grid.lengths[axis.index()];
                    mats[axis.index()] = Some(match kind {
                        InterpolantKind::VolumeAverage => box_projection(basis, n, len, h),
                        _ => nodal_matrix(basis, n, len, h),
                    });
                }
                Operator::Separable(mats)
            }
        };
        Ok(Interpolant { kind, h, grid, op })
    }

    pub fn fourier_lowpass(grid: Grid, h: f64) -> Result<Interpolant> {
        Interpolant::new(InterpolantKind::FourierLowpass, grid, h)
    }

    pub fn volume_average(grid: Grid, h: f64) -> Result<Interpolant> {
        Interpolant::new(InterpolantKind::VolumeAverage, grid, h)
    }

    pub fn nodal(grid: Grid, h: f64) -> Result<Interpolant> {
        Interpolant::new(InterpolantKind::Nodal, grid, h)
    }

    pub fn kind(&self) -> InterpolantKind {
        self.kind
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Whether `I_h` is an L2-orthogonal projection (idempotent and self-adjoint).
    pub fn is_orthogonal_projection(&self) -> bool {
        self.kind != InterpolantKind::Nodal
    }

    /// Number of kept coefficients for the lowpass mask; `None` for matrix kinds.
    pub fn observed_modes(&self) -> Option<usize> {
        match &self.op {
            Operator::Mask(m) => Some(m.iter().filter(|&&k| k).count()),
            Operator::Separable(_) => None,
        }
    }

    pub fn apply(&self, theta: &SpectralField) -> Result<SpectralField> {
        self.check_input(theta)?;
        Ok(self.apply_unchecked(theta, false))
    }

    /// Adjoint of [`Interpolant::apply`] in the L2 inner product.
    pub fn apply_transpose(&self, theta: &SpectralField) -> Result<SpectralField> {
        self.check_input(theta)?;
        Ok(self.apply_unchecked(theta, true))
    }

    fn check_input(&self, theta: &SpectralField) -> Result<()> {
        theta.ensure_parity(Parity::TEMPERATURE)?;
        if theta.grid() != &self.grid {
            return config("field grid does not match the interpolant grid");
        }
        Ok(())
    }

    fn apply_unchecked(&self, theta: &SpectralField, transpose: bool) -> SpectralField {
        let mut out = theta.clone();
        match &self.op {
            Operator::Mask(mask) => {
                for (c, &keep) in out.coeffs_mut().iter_mut().zip(mask) {
                    if !keep {
                        *c = 0.0;
                    }
                }
            }
            Operator::Separable(mats) => {
                for axis in Axis::ALL {
                    if let Some(m) = &mats[axis.index()] {
                        apply_along(&self.grid, axis, m, out.coeffs_mut(), transpose);
                    }
                }
            }
        }
        out
    }

    /// Ratio `||phi - I_h phi|| / (h ||A^(1/2) phi||)`; zero when the denominator vanishes.
    pub fn approximation_ratio(&self, phi: &SpectralField) -> Result<f64> {
        let resid = phi - &self.apply(phi)?;
        let denom = self.h * h1_seminorm(phi);
        Ok(if denom > 0.0 { l2_norm(&resid) / denom } else { 0.0 })
    }

    /// Ratio `||phi - I_h phi|| / (h ||A^(1/2) phi|| + h^2 ||A phi||)` used with `c1 = c2`.
    pub fn nodal_ratio(&self, phi: &SpectralField) -> Result<f64> {
        let resid = phi - &self.apply(phi)?;
        let denom = self.h * h1_seminorm(phi) + self.h * self.h * h2_seminorm(phi);
        Ok(if denom > 0.0 { l2_norm(&resid) / denom } else { 0.0 })
    }

    /// Estimate of the sharp constant in `||phi - I_h phi|| <= c0 h ||A^(1/2) phi||`.
    ///
    /// Each trial starts from a random band-limited field and is refined by
    /// power iteration on `A^(-1/2) (I - I_h)^T (I - I_h) A^(-1/2)`, so the
    /// estimate approaches the supremum from below.
    pub fn estimate_c0(&self, trials: usize, seed: u64) -> Result<f64> {
        if trials < MIN_TRIALS {
            return config(format!("estimate_c0 needs at least {MIN_TRIALS} trials, got {trials}"));
        }
        let sym = laplacian_symbol(&self.grid, Parity::TEMPERATURE);
        let inv_sqrt: Vec<f64> = sym.iter().map(|&k2| if k2 > 0.0 { 1.0 / k2.sqrt() } else { 0.0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0.0f64;
        for trial in 0..trials {
            let decay = 3.0 * trial as f64 / trials as f64;
            // g plays the role of A^(1/2) phi.
            let mut g = random_field(self.grid, Parity::TEMPERATURE, &mut rng, decay);
            for _ in 0..=POWER_STEPS {
                let gn = l2_norm(&g);
                if gn == 0.0 {
                    break;
                }
                g.scale(1.0 / gn);
                let mut phi = g.clone();
                phi.apply_symbol(&inv_sqrt);
                let mut resid = &phi - &self.apply_unchecked(&phi, false);
                best = best.max(l2_norm(&resid) / self.h);
                if !self.is_orthogonal_projection() {
                    resid = &resid - &self.apply_unchecked(&resid, true);
                }
                resid.apply_symbol(&inv_sqrt);
                g = resid;
            }
        }
        Ok(best)
    }

    /// Estimates `(c1, c2)` of the nodal bound under the convention `c1 = c2`.
    ///
    /// The nodal denominator `h |A^(1/2) phi| + h^2 |A phi|` dominates
    /// `h |A^(1/2) phi|`, so the power-iterated `c0` supremum is an admissible common value.
    pub fn estimate_c1_c2(&self, trials: usize, seed: u64) -> Result<(f64, f64)> {
        let c = self.estimate_c0(trials, seed)?;
        Ok((c, c))
    }
}

fn lowpass_mask(grid: &Grid, h: f64) -> Vec<bool> {
    let cut2 = 1.0 / (h * h);
    (0..grid.len())
        .map(|i| {
            let idx = grid.unflat(i);
            let k = grid.wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            Parity::TEMPERATURE.admits(idx) && grid.in_dealias_band(idx) && k2 <= cut2 * (1.0 + 1e-12)
        })
        .collect()
}

/// `out_k = sum_j m[k][j] in_j` along every line of `axis`.
fn apply_along(grid: &Grid, axis: Axis, m: &[f64], data: &mut [f64], transpose: bool) {
    let n = grid.n[axis.index()];
    let stride = grid.stride(axis);
    let outer = grid.len() / n;
    let mut line = vec![0.0; n];
    for l in 0..outer {
        // l enumerates the remaining two indices; rebuild the base offset.
        let base = (l / stride) * stride * n + l % stride;
        for (j, v) in line.iter_mut().enumerate() {
            *v = data[base + j * stride];
        }
        for k in 0..n {
            let mut acc = 0.0;
            for (j, v) in line.iter().enumerate() {
                let a = if transpose { m[j * n + k] } else { m[k * n + j] };
                acc += a * v;
            }
            data[base + k * stride] = acc;
        }
    }
}

/// Discrete analysis of nodal samples into band-limited coefficients (`n x n`, row = mode).
fn analysis(basis: Basis, n: usize, len: f64) -> Vec<f64> {
    let dx = len / n as f64;
    let cutoff = (2 * n).div_ceil(3);
    let mut f = vec![0.0; n * n];
    for j in 0..n {
        let vals = basis_values(basis, n, len, (j as f64 + 0.5) * dx);
        for k in 0..cutoff.min(n) {
            if 3 * k < 2 * n {
                f[k * n + j] = dx * vals[k];
            }
        }
    }
    f
}

fn box_of(x: f64, h: f64, boxes: usize) -> usize {
    ((x / h).floor() as usize).min(boxes - 1)
}

/// Orthogonal projection onto the span of the band-limited box indicators.
fn box_projection(basis: Basis, n: usize, len: f64, h: f64) -> Vec<f64> {
    let dx = len / n as f64;
    let boxes = ((len / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let f = analysis(basis, n, len);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); boxes];
    for j in 0..n {
        members[box_of((j as f64 + 0.5) * dx, h, boxes)].push(j);
    }
    let mut q: Vec<Vec<f64>> = Vec::new();
    for nodes in members.iter().filter(|m| !m.is_empty()) {
        let mut v: Vec<f64> = (0..n).map(|k| nodes.iter().map(|&j| f[k * n + j]).sum()).collect();
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &q {
                let d: f64 = b.iter().zip(&v).map(|(a, c)| a * c).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= d * bi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 * norm0 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut p = vec![0.0; n * n];
    for b in &q {
        for k in 0..n {
            for j in 0..n {
                p[k * n + j] += b[k] * b[j];
            }
        }
    }
    p
}

/// Sample at sensors `(i + 1/2) L / m`, extend piecewise-constant to the nodes, analyse.
fn nodal_matrix(basis: Basis, n: usize, len: f64, h: f64) -> Vec<f64> {
    let dx = len / n as f64;
    let m = ((len / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let ds = len / m as f64;
    let sensors: Vec<Vec<f64>> = (0..m).map(|i| basis_values(basis, n, len, (i as f64 + 0.5) * ds)).collect();
    let f = analysis(basis, n, len);
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        let s = &sensors[box_of((j as f64 + 0.5) * dx, ds, m)];
        for k in 0..n {
            let fkj = f[k * n + j];
            if fkj == 0.0 {
                continue;
            }
            for (c, sv) in s.iter().enumerate() {
                out[k * n + c] += fkj * sv;
            }
        }
    }
    out
}
