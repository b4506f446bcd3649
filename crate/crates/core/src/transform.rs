//! Collocation <-> coefficient transforms along each axis.
//!
//! Nodes are the midpoints `(j + 1/2) L / N`. On this grid the cosine modes
//! `0..N` and sine modes `1..N` are discretely orthogonal, so the transforms
//! are DCT-II / DCT-III pairs (sine axes through the `(-1)^j` modulation
//! identity) and are exact inverses on band-limited data. The sine Nyquist
//! mode `N` has no slot in the basis and is dropped by the forward transform.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{config, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::grid::{Axis, Basis, Grid, Parity};

/// L2-orthonormal 1D basis normalization for mode `k` on `[0, len]`.
#[inline]
pub fn basis_norm(basis: Basis, k: usize, len: f64) -> f64 {
    match (basis, k) {
        (Basis::Cos, 0) => 1.0 / len.sqrt(),
        (Basis::Sin, 0) => 0.0,
        _ => (2.0 / len).sqrt(),
    }
}

/// Values of the `n` orthonormal 1D basis functions at `x`.
pub fn basis_values(basis: Basis, n: usize, len: f64, x: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let arg = k as f64 * PI * x / len;
            let shape = match basis {
                Basis::Cos => arg.cos(),
                Basis::Sin => arg.sin(),
            };
            basis_norm(basis, k, len) * shape
        })
        .collect()
}

struct AxisPlan {
    n: usize,
    len: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(-i pi k / 2n)` for `k < n`.
    twiddle: Vec<Complex<f64>>,
}

impl AxisPlan {
    fn new(planner: &mut FftPlanner<f64>, n: usize, len: f64) -> AxisPlan {
        let twiddle = (0..n)
            .map(|k| Complex::from_polar(1.0, -PI * k as f64 / (2 * n) as f64))
            .collect();
        AxisPlan {
            n,
            len,
            forward: planner.plan_fft_forward(2 * n),
            inverse: planner.plan_fft_inverse(2 * n),
            twiddle,
        }
    }
}

/// FFT plans for one grid. Cheap to share between threads.
#[derive(Clone)]
pub struct Transforms {
    grid: Grid,
    plans: Arc<[AxisPlan; 3]>,
}

impl std::fmt::Debug for Transforms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transforms").field("grid", &self.grid).finish()
    }
}

impl Transforms {
    pub fn new(grid: Grid) -> Transforms {
        let mut planner = FftPlanner::new();
        let plans = Axis::ALL.map(|a| AxisPlan::new(&mut planner, grid.n[a.index()], grid.lengths[a.index()]));
        Transforms { grid, plans: Arc::new(plans) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Coefficients of the collocation samples `f` in the basis of `parity`.
    pub fn forward_transform(&self, f: &PhysicalField, parity: Parity) -> Result<SpectralField> {
        if *f.grid() != self.grid {
            return config("physical field grid does not match the transform grid");
        }
        Ok(self.forward_values(f.values().to_vec(), parity))
    }

    pub(crate) fn forward_values(&self, mut data: Vec<f64>, parity: Parity) -> SpectralField {
        for axis in Axis::ALL {
            self.axis_pass(&mut data, axis, parity.along(axis), Direction::Forward);
        }
        SpectralField::from_coeffs(self.grid, parity, data).expect("length checked by construction")
    }

    /// Collocation samples of `c`.
    pub fn inverse_transform(&self, c: &SpectralField) -> PhysicalField {
        assert_eq!(*c.grid(), self.grid, "spectral field grid does not match the transform grid");
        let mut data = c.coeffs().to_vec();
        for axis in Axis::ALL {
            self.axis_pass(&mut data, axis, c.parity().along(axis), Direction::Inverse);
        }
        PhysicalField::from_values(self.grid, data).expect("length checked by construction")
    }

    fn axis_pass(&self, data: &mut [f64], axis: Axis, basis: Basis, dir: Direction) {
        let plan = &self.plans[axis.index()];
        let n = plan.n;
        let m = 2 * n;
        let stride = self.grid.stride(axis);
        let block = stride * n;
        let lines = data.len() / n;
        if basis == Basis::Sin && n == 1 {
            data.iter_mut().for_each(|v| *v = 0.0);
            return;
        }

        let mut buf = vec![Complex::new(0.0, 0.0); lines * m];
        let line_starts = (0..data.len()).step_by(block).flat_map(|b| b..b + stride);
        let starts: Vec<usize> = line_starts.collect();

        let norm_k = |k: usize| basis_norm(Basis::Cos, k, plan.len);
        let sin_norm = (2.0 / plan.len).sqrt();
        match dir {
            Direction::Forward => {
                for (line, &s) in starts.iter().enumerate() {
                    let out = &mut buf[line * m..(line + 1) * m];
                    for j in 0..n {
                        let mut v = data[s + j * stride];
                        if basis == Basis::Sin && j % 2 == 1 {
                            v = -v;
                        }
                        out[j] = Complex::new(v, 0.0);
                        out[m - 1 - j] = Complex::new(v, 0.0);
                    }
                }
                let mut scratch = vec![Complex::new(0.0, 0.0); plan.forward.get_inplace_scratch_len()];
                plan.forward.process_with_scratch(&mut buf, &mut scratch);
                let w = plan.len / n as f64;
                for (line, &s) in starts.iter().enumerate() {
                    let spec = &buf[line * m..(line + 1) * m];
                    // DCT-II value X_k = Re(e^{-i pi k / 2n} Y_k) / 2
                    let dct = |k: usize| 0.5 * (plan.twiddle[k] * spec[k]).re;
                    match basis {
                        Basis::Cos => {
                            for k in 0..n {
                                data[s + k * stride] = w * norm_k(k) * dct(k);
                            }
                        }
                        Basis::Sin => {
                            data[s] = 0.0;
                            for k in 1..n {
                                data[s + k * stride] = w * sin_norm * dct(n - k);
                            }
                        }
                    }
                }
            }
            Direction::Inverse => {
                for (line, &s) in starts.iter().enumerate() {
                    let out = &mut buf[line * m..(line + 1) * m];
                    for k in 0..n {
                        let c = match basis {
                            Basis::Cos => norm_k(k) * data[s + k * stride],
                            Basis::Sin if k == 0 => 0.0,
                            Basis::Sin => sin_norm * data[s + (n - k) * stride],
                        };
                        out[k] = plan.twiddle[k].conj() * c;
                    }
                }
                let mut scratch = vec![Complex::new(0.0, 0.0); plan.inverse.get_inplace_scratch_len()];
                plan.inverse.process_with_scratch(&mut buf, &mut scratch);
                for (line, &s) in starts.iter().enumerate() {
                    let vals = &buf[line * m..(line + 1) * m];
                    for j in 0..n {
                        let mut v = vals[j].re;
                        if basis == Basis::Sin && j % 2 == 1 {
                            v = -v;
                        }
                        data[s + j * stride] = v;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}
