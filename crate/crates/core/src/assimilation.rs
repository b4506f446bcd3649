//! Temperature-only nudging: observations, the feedback term, the sufficient
//! conditions on `(mu, h)` and the assimilated step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{Nudge, StepOutput, StepParams, Stepper, SystemState, CFL_LIMIT};
use crate::error::{config, Result};
use crate::field::{l2_norm, SpectralField};
use crate::grid::Parity;
use crate::interpolant::{Interpolant, InterpolantKind};

#[derive(Debug, Clone)]
pub struct AssimilationSetup {
    pub mu: f64,
    pub interpolant: Interpolant,
    pub noise_level: f64,
    pub noise_seed: u64,
    pub gamma: f64,
    pub ra: f64,
    pub c_universal: f64,
}

impl AssimilationSetup {
    pub fn new(mu: f64, interpolant: Interpolant, ra: f64, gamma: f64) -> AssimilationSetup {
        AssimilationSetup { mu, interpolant, noise_level: 0.0, noise_seed: 0, gamma, ra, c_universal: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return config(format!("mu = {} must be finite and non-negative", self.mu));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return config(format!("noise_level = {} must be non-negative", self.noise_level));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return config(format!("gamma = {} must be non-negative", self.gamma));
        }
        if !(self.ra > 0.0 && self.ra.is_finite()) {
            return config(format!("Ra = {} must be positive", self.ra));
        }
        if !(self.c_universal > 0.0 && self.c_universal.is_finite()) {
            return config(format!("c_universal = {} must be positive", self.c_universal));
        }
        Ok(())
    }
}

/// Identity of the operator that produced an observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationSource {
    pub kind: InterpolantKind,
    pub h: f64,
}

impl ObservationSource {
    pub fn of(i: &Interpolant) -> ObservationSource {
        ObservationSource { kind: i.kind(), h: i.h() }
    }
}

/// Observed temperature data for one step.
///
/// `fields` holds either one snapshot or the values at every stage time of the step.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub t: f64,
    pub source: ObservationSource,
    pub fields: Vec<SpectralField>,
}

impl Observation {
    pub fn field(&self) -> &SpectralField {
        &self.fields[0]
    }
}

fn ensure_source(obs: &Observation, setup: &AssimilationSetup) -> Result<()> {
    let expected = ObservationSource::of(&setup.interpolant);
    if obs.source != expected {
        return config(format!(
            "observation produced by {} (h = {}) but consumed by {} (h = {})",
            obs.source.kind, obs.source.h, expected.kind, expected.h
        ));
    }
    Ok(())
}

/// `-mu (I_h eta - observed)`.
pub fn nudging_term(eta: &SpectralField, observed: &Observation, setup: &AssimilationSetup) -> Result<SpectralField> {
    ensure_source(observed, setup)?;
    let mut term = setup.interpolant.apply(eta)?;
    term -= observed.field();
    term.scale(-setup.mu);
    Ok(term)
}

/// Observation noise for `step`: Gaussian, confined to the range of `I_h`, unit L2 norm.
fn unit_noise(setup: &AssimilationSetup, step: u64) -> Result<SpectralField> {
    let grid = *setup.interpolant.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(setup.noise_seed);
    rng.set_stream(step);
    let mut raw = SpectralField::zeros(grid, Parity::TEMPERATURE);
    for (i, c) in raw.coeffs_mut().iter_mut().enumerate() {
        let idx = grid.unflat(i);
        if Parity::TEMPERATURE.admits(idx) && grid.in_dealias_band(idx) {
            *c = rng.sample(StandardNormal);
        }
    }
    let mut noise = setup.interpolant.apply(&raw)?;
    let n = l2_norm(&noise);
    if n > 0.0 {
        noise.scale(1.0 / n);
    }
    Ok(noise)
}

fn observe_fields(fields: &[SpectralField], setup: &AssimilationSetup, step: u64) -> Result<Vec<SpectralField>> {
    let mut out = fields.iter().map(|f| setup.interpolant.apply(f)).collect::<Result<Vec<_>>>()?;
    if setup.noise_level > 0.0 {
        let scale = setup.noise_level * l2_norm(&out[0]);
        if scale > 0.0 {
            let noise = unit_noise(setup, step)?;
            for f in &mut out {
                f.axpy(scale, &noise);
            }
        }
    }
    Ok(out)
}

/// `I_h theta` plus, when `noise_level > 0`, noise of relative size `noise_level` drawn for `step`.
pub fn make_observation(theta_ref: &SpectralField, t: f64, setup: &AssimilationSetup, step: u64) -> Result<Observation> {
    let fields = observe_fields(std::slice::from_ref(theta_ref), setup, step)?;
    Ok(Observation { t, source: ObservationSource::of(&setup.interpolant), fields })
}

/// Observation of every stage temperature of one reference step; the noise draw is shared.
pub fn observe_step(reference: &StepOutput, t: f64, setup: &AssimilationSetup, step: u64) -> Result<Observation> {
    let fields = observe_fields(&reference.stages, setup, step)?;
    Ok(Observation { t, source: ObservationSource::of(&setup.interpolant), fields })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub satisfied: bool,
    pub margin: f64,
}

/// Sufficient condition on `mu` (advisory: `c` is a user-set stand-in for the unknown universal constant).
///
/// `gamma = 0`: `mu + lambda1/2 >= 2 c Ra^2 + 4 Ra`.
/// `gamma > 0`: `2 mu + lambda1 >= 2 c Ra^4 / gamma + 2 c gamma (1 + 1/lambda1)^2`.
pub fn check_mu_condition(setup: &AssimilationSetup, lambda1: f64) -> ConditionCheck {
    let (ra, c, mu, g) = (setup.ra, setup.c_universal, setup.mu, setup.gamma);
    let margin = if g == 0.0 {
        mu + 0.5 * lambda1 - (2.0 * c * ra * ra + 4.0 * ra)
    } else {
        let s = 1.0 + 1.0 / lambda1;
        2.0 * mu + lambda1 - (2.0 * c * ra.powi(4) / g + 2.0 * c * g * s * s)
    };
    ConditionCheck { satisfied: margin >= 0.0, margin }
}

/// Smallest `mu` satisfying [`check_mu_condition`].
pub fn mu_threshold(ra: f64, gamma: f64, c: f64, lambda1: f64) -> f64 {
    if gamma == 0.0 {
        2.0 * c * ra * ra + 4.0 * ra - 0.5 * lambda1
    } else {
        let s = 1.0 + 1.0 / lambda1;
        0.5 * (2.0 * c * ra.powi(4) / gamma + 2.0 * c * gamma * s * s - lambda1)
    }
    .max(0.0)
}

/// `mu c0^2 h^2 <= 1`, allowing a few ulps so that exact boundary cases pass.
pub fn check_h_condition(mu: f64, c0: f64, h: f64) -> bool {
    mu * c0 * c0 * h * h <= 1.0 + 4.0 * f64::EPSILON
}

/// Largest `mu` with `mu c0^2 h^2 <= 1`.
pub fn mu_ceiling(c0: f64, h: f64) -> f64 {
    1.0 / (c0 * c0 * h * h)
}

/// One nudged step of the assimilated state driven by `observation` only.
pub fn step_assimilated(
    stepper: &mut Stepper,
    state: &SystemState,
    observation: &Observation,
    setup: &AssimilationSetup,
    dt: f64,
) -> Result<StepOutput> {
    setup.validate()?;
    ensure_source(observation, setup)?;
    if (observation.t - state.t).abs() > 1e-9 * dt.max(state.t.abs()) {
        return config(format!("observation at t = {} does not match state time {}", observation.t, state.t));
    }
    let params = StepParams {
        ra: setup.ra,
        gamma: setup.gamma,
        dt,
        cfl_limit: CFL_LIMIT,
        nudge: Some(Nudge { mu: setup.mu, interpolant: &setup.interpolant, observed: &observation.fields }),
    };
    stepper.step(state, &params)
}

/// Lower bound on the synchronization rate alongside the fitted diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceDiagnostics {
    pub alpha_lower: f64,
    pub fitted_rate: Option<f64>,
    pub t0_estimate: Option<f64>,
}

/// Lower bound on the decay coefficient given `M = sup max|theta|`.
///
/// `gamma = 0`: `mu + lambda1/2 - 2 Ra - c Ra^2 M^2`.
/// `gamma > 0`: `min(1/gamma, 2 mu + lambda1 - c Ra^4/gamma - c gamma (1/lambda1 + M^2)^2)`.
pub fn alpha_lower(setup: &AssimilationSetup, lambda1: f64, theta_sup: f64) -> f64 {
    let (ra, c, mu, g) = (setup.ra, setup.c_universal, setup.mu, setup.gamma);
    let m2 = theta_sup * theta_sup;
    if g == 0.0 {
        mu + 0.5 * lambda1 - 2.0 * ra - c * ra * ra * m2
    } else {
        let s = 1.0 / lambda1 + m2;
        (1.0 / g).min(2.0 * mu + lambda1 - c * ra.powi(4) / g - c * g * s * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn setup(mu: f64, gamma: f64, ra: f64) -> AssimilationSetup {
        let g = Grid::slice(2.0, 16, 16).unwrap();
        AssimilationSetup::new(mu, Interpolant::fourier_lowpass(g, 0.2).unwrap(), ra, gamma)
    }

    #[test]
    fn mu_condition_arithmetic() {
        let c = check_mu_condition(&setup(6.0, 0.0, 1.0), PI * PI);
        assert!(c.satisfied);
        assert!((c.margin - (PI * PI / 2.0)).abs() < 1e-12);
        assert!(!check_mu_condition(&setup(0.0, 0.0, 50.0), PI * PI).satisfied);
        let t = mu_threshold(50.0, 0.0, 1.0, PI * PI);
        assert!(check_mu_condition(&setup(t, 0.0, 50.0), PI * PI).margin.abs() < 1e-9);
        let t = mu_threshold(3.0, 1.0, 1.0, PI * PI);
        assert!(check_mu_condition(&setup(t, 1.0, 3.0), PI * PI).margin.abs() < 1e-9);
    }

    #[test]
    fn h_condition_boundary() {
        assert!(check_h_condition(100.0, 1.0, 0.1));
        assert!(!check_h_condition(100.0, 1.0, 0.2));
    }

    #[test]
    fn mismatched_source_is_rejected() {
        let s = setup(10.0, 0.0, 5.0);
        let g = *s.interpolant.grid();
        let other = AssimilationSetup::new(10.0, Interpolant::fourier_lowpass(g, 0.3).unwrap(), 5.0, 0.0);
        let theta = SpectralField::mode(g, Parity::TEMPERATURE, [1, 0, 1]);
        let obs = make_observation(&theta, 0.0, &other, 0).unwrap();
        assert!(nudging_term(&theta, &obs, &s).is_err());
        assert!(nudging_term(&theta, &make_observation(&theta, 0.0, &s, 0).unwrap(), &s).is_ok());
    }
}
