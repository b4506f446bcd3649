//! Advection-diffusion of temperature and the time stepper shared by the
//! reference and the assimilated systems.
//!
//! Diffusion is integrated exactly through an integrating factor. Advection
//! and the buoyancy source are explicit, using Heun's third-order tableau
//! (abscissas 0, 1/3, 2/3) in Lawson form. Nudging toward an orthogonal
//! projection `P` of the data is implicit: each sub-interval of length
//! `dt/3` takes a backward-Euler step of `-mu (P eta - obs)`, which is a
//! closed-form update because `P` is a projection. Non-projection
//! interpolants are nudged explicitly inside the Runge-Kutta stages.
//!
//! When the assimilated state equals the reference state and the data are
//! the reference stage values, every nudging contribution is exactly zero,
//! so a synchronized pair stays bit-identical.

use crate::darcy::{leray_project_buoyancy, step_velocity_gamma};
use crate::error::{config, Error, Result};
use crate::field::{differentiate, dealias_in_place, laplacian_symbol, SpectralField, VelocityField};
use crate::grid::{Axis, Grid, Parity};
use crate::interpolant::Interpolant;
use crate::transform::Transforms;

/// Fractions of the step at which stage temperatures are formed; the last entry is the new state.
pub const STAGE_TIMES: [f64; 4] = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];

/// Default advective CFL limit.
pub const CFL_LIMIT: f64 = 0.5;

/// Velocity and temperature at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub u: VelocityField,
    pub theta: SpectralField,
}

impl SystemState {
    /// State with a Darcy-balanced velocity `u = Ra P(theta k_hat)`.
    pub fn from_temperature(t: f64, theta: SpectralField, ra: f64) -> Result<SystemState> {
        let u = leray_project_buoyancy(&theta, ra)?;
        Ok(SystemState { t, u, theta })
    }

    /// Conductive state (`u = 0`, `theta = 0`).
    pub fn rest(grid: Grid, t: f64) -> SystemState {
        SystemState { t, u: VelocityField::zeros(grid), theta: SpectralField::zeros(grid, Parity::TEMPERATURE) }
    }

    pub fn grid(&self) -> &Grid {
        self.theta.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.u.is_finite()
    }
}

/// Nudging toward observed temperature data.
#[derive(Debug, Clone, Copy)]
pub struct Nudge<'a> {
    pub mu: f64,
    pub interpolant: &'a Interpolant,
    /// Observed fields at [`STAGE_TIMES`] (length 4), or a single field held for the whole step.
    pub observed: &'a [SpectralField],
}

impl Nudge<'_> {
    fn at(&self, stage: usize) -> &SpectralField {
        if self.observed.len() == 1 {
            &self.observed[0]
        } else {
            &self.observed[stage]
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return config(format!("mu = {} must be finite and non-negative", self.mu));
        }
        if self.interpolant.grid() != grid {
            return config("interpolant grid does not match the state grid");
        }
        if self.observed.len() != 1 && self.observed.len() != STAGE_TIMES.len() {
            return config(format!("expected 1 or {} observed fields, got {}", STAGE_TIMES.len(), self.observed.len()));
        }
        for obs in self.observed {
            obs.ensure_parity(Parity::TEMPERATURE)?;
            if obs.grid() != grid {
                return config("observation grid does not match the state grid");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepParams<'a> {
    pub ra: f64,
    pub gamma: f64,
    pub dt: f64,
    pub cfl_limit: f64,
    pub nudge: Option<Nudge<'a>>,
}

impl StepParams<'_> {
    pub fn new(ra: f64, gamma: f64, dt: f64) -> StepParams<'static> {
        StepParams { ra, gamma, dt, cfl_limit: CFL_LIMIT, nudge: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.ra > 0.0 && self.ra.is_finite()) {
            return config(format!("Ra = {} must be positive", self.ra));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return config(format!("gamma = {} must be non-negative", self.gamma));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return config(format!("dt = {} must be positive", self.dt));
        }
        Ok(())
    }
}

/// `B(u, theta) = (u . grad) theta`, evaluated pseudo-spectrally and dealiased.
pub fn advection_term(tf: &Transforms, u: &VelocityField, theta: &SpectralField) -> Result<SpectralField> {
    Ok(advect(tf, u, theta)?.0)
}

/// Returns `B(u, theta)` and `max_i max|u_i| / dx_i` over the nodes.
fn advect(tf: &Transforms, u: &VelocityField, theta: &SpectralField) -> Result<(SpectralField, f64)> {
    let grid = *tf.grid();
    theta.ensure_parity(Parity::TEMPERATURE)?;
    if theta.grid() != &grid || u.grid() != &grid {
        return config("advection operands live on different grids");
    }
    let mut product = vec![0.0; grid.len()];
    let mut speed = 0.0f64;
    for axis in Axis::ALL {
        // A collapsed axis carries neither flow nor gradient.
        if grid.n[axis.index()] == 1 {
            continue;
        }
        let comp = u.component(axis);
        let grad = differentiate(theta, axis);
        if comp.max_abs_coeff() == 0.0 || grad.max_abs_coeff() == 0.0 {
            continue;
        }
        let uc = tf.inverse_transform(comp);
        let gc = tf.inverse_transform(&grad);
        speed = speed.max(uc.max_abs() / grid.spacing(axis));
        for ((p, a), b) in product.iter_mut().zip(uc.values()).zip(gc.values()) {
            *p += a * b;
        }
    }
    let mut b = tf.forward_values(product, Parity::TEMPERATURE);
    dealias_in_place(&mut b);
    Ok((b, speed))
}

fn max_speed_ratio(tf: &Transforms, u: &VelocityField) -> f64 {
    let grid = tf.grid();
    Axis::ALL
        .iter()
        .filter(|a| grid.n[a.index()] > 1)
        .map(|&a| tf.inverse_transform(u.component(a)).max_abs() / grid.spacing(a))
        .fold(0.0, f64::max)
}

/// Advective CFL number `dt * max_i max|u_i| / dx_i`.
pub fn cfl_number(tf: &Transforms, u: &VelocityField, dt: f64) -> f64 {
    dt * max_speed_ratio(tf, u)
}

/// `-B(u, theta) + u . k_hat - mu I_h(theta - obs)`; diffusion is left to the integrating factor.
///
/// The nudging contribution uses the first observed field.
pub fn temperature_rhs(tf: &Transforms, state: &SystemState, params: &StepParams) -> Result<SpectralField> {
    let mut rhs = advection_term(tf, &state.u, &state.theta)?;
    rhs.scale(-1.0);
    rhs.axpy(1.0, state.u.component(Axis::Z));
    if let Some(n) = params.nudge {
        n.validate(state.grid())?;
        let diff = &state.theta - n.at(0);
        rhs.axpy(-n.mu, &n.interpolant.apply(&diff)?);
    }
    Ok(rhs)
}

/// Result of one step: the new state and the temperatures at [`STAGE_TIMES`].
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: SystemState,
    pub stages: Vec<SpectralField>,
}

struct Factors {
    dt: f64,
    /// `exp(-|k|^2 s dt)` for `s = 1/3, 2/3, 1`.
    decay: [Vec<f64>; 3],
}

/// Time stepper for one grid; caches transform plans and integrating factors.
pub struct Stepper {
    tf: Transforms,
    factors: Option<Factors>,
}

enum NudgeMode<'a> {
    Off,
    Implicit(Nudge<'a>),
    Explicit(Nudge<'a>),
}

impl Stepper {
    pub fn new(grid: Grid) -> Stepper {
        Stepper { tf: Transforms::new(grid), factors: None }
    }

    pub fn with_transforms(tf: Transforms) -> Stepper {
        Stepper { tf, factors: None }
    }

    pub fn transforms(&self) -> &Transforms {
        &self.tf
    }

    pub fn grid(&self) -> &Grid {
        self.tf.grid()
    }

    fn factors(&mut self, dt: f64) -> &Factors {
        if self.factors.as_ref().map_or(true, |f| f.dt != dt) {
            let sym = laplacian_symbol(self.tf.grid(), Parity::TEMPERATURE);
            let decay = [1.0 / 3.0, 2.0 / 3.0, 1.0].map(|s| sym.iter().map(|k2| (-k2 * s * dt).exp()).collect());
            self.factors = Some(Factors { dt, decay });
        }
        self.factors.as_ref().expect("just set")
    }

    /// Advances `state` by `params.dt`.
    pub fn step(&mut self, state: &SystemState, params: &StepParams) -> Result<StepOutput> {
        params.validate()?;
        let grid = *self.tf.grid();
        if state.grid() != &grid {
            return config("state grid does not match the stepper grid");
        }
        state.theta.ensure_parity(Parity::TEMPERATURE)?;
        let mode = match params.nudge {
            None => NudgeMode::Off,
            Some(n) => {
                n.validate(&grid)?;
                if n.mu == 0.0 {
                    NudgeMode::Off
                } else if n.interpolant.is_orthogonal_projection() {
                    NudgeMode::Implicit(n)
                } else {
                    if n.mu * params.dt > 1.0 {
                        return Err(Error::NudgeStability { product: n.mu * params.dt });
                    }
                    NudgeMode::Explicit(n)
                }
            }
        };

        let dt = params.dt;
        let gamma = params.gamma;
        let ra = params.ra;
        let tf = self.tf.clone();
        let [e1, e2, e3] = &self.factors(dt).decay;

        let velocity = |theta: &SpectralField| -> Result<VelocityField> {
            if gamma == 0.0 {
                leray_project_buoyancy(theta, ra)
            } else {
                Ok(state.u.clone())
            }
        };
        let explicit = |stage: usize, u: &VelocityField, theta: &SpectralField| -> Result<(SpectralField, f64)> {
            let (mut rhs, speed) = advect(&tf, u, theta)?;
            rhs.scale(-1.0);
            rhs.axpy(1.0, u.component(Axis::Z));
            if let NudgeMode::Explicit(n) = &mode {
                let mut innovation = n.interpolant.apply(theta)?;
                innovation -= n.at(stage);
                rhs.axpy(-n.mu, &innovation);
            }
            Ok((rhs, speed))
        };
        // Backward-Euler nudge over dt/3: returns the increment `theta - r`.
        let implicit = |stage: usize, r: &SpectralField| -> Result<Option<SpectralField>> {
            match &mode {
                NudgeMode::Implicit(n) => {
                    let delta = n.mu * dt / 3.0;
                    let kappa = delta / (1.0 + delta);
                    let mut inc = n.at(stage).clone();
                    inc -= &n.interpolant.apply(r)?;
                    inc.scale(kappa);
                    Ok(Some(inc))
                }
                _ => Ok(None),
            }
        };
        let with_decay = |f: &SpectralField, d: &[f64]| {
            let mut g = f.clone();
            g.apply_symbol(d);
            g
        };

        let theta_n = &state.theta;
        let u1 = velocity(theta_n)?;
        let (n1, speed) = explicit(0, &u1, theta_n)?;
        let cfl = dt * speed;
        if cfl > params.cfl_limit {
            return Err(Error::Cfl { t: state.t, cfl, limit: params.cfl_limit });
        }

        // Stage 2 at t + dt/3.
        let mut r2 = theta_n.clone();
        r2.axpy(dt / 3.0, &n1);
        r2.apply_symbol(e1);
        let inc2 = implicit(1, &r2)?;
        let mut theta2 = r2;
        if let Some(inc) = &inc2 {
            theta2 += inc;
        }

        // Stage 3 at t + 2dt/3.
        let u2 = velocity(&theta2)?;
        let (n2, _) = explicit(1, &u2, &theta2)?;
        let mut tail = n2.scaled(2.0 * dt / 3.0);
        if let Some(inc) = &inc2 {
            tail += inc;
        }
        tail.apply_symbol(e1);
        let mut r3 = with_decay(theta_n, e2);
        r3 += &tail;
        let inc3 = implicit(2, &r3)?;
        let mut theta3 = r3;
        if let Some(inc) = &inc3 {
            theta3 += inc;
        }

        // Completion at t + dt.
        let u3 = velocity(&theta3)?;
        let (n3, _) = explicit(2, &u3, &theta3)?;
        let mut r4 = theta_n.clone();
        r4.axpy(dt / 4.0, &n1);
        r4.apply_symbol(e3);
        let mut late = n3.scaled(0.75 * dt);
        if let Some(inc) = &inc3 {
            late += inc;
        }
        late.apply_symbol(e1);
        r4 += &late;
        if let Some(inc) = &inc2 {
            r4 += &with_decay(inc, e2);
        }
        let inc4 = implicit(3, &r4)?;
        let mut theta_next = r4;
        if let Some(inc) = &inc4 {
            theta_next += inc;
        }

        let u_next = if gamma == 0.0 {
            leray_project_buoyancy(&theta_next, ra)?
        } else {
            step_velocity_gamma(&state.u, &theta_next, ra, gamma, dt)?
        };
        let stages = vec![theta_n.clone(), theta2, theta3, theta_next.clone()];
        Ok(StepOutput { state: SystemState { t: state.t + dt, u: u_next, theta: theta_next }, stages })
    }
}
