//! Twin experiments: a reference run observed through `I_h` drives one or
//! more assimilated runs in lockstep.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::assimilation::{
    alpha_lower, check_h_condition, check_mu_condition, observe_step, step_assimilated, AssimilationSetup,
};
use crate::dynamics::{StepOutput, StepParams, Stepper, SystemState};
use crate::error::{config, Error, Result};
use crate::field::{dealias, h1_seminorm, l2_norm, lambda1, PhysicalField, SpectralField, VelocityField};
use crate::grid::{Grid, Parity};
use crate::interpolant::{Interpolant, InterpolantKind};
use crate::snapshot::load_snapshot;
use crate::transform::Transforms;

use super::config::{AssimInit, ExperimentConfig, InitialProfile, VelocityInit};
use super::series::{monotone_rate, write_series, ErrorRow, ErrorSeries, RunMetadata};

/// `max|theta|` marking entry into the absorbing regime.
pub const ABSORBING_LEVEL: f64 = 2.0;

/// Spin-up gives up this long after `T_spinup` if the absorbing regime is never reached.
pub const SPINUP_GRACE: f64 = 100.0;

/// Largest step subdivision tried when the reference violates the CFL limit during spin-up.
const MAX_SUBSTEPS: usize = 64;

/// Reference initial temperature on the config grid.
pub fn initial_temperature(cfg: &ExperimentConfig, tf: &Transforms) -> Result<SpectralField> {
    let grid = *tf.grid();
    let lx = cfg.lx;
    let from_fn = |f: &dyn Fn(f64, f64) -> f64| -> Result<SpectralField> {
        let phys = PhysicalField::from_fn(grid, |x, _y, z| f(x, z));
        Ok(dealias(&tf.forward_transform(&phys, Parity::TEMPERATURE)?))
    };
    match &cfg.theta0 {
        InitialProfile::Default => from_fn(&|x, z| {
            0.5 * (PI * z).sin() * ((2.0 * PI * x / lx).cos() + 0.3 * (4.0 * PI * x / lx).cos())
        }),
        InitialProfile::Roll => {
            let mut theta = from_fn(&|x, z| (PI * z).sin() * (2.0 * PI * x / lx).cos())?;
            let peak = tf.inverse_transform(&theta).max_abs();
            theta.scale(cfg.theta0_amplitude / peak);
            Ok(theta)
        }
        InitialProfile::Snapshot(path) => {
            let snap = load_snapshot(path)?;
            if snap.field.grid() != &grid {
                return config(format!("snapshot {} was written on a different grid", path.display()));
            }
            snap.field.ensure_parity(Parity::TEMPERATURE)?;
            Ok(snap.field)
        }
    }
}

/// Reference state at the start of spin-up.
pub fn initial_reference(cfg: &ExperimentConfig, tf: &Transforms) -> Result<SystemState> {
    let theta = initial_temperature(cfg, tf)?;
    if cfg.gamma == 0.0 || cfg.u0 == VelocityInit::Darcy {
        SystemState::from_temperature(0.0, theta, cfg.ra)
    } else {
        Ok(SystemState { t: 0.0, u: VelocityField::zeros(*tf.grid()), theta })
    }
}

fn reference_params(cfg: &ExperimentConfig, dt: f64) -> StepParams<'static> {
    StepParams { ra: cfg.ra, gamma: cfg.gamma, dt, cfl_limit: cfg.cfl_limit, nudge: None }
}

/// Advances the reference by `cfg.dt`, splitting the step while the CFL limit is violated.
fn substepped(stepper: &mut Stepper, state: &SystemState, cfg: &ExperimentConfig) -> Result<SystemState> {
    let mut parts = 1;
    loop {
        let dt = cfg.dt / parts as f64;
        let mut s = state.clone();
        let mut result = Ok(());
        for _ in 0..parts {
            match stepper.step(&s, &reference_params(cfg, dt)) {
                Ok(out) => s = out.state,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        match result {
            Ok(()) => {
                s.t = state.t + cfg.dt;
                return Ok(s);
            }
            Err(Error::Cfl { .. }) if parts < MAX_SUBSTEPS => parts *= 2,
            Err(e) => return Err(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpinUp {
    pub state: SystemState,
    /// First reference time with `max|theta| <= 2`.
    pub t0: Option<f64>,
}

/// Evolves the reference alone until `t >= T_spinup` and `max|theta| <= 2`.
pub fn spin_up(cfg: &ExperimentConfig, stepper: &mut Stepper, mut state: SystemState) -> Result<SpinUp> {
    let tf = stepper.transforms().clone();
    let mut t0 = None;
    let mut k = 0usize;
    loop {
        let t = k as f64 * cfg.dt;
        let peak = tf.inverse_transform(&state.theta).max_abs();
        if !peak.is_finite() {
            return Err(Error::Config(format!("reference blew up during spin-up at t = {t}")));
        }
        if peak <= ABSORBING_LEVEL && t0.is_none() {
            t0 = Some(t);
        }
        if t >= cfg.t_spinup - 1e-9 * cfg.dt && peak <= ABSORBING_LEVEL {
            state.t = t;
            return Ok(SpinUp { state, t0 });
        }
        if t > cfg.t_spinup + SPINUP_GRACE {
            return Err(Error::Config(format!("reference did not reach max|theta| <= {ABSORBING_LEVEL} by t = {t}")));
        }
        state = substepped(stepper, &state, cfg)?;
        k += 1;
    }
}

/// Fields that determine the reference trajectory; members sharing one reference must agree on them.
fn reference_signature(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.mu = 0.0;
    c.h = 1.0;
    c.interpolant = InterpolantKind::FourierLowpass;
    c.noise_level = 0.0;
    c.noise_seed = 0;
    c.c0_seed = 0;
    c.c0_trials = 200;
    c.c_universal = 1.0;
    c.strict = false;
    c.assim_init = AssimInit::Zero;
    c.output = None;
    c.to_text()
}

struct Member {
    setup: AssimilationSetup,
    stepper: Stepper,
    state: SystemState,
    series: ErrorSeries,
    lambda1: f64,
    active: bool,
}

fn prepare_member(cfg: &ExperimentConfig, grid: Grid, tf: &Transforms) -> Result<(AssimilationSetup, RunMetadata)> {
    let interpolant = Interpolant::new(cfg.interpolant, grid, cfg.h)?;
    let c0 = match cfg.interpolant {
        InterpolantKind::Nodal => interpolant.estimate_c1_c2(cfg.c0_trials, cfg.c0_seed)?.0,
        _ => interpolant.estimate_c0(cfg.c0_trials, cfg.c0_seed)?,
    };
    let setup = AssimilationSetup {
        mu: cfg.mu,
        interpolant,
        noise_level: cfg.noise_level,
        noise_seed: cfg.noise_seed,
        gamma: cfg.gamma,
        ra: cfg.ra,
        c_universal: cfg.c_universal,
    };
    setup.validate()?;
    let l1 = lambda1(tf.grid(), Parity::TEMPERATURE);
    let mu_check = check_mu_condition(&setup, l1);
    let h_ok = check_h_condition(cfg.mu, c0, cfg.h);
    let mut warnings = Vec::new();
    if !mu_check.satisfied {
        warnings.push(format!("mu condition not met (margin {:.6e}, c = {})", mu_check.margin, cfg.c_universal));
    }
    if !h_ok {
        let product = cfg.mu * c0 * c0 * cfg.h * cfg.h;
        if cfg.strict {
            return config(format!("strict mode: mu c0^2 h^2 = {product:.6e} > 1"));
        }
        warnings.push(format!("h condition not met (mu c0^2 h^2 = {product:.6e})"));
    }
    let meta = RunMetadata {
        config_hash: cfg.hash(),
        c0_estimate: c0,
        mu_condition: mu_check.satisfied,
        mu_margin: mu_check.margin,
        h_condition: h_ok,
        warnings,
        ..RunMetadata::default()
    };
    Ok((setup, meta))
}

fn record(tf: &Transforms, t: f64, reference: &SystemState, theta_max: f64, member: &mut Member) {
    let xi = &reference.theta - &member.state.theta;
    let w = &reference.u - &member.state.u;
    let row = ErrorRow {
        t,
        xi_l2: l2_norm(&xi),
        xi_h1: h1_seminorm(&xi),
        w_l2: w.l2_norm(),
        theta_max,
        eta_max: tf.inverse_transform(&member.state.theta).max_abs(),
    };
    let finite = row.is_finite();
    if finite {
        member.series.rows.push(row);
    } else {
        member.fail(format!("non-finite error norms at t = {t}"));
    }
}

impl Member {
    fn fail(&mut self, message: String) {
        self.active = false;
        if self.series.meta.failure.is_none() {
            self.series.meta.failure = Some(message);
        }
    }

    fn finish(mut self) -> ErrorSeries {
        let sup = self.series.rows.iter().map(|r| r.theta_max).fold(0.0, f64::max);
        self.series.meta.alpha_lower = alpha_lower(&self.setup, self.lambda1, sup);
        self.series.meta.fitted_rate = monotone_rate(&self.series);
        self.series
    }
}

/// Runs members that share one reference trajectory in lockstep.
///
/// Configuration errors common to the reference abort the call; per-member
/// setup errors and step failures are reported in that member's series.
pub fn run_shared(cfgs: &[ExperimentConfig]) -> Result<Vec<ErrorSeries>> {
    let Some(base) = cfgs.first() else {
        return Ok(Vec::new());
    };
    for c in cfgs {
        c.validate()?;
    }
    let sig = reference_signature(base);
    if cfgs.iter().any(|c| reference_signature(c) != sig) {
        return config("members of a shared run must agree on every reference parameter");
    }
    let grid = base.grid()?;
    let tf = Transforms::new(grid);
    let mut ref_stepper = Stepper::with_transforms(tf.clone());
    let spun = spin_up(base, &mut ref_stepper, initial_reference(base, &tf)?)?;
    let spinup_time = spun.state.t;
    let mut reference = spun.state;
    let l1 = lambda1(&grid, Parity::TEMPERATURE);

    let mut members: Vec<Member> = cfgs
        .par_iter()
        .map(|cfg| {
            let (setup, meta, err) = match prepare_member(cfg, grid, &tf) {
                Ok((s, m)) => (Some(s), m, None),
                Err(e) => (None, RunMetadata { config_hash: cfg.hash(), ..RunMetadata::default() }, Some(e.to_string())),
            };
            let state = match cfg.assim_init {
                AssimInit::Zero => SystemState::rest(grid, reference.t),
                AssimInit::Reference => reference.clone(),
            };
            let setup = setup.unwrap_or_else(|| {
                AssimilationSetup::new(0.0, Interpolant::fourier_lowpass(grid, 1.0).expect("positive h"), cfg.ra, cfg.gamma)
            });
            let mut m = Member {
                setup,
                stepper: Stepper::with_transforms(tf.clone()),
                state,
                series: ErrorSeries { rows: Vec::new(), meta: RunMetadata { t0_estimate: spun.t0, spinup_time, ..meta } },
                lambda1: l1,
                active: true,
            };
            if let Some(e) = err {
                m.fail(e);
            }
            m
        })
        .collect();

    let steps = base.steps();
    let theta_max = tf.inverse_transform(&reference.theta).max_abs();
    members.par_iter_mut().filter(|m| m.active).for_each(|m| record(&tf, 0.0, &reference, theta_max, m));

    for n in 0..steps {
        let out: StepOutput = match ref_stepper.step(&reference, &reference_params(base, base.dt)) {
            Ok(out) if out.state.is_finite() => out,
            Ok(_) => {
                let msg = format!("reference became non-finite at t = {}", (n + 1) as f64 * base.dt);
                members.iter_mut().for_each(|m| m.fail(msg.clone()));
                break;
            }
            Err(e) => {
                let msg = format!("reference step failed: {e}");
                members.iter_mut().for_each(|m| m.fail(msg.clone()));
                break;
            }
        };
        let t_obs = reference.t;
        let t_rec = (n + 1) as f64 * base.dt;
        let recording = (n + 1) % base.record_every == 0 || n + 1 == steps;
        let theta_max = if recording { tf.inverse_transform(&out.state.theta).max_abs() } else { 0.0 };
        members.par_iter_mut().filter(|m| m.active).for_each(|m| {
            let stepped = observe_step(&out, t_obs, &m.setup, n as u64)
                .and_then(|obs| step_assimilated(&mut m.stepper, &m.state, &obs, &m.setup, base.dt));
            match stepped {
                Ok(next) if next.state.is_finite() => {
                    m.state = next.state;
                    if recording {
                        record(&tf, t_rec, &out.state, theta_max, m);
                    }
                }
                Ok(_) => m.fail(format!("assimilated state became non-finite at t = {t_rec}")),
                Err(e) => m.fail(format!("assimilated step failed at t = {t_rec}: {e}")),
            }
        });
        reference = out.state;
        if members.iter().all(|m| !m.active) {
            break;
        }
    }
    Ok(members.into_iter().map(Member::finish).collect())
}

/// One twin experiment; writes the CSV and sidecar when `cfg.output` is set.
pub fn run_twin_experiment(cfg: &ExperimentConfig) -> Result<ErrorSeries> {
    let series = run_shared(std::slice::from_ref(cfg))?.pop().expect("one member");
    if let Some(path) = &cfg.output {
        write_series(&series, path)?;
    }
    Ok(series)
}
