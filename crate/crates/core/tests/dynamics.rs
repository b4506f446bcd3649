use std::f64::consts::PI;

use darcy_da_core::dynamics::{advection_term, cfl_number, temperature_rhs};
use darcy_da_core::field::{dealias, h1_seminorm, l2_norm};
use darcy_da_core::random::{random_temperature, random_velocity};
use darcy_da_core::{Axis, Error, Grid, Parity, PhysicalField, SpectralField, StepParams, Stepper, SystemState, Transforms, VelocityField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (6usize..16, prop_oneof![Just(1usize), 4usize..8], 6usize..16, 1.0f64..4.0)
        .prop_map(|(nx, ny, nz, lx)| Grid::new(lx, 1.0, nx, ny, nz).unwrap())
}

fn smooth_theta(g: Grid, tf: &Transforms) -> SpectralField {
    let lx = g.lengths[0];
    let f = PhysicalField::from_fn(g, |x, _, z| {
        0.5 * (PI * z).sin() * ((2.0 * PI * x / lx).cos() + 0.3 * (4.0 * PI * x / lx).cos())
    });
    dealias(&tf.forward_transform(&f, Parity::TEMPERATURE).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn advection_is_skew_symmetric(grid in grid_strategy(), seed in any::<u64>()) {
        let tf = Transforms::new(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_velocity(grid, &mut rng);
        let theta = random_temperature(grid, &mut rng);
        let b = advection_term(&tf, &u, &theta).unwrap();
        let scale = u.l2_norm() * l2_norm(&theta).powi(2);
        prop_assert!(b.dot(&theta).abs() <= 1e-10 * scale);
    }

    #[test]
    fn advection_is_bilinear(grid in grid_strategy(), seed in any::<u64>(), a in -3.0f64..3.0) {
        let tf = Transforms::new(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_velocity(grid, &mut rng);
        let t1 = random_temperature(grid, &mut rng);
        let t2 = random_temperature(grid, &mut rng);
        let lhs = advection_term(&tf, &u, &(&t1 + &(&t2 * a))).unwrap();
        let mut rhs = advection_term(&tf, &u, &t1).unwrap();
        rhs.axpy(a, &advection_term(&tf, &u, &t2).unwrap());
        prop_assert!(l2_norm(&(&lhs - &rhs)) <= 1e-12 * l2_norm(&lhs).max(u.l2_norm() * h1_seminorm(&t1)));
    }
}

#[test]
fn advection_examples() {
    let g = Grid::slice(2.0, 12, 12).unwrap();
    let tf = Transforms::new(g);
    let theta = random_temperature(g, &mut ChaCha8Rng::seed_from_u64(3));
    assert_eq!(l2_norm(&advection_term(&tf, &VelocityField::zeros(g), &theta).unwrap()), 0.0);

    // theta = theta(z), u = (u1, 0, 0): (u . grad) theta = 0.
    let theta_z = SpectralField::mode(g, Parity::TEMPERATURE, [0, 0, 2]);
    let mut u = VelocityField::zeros(g);
    u.u[0] = SpectralField::mode(g, Parity::VELOCITY_X, [1, 0, 3]);
    assert!(l2_norm(&advection_term(&tf, &u, &theta_z).unwrap()) < 1e-14);
}

#[test]
fn advection_rejects_foreign_grid() {
    let g = Grid::slice(2.0, 8, 8).unwrap();
    let h = Grid::slice(2.0, 10, 8).unwrap();
    let tf = Transforms::new(g);
    assert!(advection_term(&tf, &VelocityField::zeros(h), &SpectralField::zeros(h, Parity::TEMPERATURE)).is_err());
}

#[test]
fn heat_solution_is_reproduced() {
    // theta*(t) = e^{-pi^2 t} sin(pi z) with u = 0 solves the temperature equation exactly.
    let g = Grid::new(2.0, 1.0, 8, 4, 12).unwrap();
    let tf = Transforms::new(g);
    let theta0 = tf.forward_transform(&PhysicalField::from_fn(g, |_, _, z| (PI * z).sin()), Parity::TEMPERATURE).unwrap();
    let mut state = SystemState::from_temperature(0.0, theta0.clone(), 30.0).unwrap();
    assert_eq!(state.u.l2_norm(), 0.0);
    let params = StepParams::new(30.0, 0.0, 0.01);
    assert_eq!(l2_norm(&temperature_rhs(&tf, &state, &params).unwrap()), 0.0);
    let mut stepper = Stepper::new(g);
    for _ in 0..100 {
        state = stepper.step(&state, &params).unwrap().state;
    }
    let exact = theta0.scaled((-PI * PI * state.t).exp());
    assert!((state.t - 1.0).abs() < 1e-12);
    assert!(l2_norm(&(&state.theta - &exact)) < 1e-10);
}

fn run(g: Grid, theta0: &SpectralField, gamma: f64, dt: f64, t_end: f64) -> SystemState {
    let mut stepper = Stepper::new(g);
    let mut s = SystemState::from_temperature(0.0, theta0.clone(), 50.0).unwrap();
    let params = StepParams::new(50.0, gamma, dt);
    for _ in 0..(t_end / dt).round() as usize {
        s = stepper.step(&s, &params).unwrap().state;
    }
    s
}

#[test]
fn temporal_convergence_is_third_order() {
    let g = Grid::slice(4.0, 24, 17).unwrap();
    let tf = Transforms::new(g);
    let theta0 = smooth_theta(g, &tf);
    let (dt, t_end) = (2e-3, 0.096);
    let reference = run(g, &theta0, 0.0, dt / 8.0, t_end);
    let e1 = l2_norm(&(&run(g, &theta0, 0.0, dt, t_end).theta - &reference.theta));
    let e2 = l2_norm(&(&run(g, &theta0, 0.0, dt / 2.0, t_end).theta - &reference.theta));
    let ratio = e1 / e2;
    assert!((6.5..10.0).contains(&ratio), "error ratio {ratio} (e1 = {e1:e}, e2 = {e2:e})");
}

#[test]
fn temporal_convergence_with_inertia() {
    // Velocity is frozen across the stages when gamma > 0, so only second order is guaranteed.
    let g = Grid::slice(4.0, 24, 17).unwrap();
    let tf = Transforms::new(g);
    let theta0 = smooth_theta(g, &tf);
    let (dt, t_end) = (2e-3, 0.096);
    let reference = run(g, &theta0, 1.0, dt / 8.0, t_end);
    let e1 = l2_norm(&(&run(g, &theta0, 1.0, dt, t_end).theta - &reference.theta));
    let e2 = l2_norm(&(&run(g, &theta0, 1.0, dt / 2.0, t_end).theta - &reference.theta));
    assert!(e1 / e2 > 3.5, "error ratio {}", e1 / e2);
}

#[test]
fn energy_law_holds_per_step() {
    // d/dt (|theta|^2 / 2) = -|grad theta|^2 + (u3, theta), checked with the trapezoid rule.
    let g = Grid::slice(4.0, 32, 25).unwrap();
    let tf = Transforms::new(g);
    let mut s = SystemState::from_temperature(0.0, smooth_theta(g, &tf), 50.0).unwrap();
    let mut stepper = Stepper::new(g);
    let dt = 1e-3;
    let power = |s: &SystemState| -h1_seminorm(&s.theta).powi(2) + s.u.component(Axis::Z).dot(&s.theta);
    for _ in 0..20 {
        let next = stepper.step(&s, &StepParams::new(50.0, 0.0, dt)).unwrap().state;
        let lhs = 0.5 * (l2_norm(&next.theta).powi(2) - l2_norm(&s.theta).powi(2)) / dt;
        let rhs = 0.5 * (power(&s) + power(&next));
        let scale = h1_seminorm(&s.theta).powi(2);
        assert!((lhs - rhs).abs() < 1e-3 * scale, "{lhs} vs {rhs}");
        s = next;
    }
}

#[test]
fn darcy_velocity_stays_slaved() {
    let g = Grid::slice(4.0, 24, 17).unwrap();
    let tf = Transforms::new(g);
    let s = run(g, &smooth_theta(g, &tf), 0.0, 1e-3, 0.01);
    let expected = darcy_da_core::darcy::leray_project_buoyancy(&s.theta, 50.0).unwrap();
    assert_eq!(s.u, expected);
}

#[test]
fn slice_matches_y_invariant_3d_run() {
    let slice = Grid::slice(4.0, 24, 17).unwrap();
    let full = Grid::new(4.0, 1.0, 24, 6, 17).unwrap();
    let tf2 = Transforms::new(slice);
    let tf3 = Transforms::new(full);
    let a = run(slice, &smooth_theta(slice, &tf2), 0.0, 1e-3, 0.05);
    let b = run(full, &smooth_theta(full, &tf3), 0.0, 1e-3, 0.05);
    let mut max_diff = 0.0f64;
    for idx in full.indices() {
        let v = b.theta.get(idx);
        if idx[1] == 0 {
            max_diff = max_diff.max((v - a.theta.get([idx[0], 0, idx[2]])).abs());
        } else {
            assert_eq!(v, 0.0, "y mode {idx:?} became nonzero");
        }
    }
    assert!(max_diff < 1e-10, "slice vs 3D difference {max_diff:e}");
}

#[test]
fn cfl_violation_is_reported() {
    let g = Grid::slice(4.0, 48, 33).unwrap();
    let tf = Transforms::new(g);
    let s = SystemState::from_temperature(0.0, smooth_theta(g, &tf).scaled(4.0), 50.0).unwrap();
    let dt = 0.01;
    assert!(cfl_number(&tf, &s.u, dt) > 0.5);
    let err = Stepper::new(g).step(&s, &StepParams::new(50.0, 0.0, dt)).unwrap_err();
    assert!(matches!(err, Error::Cfl { .. }), "{err}");
}

#[test]
fn invalid_parameters_are_rejected() {
    let g = Grid::slice(2.0, 8, 8).unwrap();
    let s = SystemState::rest(g, 0.0);
    let mut st = Stepper::new(g);
    assert!(st.step(&s, &StepParams::new(-1.0, 0.0, 1e-3)).is_err());
    assert!(st.step(&s, &StepParams::new(1.0, -1.0, 1e-3)).is_err());
    assert!(st.step(&s, &StepParams::new(1.0, 0.0, 0.0)).is_err());
    let other = SystemState::rest(Grid::slice(2.0, 10, 8).unwrap(), 0.0);
    assert!(st.step(&other, &StepParams::new(1.0, 0.0, 1e-3)).is_err());
}
