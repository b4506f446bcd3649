use std::f64::consts::PI;

use darcy_da_core::darcy::{divergence, gradient, leray_project, leray_project_buoyancy, pressure_for, step_velocity_gamma};
use darcy_da_core::field::{h1_seminorm, l2_norm};
use darcy_da_core::random::{random_field, random_temperature, random_velocity};
use darcy_da_core::{Axis, Grid, Parity, PhysicalField, Transforms, VelocityField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (4usize..12, prop_oneof![Just(1usize), 4usize..8], 4usize..12, 0.5f64..4.0)
        .prop_map(|(nx, ny, nz, lx)| Grid::new(lx, 1.0, nx, ny, nz).unwrap())
}

fn raw_velocity(grid: Grid, rng: &mut ChaCha8Rng) -> VelocityField {
    VelocityField::from_components(Axis::ALL.map(|a| random_field(grid, Parity::velocity(a), rng, 1.0))).unwrap()
}

#[test]
fn manufactured_roll_on_unit_cube() {
    let g = Grid::new(1.0, 1.0, 8, 8, 8).unwrap();
    let tf = Transforms::new(g);
    let ra = 7.0;
    let theta = PhysicalField::from_fn(g, |x, _, z| (PI * x).cos() * (PI * z).sin());
    let theta = tf.forward_transform(&theta, Parity::TEMPERATURE).unwrap();
    let u = leray_project_buoyancy(&theta, ra).unwrap();
    let expect = [
        PhysicalField::from_fn(g, |x, _, z| -0.5 * ra * (PI * x).sin() * (PI * z).cos()),
        PhysicalField::zeros(g),
        PhysicalField::from_fn(g, |x, _, z| 0.5 * ra * (PI * x).cos() * (PI * z).sin()),
    ];
    for a in Axis::ALL {
        let got = tf.inverse_transform(u.component(a));
        for (p, q) in got.values().iter().zip(expect[a.index()].values()) {
            assert!((p - q).abs() < 1e-12, "{a:?}: {p} vs {q}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn buoyancy_velocity_is_divergence_free_and_bounded(grid in grid_strategy(), seed in any::<u64>(), ra in 0.1f64..200.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = random_temperature(grid, &mut rng);
        let u = leray_project_buoyancy(&theta, ra).unwrap();
        prop_assert!(l2_norm(&divergence(&u)) <= 1e-12 * ra * h1_seminorm(&theta));
        prop_assert!(u.l2_norm() <= ra * l2_norm(&theta) * (1.0 + 1e-12));
        prop_assert!(u.h1_seminorm() <= ra * h1_seminorm(&theta) * (1.0 + 1e-12));
    }

    #[test]
    fn darcy_energy_identity(grid in grid_strategy(), seed in any::<u64>(), ra in 0.1f64..200.0) {
        // |u|^2 = Ra (theta k_hat, u)
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = random_temperature(grid, &mut rng);
        let u = leray_project_buoyancy(&theta, ra).unwrap();
        let lhs = u.dot(&u);
        let rhs = ra * theta.dot(u.component(Axis::Z));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
    }

    #[test]
    fn leray_is_orthogonal_projection(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = raw_velocity(grid, &mut rng);
        let g = raw_velocity(grid, &mut rng);
        let pf = leray_project(&f);
        let pg = leray_project(&g);
        let scale = f.l2_norm().max(1.0);
        prop_assert!((&leray_project(&pf) - &pf).l2_norm() <= 1e-12 * scale);
        prop_assert!((pf.dot(&g) - f.dot(&pg)).abs() <= 1e-12 * f.l2_norm() * g.l2_norm());
        prop_assert!(pf.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
        prop_assert!(l2_norm(&divergence(&pf)) <= 1e-12 * f.h1_seminorm().max(1.0));
    }

    #[test]
    fn helmholtz_split_reassembles(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = raw_velocity(grid, &mut rng);
        let grad = gradient(&pressure_for(&f)).unwrap();
        let mut sum = leray_project(&f);
        sum.axpy(1.0, &grad);
        prop_assert!((&sum - &f).l2_norm() <= 1e-12 * f.l2_norm().max(1.0));
    }

    #[test]
    fn gamma_update_stays_divergence_free(grid in grid_strategy(), seed in any::<u64>(), gamma in 0.01f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_velocity(grid, &mut rng);
        let theta = random_temperature(grid, &mut rng);
        let next = step_velocity_gamma(&u, &theta, 10.0, gamma, 1e-2).unwrap();
        prop_assert!(l2_norm(&divergence(&next)) <= 1e-12 * next.h1_seminorm().max(1.0));
    }
}

#[test]
fn gamma_update_matches_exact_relaxation() {
    // gamma du/dt = -u + U with U fixed: u(t) = U + (u0 - U) e^{-t/gamma}; halving dt twice agrees.
    let g = Grid::slice(2.0, 8, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u0 = random_velocity(g, &mut rng);
    let theta = random_temperature(g, &mut rng);
    let target = leray_project_buoyancy(&theta, 3.0).unwrap();
    let (gamma, t) = (0.7, 0.4);
    let one = step_velocity_gamma(&u0, &theta, 3.0, gamma, t).unwrap();
    let mut many = u0.clone();
    for _ in 0..8 {
        many = step_velocity_gamma(&many, &theta, 3.0, gamma, t / 8.0).unwrap();
    }
    let mut exact = target.clone();
    let mut d = &u0 - &target;
    d.scale((-t / gamma).exp());
    exact.axpy(1.0, &d);
    assert!((&one - &exact).l2_norm() < 1e-13 * exact.l2_norm());
    assert!((&many - &exact).l2_norm() < 1e-13 * exact.l2_norm());
}

#[test]
fn gamma_to_zero_recovers_darcy() {
    let g = Grid::slice(2.0, 8, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u0 = random_velocity(g, &mut rng);
    let theta = random_temperature(g, &mut rng);
    let darcy = leray_project_buoyancy(&theta, 4.0).unwrap();
    let fast = step_velocity_gamma(&u0, &theta, 4.0, 1e-6, 1e-3).unwrap();
    assert!((&fast - &darcy).l2_norm() < 1e-12 * darcy.l2_norm());
}

#[test]
fn invalid_gamma_inputs_are_rejected() {
    let g = Grid::slice(2.0, 8, 9).unwrap();
    let u = VelocityField::zeros(g);
    let theta = random_temperature(g, &mut ChaCha8Rng::seed_from_u64(1));
    assert!(step_velocity_gamma(&u, &theta, 1.0, 0.0, 1e-3).is_err());
    assert!(step_velocity_gamma(&u, &theta, 1.0, 1.0, 0.0).is_err());
    let p = random_field(g, Parity::PRESSURE, &mut ChaCha8Rng::seed_from_u64(1), 1.0);
    assert!(leray_project_buoyancy(&p, 1.0).is_err());
}
