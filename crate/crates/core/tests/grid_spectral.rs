use std::f64::consts::PI;

use darcy_da_core::field::{dealias, differentiate, h1_seminorm, l2_norm, lambda1, laplacian_symbol};
use darcy_da_core::random::{random_field, random_temperature};
use darcy_da_core::{Axis, Grid, Parity, PhysicalField, SpectralField, Transforms};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PARITIES: [Parity; 5] =
    [Parity::TEMPERATURE, Parity::PRESSURE, Parity::VELOCITY_X, Parity::VELOCITY_Y, Parity::VELOCITY_Z];

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (4usize..14, prop_oneof![Just(1usize), 4usize..9], 4usize..14, 0.5f64..4.0, 0.5f64..2.0)
        .prop_map(|(nx, ny, nz, lx, ly)| Grid::new(lx, ly, nx, ny, nz).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip(grid in grid_strategy(), p in 0usize..5, seed in any::<u64>()) {
        let tf = Transforms::new(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(grid, PARITIES[p], &mut rng, 0.0);
        let back = tf.forward_transform(&tf.inverse_transform(&f), PARITIES[p]).unwrap();
        prop_assert!(l2_norm(&(&back - &f)) <= 1e-12 * l2_norm(&f).max(1.0));
    }

    #[test]
    fn parseval_holds(grid in grid_strategy(), p in 0usize..5, seed in any::<u64>()) {
        let tf = Transforms::new(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(grid, PARITIES[p], &mut rng, 1.0);
        let g = random_field(grid, PARITIES[p], &mut rng, 1.0);
        let quad = tf.inverse_transform(&f).quadrature_dot(&tf.inverse_transform(&g));
        prop_assert!((quad - f.dot(&g)).abs() <= 1e-12 * l2_norm(&f) * l2_norm(&g));
    }

    #[test]
    fn poincare_inequality(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_temperature(grid, &mut rng);
        let l1 = lambda1(&grid, Parity::TEMPERATURE);
        prop_assert!(l1 * l2_norm(&f).powi(2) <= h1_seminorm(&f).powi(2) * (1.0 + 1e-12));
    }

    #[test]
    fn laplacian_is_minus_sum_of_second_derivatives(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_temperature(grid, &mut rng);
        let mut lap = f.clone();
        lap.apply_symbol(&laplacian_symbol(&grid, Parity::TEMPERATURE));
        let mut second = SpectralField::zeros(grid, Parity::TEMPERATURE);
        for a in Axis::ALL {
            second.axpy(-1.0, &differentiate(&differentiate(&f, a), a));
        }
        prop_assert!(l2_norm(&(&second - &lap)) <= 1e-12 * l2_norm(&lap).max(1.0));
    }

    #[test]
    fn dealias_is_idempotent_projection(grid in grid_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(grid, Parity::TEMPERATURE, &mut rng, 0.0);
        let d = dealias(&f);
        prop_assert_eq!(dealias(&d), d.clone());
        prop_assert!(l2_norm(&d) <= l2_norm(&f));
        prop_assert!((f.dot(&d) - d.dot(&d)).abs() <= 1e-12 * f.dot(&f));
    }
}

#[test]
fn derivative_of_sin_pi_z() {
    let g = Grid::slice(2.0, 8, 12).unwrap();
    let tf = Transforms::new(g);
    let s = tf.forward_transform(&PhysicalField::from_fn(g, |_, _, z| (PI * z).sin()), Parity::TEMPERATURE).unwrap();
    let d = tf.inverse_transform(&differentiate(&s, Axis::Z));
    let exact = PhysicalField::from_fn(g, |_, _, z| PI * (PI * z).cos());
    for (a, b) in d.values().iter().zip(exact.values()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn lambda1_is_pi_squared() {
    for (lx, ly) in [(1.0, 1.0), (2.0, 1.0), (4.0, 3.0)] {
        let g = Grid::new(lx, ly, 6, 6, 6).unwrap();
        assert!((lambda1(&g, Parity::TEMPERATURE) - PI * PI).abs() < 1e-12);
    }
}

#[test]
fn dealias_cutoff_matches_two_thirds_rule() {
    let g = Grid::slice(2.0, 96, 49).unwrap();
    assert_eq!(g.dealias_cutoff(Axis::X), 63);
    assert_eq!(g.dealias_cutoff(Axis::Z), 32);
    assert!(g.in_dealias_band([63, 0, 32]));
    assert!(!g.in_dealias_band([64, 0, 1]));
    assert!(!g.in_dealias_band([1, 0, 33]));
}

#[test]
fn grid_rejects_bad_shapes() {
    assert!(Grid::new(1.0, 1.0, 3, 4, 4).is_err());
    assert!(Grid::new(1.0, 1.0, 4, 2, 4).is_err());
    assert!(Grid::new(-1.0, 1.0, 4, 4, 4).is_err());
    assert!(Grid::new(1.0, 1.0, 4, 1, 4).unwrap().is_slice());
}
