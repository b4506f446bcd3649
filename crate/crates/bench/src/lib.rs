//! Fixtures shared by the criterion benchmarks.

use darcy_da_core::random::random_temperature;
use darcy_da_core::{Grid, SystemState, Transforms};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Grids the kernels are timed on: the acceptance slice and a 3D smoke box.
pub fn grids() -> Vec<(&'static str, Grid)> {
    vec![
        ("slice_96x49", Grid::slice(4.0, 96, 49).expect("valid grid")),
        ("box_32^3", Grid::new(4.0, 1.0, 32, 32, 32).expect("valid grid")),
    ]
}

/// Smooth random temperature with its slaved velocity, scaled to `max|theta| ~ 1`.
pub fn state(grid: Grid, ra: f64) -> (Transforms, SystemState) {
    let tf = Transforms::new(grid);
    let theta = random_temperature(grid, &mut ChaCha8Rng::seed_from_u64(42));
    let peak = tf.inverse_transform(&theta).max_abs().max(1e-300);
    let state = SystemState::from_temperature(0.0, theta.scaled(1.0 / peak), ra).expect("grid matches");
    (tf, state)
}
