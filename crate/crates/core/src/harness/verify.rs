//! Runtime property checks on a config's grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::darcy::{divergence, leray_project, leray_project_buoyancy};
use crate::dynamics::advection_term;
use crate::error::Result;
use crate::field::{h1_seminorm, l2_norm, lambda1};
use crate::grid::Parity;
use crate::interpolant::Interpolant;
use crate::random::{random_temperature, random_velocity};
use crate::transform::Transforms;

use super::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const TRIALS: usize = 20;

/// Transform, Darcy, advection and interpolant properties on random fields.
pub fn verify(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let grid = cfg.grid()?;
    let tf = Transforms::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    let l1 = lambda1(&grid, Parity::TEMPERATURE);
    let (mut roundtrip, mut parseval, mut skew, mut div, mut bound, mut poincare, mut idem) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let interp = Interpolant::new(cfg.interpolant, grid, cfg.h)?;
    for _ in 0..TRIALS {
        let theta = random_temperature(grid, &mut rng);
        let phys = tf.inverse_transform(&theta);
        let back = tf.forward_transform(&phys, Parity::TEMPERATURE)?;
        let n = l2_norm(&theta);
        roundtrip = roundtrip.max(l2_norm(&(&back - &theta)) / n);
        parseval = parseval.max((phys.quadrature_dot(&phys) - n * n).abs() / (n * n));

        let u = random_velocity(grid, &mut rng);
        let b = advection_term(&tf, &u, &theta)?;
        skew = skew.max(b.dot(&theta).abs() / (u.l2_norm() * n * n));

        let ub = leray_project_buoyancy(&theta, cfg.ra)?;
        div = div.max(l2_norm(&divergence(&ub)) / h1_seminorm(&theta).max(f64::MIN_POSITIVE) / cfg.ra);
        bound = bound.max(ub.h1_seminorm() / (cfg.ra * h1_seminorm(&theta)));
        let again = leray_project(&u);
        div = div.max((&again - &u).l2_norm() / u.l2_norm());

        poincare = poincare.max(l1 * n * n / h1_seminorm(&theta).powi(2));
        if interp.is_orthogonal_projection() {
            let p = interp.apply(&theta)?;
            idem = idem.max(l2_norm(&(&interp.apply(&p)? - &p)) / n);
        }
    }
    let check = |name, value: f64, limit: f64| Check {
        name,
        passed: value <= limit,
        detail: format!("max {value:.3e} (limit {limit:.1e})"),
    };
    Ok(vec![
        check("transform round trip", roundtrip, 1e-12),
        check("Parseval identity", parseval, 1e-12),
        check("advection skew-symmetry", skew, 1e-10),
        check("Leray divergence and idempotence", div, 1e-12),
        check("velocity bound |u|_V / (Ra |theta|_V)", bound, 1.0 + 1e-12),
        check("Poincare ratio lambda1 |theta|^2 / |grad theta|^2", poincare, 1.0 + 1e-12),
        check("interpolant idempotence", idem, 1e-12),
    ])
}
