//! The frustrated Kuramoto model embeds in the sphere model two ways: as
//! planar rotations on the real circle, or as phases of scalar states.

use std::f64::consts::PI;

use lhs_sim::integrator::IntegrationPlan;
use lhs_sim::reductions::{verify_reduction, KuramotoState, Subsystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> lhs_sim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let plan = IntegrationPlan::new(0.02, 10.0)?;
    for kappa in [0.5, 1.0, 2.0] {
        let theta = (0..10).map(|_| rng.random_range(-PI..PI)).collect();
        let nu = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let k = KuramotoState::new(theta, nu, kappa, 0.4)?;
        let a = verify_reduction(&k, Subsystem::A, &plan)?;
        let b = verify_reduction(&k, Subsystem::B, &plan)?;
        println!("kappa = {kappa}: max phase error A = {a:.2e}, B = {b:.2e}");
    }
    Ok(())
}
