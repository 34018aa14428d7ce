//! Real initial data and real skew-symmetric frequencies keep the ensemble on
//! the real sphere, where the diagnostics also report the angle `θ_M`.

use lhs_sim::harness::{run_single, Field, OmegaMode, RunConfig};

fn main() -> lhs_sim::Result<()> {
    for mode in [OmegaMode::Identical, OmegaMode::Heterogeneous] {
        let mut cfg = RunConfig::minimal(2, 30, 5.0, 20.0, 2);
        cfg.field = Field::Real;
        cfg.omega_mode = mode;
        let out = run_single(&cfg)?;
        let theta: Vec<f64> = out.rows.iter().filter_map(|r| r.theta_m).collect();
        let sup = theta.iter().copied().fold(0.0, f64::max);
        println!(
            "{mode:?}: theta_M(0) = {:.4}, sup theta_M = {sup:.4}, theta_M(T) = {:.3e}, imag part {:.1e}",
            theta[0],
            theta[theta.len() - 1],
            out.final_state.max_imag(),
        );
    }
    Ok(())
}
