//! Hypothesis thresholds and practical-aggregation roots as functions of the
//! frustration size and coupling, without integrating anything.

use lhs_sim::guarantees::{quartic_roots_t42, quartic_roots_t52, threshold_t41, threshold_t51};

fn main() -> lhs_sim::Result<()> {
    println!("|W0|_F  complex   full(k0=4,k1=1)");
    for w in [0.0, 0.25, 0.5, 1.0, 2.0] {
        println!("{w:6.2}  {:.5}   {:.5}", threshold_t41(w), threshold_t51(w, 4.0, 1.0)?);
    }

    // residual bounds exist once coupling dominates the frequency spread
    let (d_omega, w0) = (4.9, 0.35);
    for k0 in [10.0, 20.0, 40.0, 80.0] {
        let show = |r: Option<(f64, f64)>| r.map_or("none".to_string(), |(a, b)| format!("({a:.4}, {b:.4})"));
        println!(
            "kappa0 = {k0:>4}: roots {} with kappa1 = 1: {}",
            show(quartic_roots_t42(k0, d_omega, w0)),
            show(quartic_roots_t52(k0, 1.0, d_omega, w0, 0.1)),
        );
    }
    Ok(())
}
