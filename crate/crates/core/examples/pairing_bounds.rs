//! Sharpness of the two pairing inequalities used by the frustration
//! estimates, over random skew matrices and vectors.

use lhs_sim::linalg::{
    pairing_bound_complex, pairing_bound_real, random_skew_hermitian, random_skew_symmetric, CVector,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn vector(dim: usize, real: bool, rng: &mut ChaCha8Rng) -> CVector {
    CVector::new(
        (0..dim)
            .map(|_| {
                let im = if real { 0.0 } else { rng.sample(StandardNormal) };
                Complex64::new(rng.sample(StandardNormal), im)
            })
            .collect(),
    )
}

fn main() -> lhs_sim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for dim in [2, 3, 5] {
        let (mut real, mut complex) = (0.0f64, 0.0f64);
        for _ in 0..10_000 {
            let w = random_skew_symmetric(dim, 1.0, &mut rng)?;
            let b = pairing_bound_real(w.matrix(), &vector(dim, true, &mut rng), &vector(dim, true, &mut rng))?;
            real = real.max(b.lhs / b.rhs);
            let w = random_skew_hermitian(dim, 1.0, &mut rng)?;
            let b = pairing_bound_complex(&w, &vector(dim, false, &mut rng), &vector(dim, false, &mut rng))?;
            complex = complex.max(b.lhs / b.rhs);
        }
        println!("dim {dim}: largest lhs/rhs real = {real:.4}, complex = {complex:.4}");
    }
    Ok(())
}
