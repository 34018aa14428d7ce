//! Kuramoto oscillators with uniform frustration, their two embeddings into
//! the sphere model, and the solution-splitting identity for identical
//! ensembles.
//!
//! ```text
//! dθ_j/dt = ν_j + (κ/N) Σ_k sin(θ_k - θ_j + α)
//! ```

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::{integrate, simulate, IntegrationPlan};
use crate::linalg::{matrix_exp, CMatrix, CVector, SkewHermitian};
use crate::model::{Coupling, EnsembleState, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct KuramotoState {
    pub theta: Vec<f64>,
    pub nu: Vec<f64>,
    pub kappa: f64,
    pub alpha: f64,
}

impl KuramotoState {
    pub fn new(theta: Vec<f64>, nu: Vec<f64>, kappa: f64, alpha: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if theta.len() != nu.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                found: nu.len(),
            });
        }
        if !(kappa.is_finite() && alpha.is_finite()) || theta.iter().chain(&nu).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("Kuramoto data must be finite".into()));
        }
        Ok(Self { theta, nu, kappa, alpha })
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    /// Whether `|α| < π/2`, the range in which frustration still favours
    /// synchronization.
    pub fn moderate_frustration(&self) -> bool {
        self.alpha.abs() < FRAC_PI_2
    }
}

/// Phase velocities. Uses the identity
/// `Σ_k sin(θ_k - θ_j + α) = Im(e^{i(α - θ_j)} Σ_k e^{iθ_k})`.
pub fn kuramoto_rhs(state: &KuramotoState) -> Vec<f64> {
    phase_velocity(&state.theta, &state.nu, state.kappa, state.alpha)
}

fn phase_velocity(theta: &[f64], nu: &[f64], kappa: f64, alpha: f64) -> Vec<f64> {
    let n = theta.len() as f64;
    let order: Complex64 = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).sum();
    theta
        .iter()
        .zip(nu)
        .map(|(&t, &v)| v + kappa / n * (Complex64::from_polar(1.0, alpha - t) * order).im)
        .collect()
}

/// Phase trajectory sampled at every step, initial phases included.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    pub times: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
}

/// Fixed-step RK4 integration of the Kuramoto system.
pub fn simulate_kuramoto(state: &KuramotoState, plan: &IntegrationPlan) -> Result<PhaseTrajectory> {
    plan.validate()?;
    let f = |th: &[f64]| phase_velocity(th, &state.nu, state.kappa, state.alpha);
    let axpy = |th: &[f64], h: f64, k: &[f64]| -> Vec<f64> { th.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let dt = plan.dt;
    let mut th = state.theta.clone();
    let mut out = PhaseTrajectory {
        times: vec![0.0],
        theta: vec![th.clone()],
    };
    let steps = plan.steps();
    for step in 1..=steps {
        let k1 = f(&th);
        let k2 = f(&axpy(&th, 0.5 * dt, &k1));
        let k3 = f(&axpy(&th, 0.5 * dt, &k2));
        let k4 = f(&axpy(&th, dt, &k3));
        for (j, t) in th.iter_mut().enumerate() {
            *t += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if step % plan.record_stride == 0 || step == steps {
            out.times.push(step as f64 * dt);
            out.theta.push(th.clone());
        }
    }
    Ok(out)
}

/// Planar rotation by `α`.
pub fn rotation(alpha: f64) -> CMatrix {
    let (s, c) = alpha.sin_cos();
    CMatrix::from_real_rows(&[&[c, -s], &[s, c]]).expect("2x2 rows")
}

/// Real circle embedding: `x_j = (cos θ_j, sin θ_j)`, `Ω_j` the planar
/// generator with speed `ν_j`, `V0` the rotation by `α` (through the
/// override), `κ0 = κ`, `κ1 = 0`.
pub fn embed_subsystem_a(k: &KuramotoState) -> Result<(EnsembleState, ModelParams)> {
    let z = k
        .theta
        .iter()
        .map(|&t| CVector::from_real(&[t.cos(), t.sin()]))
        .collect();
    let omega = k
        .nu
        .iter()
        .map(|&v| SkewHermitian::new(CMatrix::from_real_rows(&[&[0.0, -v], &[v, 0.0]])?))
        .collect::<Result<Vec<_>>>()?;
    let params = ModelParams::new(k.kappa, 0.0, SkewHermitian::zero(2), SkewHermitian::zero(2), omega)?
        .with_override(rotation(k.alpha), CMatrix::identity(2))?;
    Ok((EnsembleState::new(z)?, params))
}

/// Scalar embedding: `z_j = e^{iθ_j}`, `Ω_j = iν_j`, `V1 = e^{iα}` (through
/// the override), `κ0 = 0`, `κ1 = κ/2`.
pub fn embed_subsystem_b(k: &KuramotoState) -> Result<(EnsembleState, ModelParams)> {
    let z = k
        .theta
        .iter()
        .map(|&t| CVector::new(vec![Complex64::from_polar(1.0, t)]))
        .collect();
    let omega = k
        .nu
        .iter()
        .map(|&v| SkewHermitian::new(CMatrix::from_rows(vec![vec![Complex64::new(0.0, v)]])?))
        .collect::<Result<Vec<_>>>()?;
    let v1 = CMatrix::from_rows(vec![vec![Complex64::from_polar(1.0, k.alpha)]])?;
    let params = ModelParams::new(0.0, k.kappa / 2.0, SkewHermitian::zero(1), SkewHermitian::zero(1), omega)?
        .with_override(CMatrix::identity(1), v1)?;
    Ok((EnsembleState::new(z)?, params))
}

/// Phases `atan2(x_2, x_1)` of a circle-embedded state.
pub fn phases_a(state: &EnsembleState) -> Vec<f64> {
    state.z.iter().map(|x| x[1].re.atan2(x[0].re)).collect()
}

/// Phases `arg z_j` of a scalar-embedded state.
pub fn phases_b(state: &EnsembleState) -> Vec<f64> {
    state.z.iter().map(|z| z[0].arg()).collect()
}

/// `|a - b|` reduced to `[0, π]`.
pub fn wrapped_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    d.sin().atan2(d.cos()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Integrate the Kuramoto system and its embedding side by side and return
/// the largest wrapped phase discrepancy over all recorded snapshots.
pub fn verify_reduction(k: &KuramotoState, which: Subsystem, plan: &IntegrationPlan) -> Result<f64> {
    let direct = simulate_kuramoto(k, plan)?;
    let (init, params) = match which {
        Subsystem::A => embed_subsystem_a(k)?,
        Subsystem::B => embed_subsystem_b(k)?,
    };
    let embedded = simulate(&init, &params, plan)?;
    let mut worst: f64 = 0.0;
    for (theta, state) in direct.theta.iter().zip(&embedded.states) {
        let phases = match which {
            Subsystem::A => phases_a(state),
            Subsystem::B => phases_b(state),
        };
        for (a, b) in theta.iter().zip(&phases) {
            worst = worst.max(wrapped_diff(*a, *b));
        }
    }
    Ok(worst)
}

/// Linear flow `e^{Ωt}` and the conjugated frustrations
/// `Ṽ(t) = e^{-Ωt} V e^{Ωt}` driving the nonlinear flow of an identical
/// ensemble.
#[derive(Debug, Clone)]
pub struct SplittingFlows {
    omega: SkewHermitian,
    v0: CMatrix,
    v1: CMatrix,
    kappa0: f64,
    kappa1: f64,
}

impl SplittingFlows {
    pub fn new(params: &ModelParams) -> Result<Self> {
        if !params.identical_omega() {
            return Err(Error::HeterogeneousOmega("solution splitting"));
        }
        Ok(Self {
            omega: params.omega()[0].clone(),
            v0: params.v0(),
            v1: params.v1(),
            kappa0: params.kappa0(),
            kappa1: params.kappa1(),
        })
    }

    pub fn linear(&self, t: f64) -> CMatrix {
        matrix_exp(self.omega.matrix(), t)
    }

    fn conjugate(&self, v: &CMatrix, t: f64) -> CMatrix {
        let u = self.linear(t);
        u.adjoint().matmul(&v.matmul(&u))
    }

    pub fn tilde_v0(&self, t: f64) -> CMatrix {
        self.conjugate(&self.v0, t)
    }

    pub fn tilde_v1(&self, t: f64) -> CMatrix {
        self.conjugate(&self.v1, t)
    }

    /// Coupling-only field with `Ṽ` evaluated at the exact stage time.
    fn nonlinear_field(&self) -> impl FnMut(f64, &[CVector], &mut Vec<CVector>) + '_ {
        move |t, z, out| {
            let u = self.linear(t);
            let ua = u.adjoint();
            Coupling {
                kappa0: self.kappa0,
                kappa1: self.kappa1,
                v0: ua.matmul(&self.v0.matmul(&u)),
                v1: ua.matmul(&self.v1.matmul(&u)),
            }
            .meanfield(z, out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingReport {
    /// `max_j sup_t ||z_j(t) - e^{Ωt} w_j(t)||` over recorded times.
    pub max_deviation: f64,
    /// Largest `| ||Ṽ0(t)||_F - ||V0||_F |` over recorded times.
    pub tilde_norm_drift: f64,
    pub dt: f64,
    pub t_final: f64,
}

/// Integrate the full system and the nonlinear flow side by side and compare
/// `z_j(t)` with `e^{Ωt} w_j(t)`.
pub fn verify_splitting(params: &ModelParams, init: &EnsembleState, t_final: f64, dt: f64) -> Result<SplittingReport> {
    let flows = SplittingFlows::new(params)?;
    let plan = IntegrationPlan::new(dt, t_final)?;
    let full = simulate(init, params, &plan)?;
    let field = flows.nonlinear_field();
    let nonlinear = integrate(init, &plan, field)?;
    let v0_norm = flows.v0.frobenius_norm();
    let mut report = SplittingReport {
        max_deviation: 0.0,
        tilde_norm_drift: 0.0,
        dt,
        t_final,
    };
    for ((t, z), w) in full.times.iter().zip(&full.states).zip(&nonlinear.states) {
        let u = flows.linear(*t);
        for (zj, wj) in z.z.iter().zip(&w.z) {
            let dev = (zj - &u.mul_vec(wj)?).norm();
            report.max_deviation = report.max_deviation.max(dev);
        }
        let drift = (flows.tilde_v0(*t).frobenius_norm() - v0_norm).abs();
        report.tilde_norm_drift = report.tilde_norm_drift.max(drift);
    }
    Ok(report)
}

/// Deviations at each step size and the least-squares slope of
/// `log deviation` against `log dt`; `None` when a deviation is zero.
pub fn splitting_order(
    params: &ModelParams,
    init: &EnsembleState,
    t_final: f64,
    dts: &[f64],
) -> Result<(Vec<f64>, Option<f64>)> {
    let devs = dts
        .iter()
        .map(|&dt| verify_splitting(params, init, t_final, dt).map(|r| r.max_deviation))
        .collect::<Result<Vec<_>>>()?;
    let slope = if devs.iter().all(|&d| d > 0.0) {
        let pts: Vec<(f64, f64)> = dts.iter().zip(&devs).map(|(h, d)| (h.ln(), d.ln())).collect();
        crate::harness::sweep::least_squares_slope(&pts)
    } else {
        None
    };
    Ok((devs, slope))
}
