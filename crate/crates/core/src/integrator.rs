//! Fixed-step classical Runge-Kutta integration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::model::{add_free_flow, EnsembleState, ModelParams};

pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_DRIFT_ABORT: f64 = 1e-3;
/// Unit-norm tolerance required of initial data handed to [`simulate`].
pub const INITIAL_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationPlan {
    pub dt: f64,
    pub t_final: f64,
    /// Record every `record_stride`-th step. The first and last steps are
    /// always recorded.
    pub record_stride: usize,
    /// Rescale every particle to unit norm after each step.
    pub renormalize: bool,
    pub drift_abort_threshold: f64,
}

impl IntegrationPlan {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        let plan = Self {
            dt,
            t_final,
            record_stride: 1,
            renormalize: false,
            drift_abort_threshold: DEFAULT_DRIFT_ABORT,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.record_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn with_renormalize(mut self, on: bool) -> Self {
        self.renormalize = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be at least dt, got {}",
                self.t_final
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        if !(self.drift_abort_threshold > 0.0) {
            return Err(Error::InvalidParameter(
                "drift_abort_threshold must be positive".into(),
            ));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "t_final {} is not an integer multiple of dt {}",
                self.t_final, self.dt
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Number of snapshots [`simulate`] records.
    pub fn recorded_len(&self) -> usize {
        let steps = self.steps();
        let regular = steps / self.record_stride + 1;
        if steps.is_multiple_of(self.record_stride) {
            regular
        } else {
            regular + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<EnsembleState>,
    /// Maximum over snapshots of `max_j | ||z_j|| - 1 |`.
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &EnsembleState {
        self.states.last().expect("trajectory has at least one snapshot")
    }
}

/// One classical RK4 step of a possibly time-dependent vector field.
///
/// `field(t, z, out)` writes `dz/dt` into `out`.
pub fn rk4_step_with<F>(z: &[CVector], t: f64, dt: f64, field: &mut F) -> Vec<CVector>
where
    F: FnMut(f64, &[CVector], &mut Vec<CVector>),
{
    let mut k1 = Vec::with_capacity(z.len());
    let mut k2 = Vec::with_capacity(z.len());
    let mut k3 = Vec::with_capacity(z.len());
    let mut k4 = Vec::with_capacity(z.len());
    let shifted = |k: &[CVector], h: f64| -> Vec<CVector> {
        z.iter()
            .zip(k)
            .map(|(zj, kj)| {
                let mut v = zj.clone();
                v.axpy(Complex64::new(h, 0.0), kj);
                v
            })
            .collect()
    };
    field(t, z, &mut k1);
    field(t + 0.5 * dt, &shifted(&k1, 0.5 * dt), &mut k2);
    field(t + 0.5 * dt, &shifted(&k2, 0.5 * dt), &mut k3);
    field(t + dt, &shifted(&k3, dt), &mut k4);
    let w1 = Complex64::new(dt / 6.0, 0.0);
    let w2 = Complex64::new(dt / 3.0, 0.0);
    z.iter()
        .enumerate()
        .map(|(j, zj)| {
            let mut v = zj.clone();
            v.axpy(w1, &k1[j]);
            v.axpy(w2, &k2[j]);
            v.axpy(w2, &k3[j]);
            v.axpy(w1, &k4[j]);
            v
        })
        .collect()
}

fn model_field(params: &ModelParams) -> impl FnMut(f64, &[CVector], &mut Vec<CVector>) + '_ {
    let coupling = params.coupling();
    move |_t, z, out| {
        coupling.meanfield(z, out);
        add_free_flow(z, params.omega(), out);
    }
}

/// Advance the model by one RK4 step of size `dt` using the mean-field field.
pub fn rk4_step(state: &EnsembleState, params: &ModelParams, dt: f64) -> Result<EnsembleState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if state.n() != params.n() || state.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.n() * params.dim(),
            found: state.n() * state.dim(),
        });
    }
    let z = rk4_step_with(&state.z, state.time, dt, &mut model_field(params));
    let next = EnsembleState {
        z,
        time: state.time + dt,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite { step: 1 });
    }
    Ok(next)
}

/// Integrate the model from `init` over `[0, plan.t_final]`.
pub fn simulate(init: &EnsembleState, params: &ModelParams, plan: &IntegrationPlan) -> Result<Trajectory> {
    check_init(init, params)?;
    integrate(init, plan, model_field(params))
}

/// As [`simulate`], handing each recorded snapshot to `observe` instead of
/// storing it. Returns the final state and the maximum norm drift.
pub fn simulate_observed<O>(
    init: &EnsembleState,
    params: &ModelParams,
    plan: &IntegrationPlan,
    observe: O,
) -> Result<(EnsembleState, f64)>
where
    O: FnMut(&EnsembleState) -> Result<()>,
{
    check_init(init, params)?;
    integrate_observed(init, plan, model_field(params), observe)
}

fn check_init(init: &EnsembleState, params: &ModelParams) -> Result<()> {
    if init.n() != params.n() || init.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.n() * params.dim(),
            found: init.n() * init.dim(),
        });
    }
    let drift = init.max_norm_drift();
    if drift > INITIAL_NORM_TOL {
        return Err(Error::InvalidParameter(format!(
            "initial state is off the sphere by {drift:.3e}"
        )));
    }
    Ok(())
}

/// Integrate an arbitrary field with the plan's stepping, recording and drift
/// monitoring. Snapshot times are `step * dt` measured from `init.time`.
pub fn integrate<F>(init: &EnsembleState, plan: &IntegrationPlan, field: F) -> Result<Trajectory>
where
    F: FnMut(f64, &[CVector], &mut Vec<CVector>),
{
    let mut times = Vec::with_capacity(plan.recorded_len());
    let mut states = Vec::with_capacity(plan.recorded_len());
    let (_, max_norm_drift) = integrate_observed(init, plan, field, |snap| {
        times.push(snap.time);
        states.push(snap.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times,
        states,
        max_norm_drift,
    })
}

/// Streaming form of [`integrate`]: `observe` sees every recorded snapshot,
/// including the initial one, and may abort the run with an error.
pub fn integrate_observed<F, O>(
    init: &EnsembleState,
    plan: &IntegrationPlan,
    mut field: F,
    mut observe: O,
) -> Result<(EnsembleState, f64)>
where
    F: FnMut(f64, &[CVector], &mut Vec<CVector>),
    O: FnMut(&EnsembleState) -> Result<()>,
{
    plan.validate()?;
    let steps = plan.steps();
    let t0 = init.time;
    let mut max_drift = init.max_norm_drift();
    observe(init)?;

    let mut snap = init.clone();
    for step in 1..=steps {
        let t = t0 + (step - 1) as f64 * plan.dt;
        let mut z = rk4_step_with(&snap.z, t, plan.dt, &mut field);
        if !z.iter().all(CVector::is_finite) {
            return Err(Error::NonFinite { step });
        }
        let drift = z.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
        if drift > plan.drift_abort_threshold {
            return Err(Error::DriftAbort {
                step,
                drift,
                threshold: plan.drift_abort_threshold,
            });
        }
        if plan.renormalize {
            z = normalize_all(&z)?;
        }
        snap = EnsembleState {
            z,
            time: t0 + step as f64 * plan.dt,
        };
        if step % plan.record_stride == 0 || step == steps {
            max_drift = max_drift.max(snap.max_norm_drift());
            observe(&snap)?;
        }
    }
    Ok((snap, max_drift))
}

fn normalize_all(z: &[CVector]) -> Result<Vec<CVector>> {
    z.iter()
        .enumerate()
        .map(|(index, v)| {
            let n = v.norm();
            if n == 0.0 || !n.is_finite() {
                Err(Error::ZeroNorm { index })
            } else {
                Ok(v.scale_real(1.0 / n))
            }
        })
        .collect()
}

/// Project every particle back onto the unit sphere.
pub fn renormalize(state: &EnsembleState) -> Result<EnsembleState> {
    Ok(EnsembleState {
        z: normalize_all(&state.z)?,
        time: state.time,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use super::*;
    use crate::linalg::{matrix_exp, random_skew_hermitian, SkewHermitian};

    fn unit(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
        let v = CVector::new(
            (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        );
        v.scale_real(1.0 / v.norm())
    }

    fn unit_frobenius(rng: &mut ChaCha8Rng, dim: usize) -> SkewHermitian {
        let m = random_skew_hermitian(dim, 1.0, rng).unwrap();
        let s = 1.0 / m.frobenius_norm();
        SkewHermitian::new(m.matrix().scale_real(s)).unwrap()
    }

    #[test]
    fn free_flow_step_matches_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let om = unit_frobenius(&mut rng, 3);
        let p = ModelParams::identical(4, 0.0, 0.0, SkewHermitian::zero(3), SkewHermitian::zero(3), om.clone())
            .unwrap();
        let s = EnsembleState::new((0..4).map(|_| unit(&mut rng, 3)).collect()).unwrap();
        let next = rk4_step(&s, &p, 0.02).unwrap();
        let e = matrix_exp(om.matrix(), 0.02);
        for (a, b) in next.z.iter().zip(&s.z) {
            assert!((a - &e.mul_vec(b).unwrap()).norm() < 1e-10);
        }
        assert!((next.time - 0.02).abs() < 1e-15);
    }

    #[test]
    fn consensus_equilibrium_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = unit(&mut rng, 3);
        let p = ModelParams::identical(
            5,
            2.0,
            1.0,
            SkewHermitian::zero(3),
            SkewHermitian::zero(3),
            SkewHermitian::zero(3),
        )
        .unwrap();
        let s = EnsembleState::new(vec![z; 5]).unwrap();
        let next = rk4_step(&s, &p, 0.02).unwrap();
        assert_eq!(next.z, s.z);
    }

    fn endpoint(s: &EnsembleState, p: &ModelParams, dt: f64, t: f64) -> Vec<CVector> {
        simulate(s, p, &IntegrationPlan::new(dt, t).unwrap()).unwrap().last().z.clone()
    }

    fn dist(a: &[CVector], b: &[CVector]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn fourth_order_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let omega = (0..6).map(|_| random_skew_hermitian(3, 1.0, &mut rng).unwrap()).collect();
        let p = ModelParams::new(
            2.0,
            0.5,
            random_skew_hermitian(3, 0.1, &mut rng).unwrap(),
            random_skew_hermitian(3, 0.1, &mut rng).unwrap(),
            omega,
        )
        .unwrap();
        let s = EnsembleState::new((0..6).map(|_| unit(&mut rng, 3)).collect()).unwrap();
        let t = 2.0;
        let reference = endpoint(&s, &p, 0.08 / 64.0, t);
        let e1 = dist(&endpoint(&s, &p, 0.08, t), &reference);
        let e2 = dist(&endpoint(&s, &p, 0.04, t), &reference);
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn recording_counts() {
        let plan = IntegrationPlan::new(0.02, 10.0).unwrap();
        assert_eq!(plan.steps(), 500);
        assert_eq!(plan.recorded_len(), 501);
        let plan = plan.with_stride(7).unwrap();
        assert_eq!(plan.recorded_len(), 500 / 7 + 2);
        assert!(IntegrationPlan::new(0.0, 1.0).is_err());
        assert!(IntegrationPlan::new(0.02, 0.01).is_err());
        assert!(IntegrationPlan::new(0.03, 1.0).is_err());
    }

    #[test]
    fn free_flow_keeps_unit_norm_and_records_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let omega: Vec<SkewHermitian> = (0..3).map(|_| unit_frobenius(&mut rng, 3)).collect();
        let p = ModelParams::new(0.0, 0.0, SkewHermitian::zero(3), SkewHermitian::zero(3), omega).unwrap();
        let s = EnsembleState::new((0..3).map(|_| unit(&mut rng, 3)).collect()).unwrap();
        let plan = IntegrationPlan::new(0.02, 10.0).unwrap().with_stride(3).unwrap();
        let tr = simulate(&s, &p, &plan).unwrap();
        assert_eq!(tr.len(), plan.recorded_len());
        assert_eq!(tr.times[0], 0.0);
        assert!((tr.times.last().unwrap() - 10.0).abs() < 1e-12);
        assert!(tr.times.windows(2).all(|w| w[0] < w[1]));
        assert!(tr.max_norm_drift < 1e-8);
        for (snap, &t) in tr.states.iter().zip(&tr.times) {
            for ((z, z0), om) in snap.z.iter().zip(&s.z).zip(p.omega()) {
                let exact = matrix_exp(om.matrix(), t).mul_vec(z0).unwrap();
                assert!((z - &exact).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn simulate_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let omega = (0..5).map(|_| random_skew_hermitian(3, 1.0, &mut rng).unwrap()).collect();
        let p = ModelParams::new(
            1.0,
            0.3,
            random_skew_hermitian(3, 0.1, &mut rng).unwrap(),
            SkewHermitian::zero(3),
            omega,
        )
        .unwrap();
        let s = EnsembleState::new((0..5).map(|_| unit(&mut rng, 3)).collect()).unwrap();
        let plan = IntegrationPlan::new(0.02, 2.0).unwrap();
        assert_eq!(simulate(&s, &p, &plan).unwrap(), simulate(&s, &p, &plan).unwrap());
    }

    #[test]
    fn off_sphere_initial_data_is_rejected() {
        let p = ModelParams::identical(
            1,
            1.0,
            0.0,
            SkewHermitian::zero(2),
            SkewHermitian::zero(2),
            SkewHermitian::zero(2),
        )
        .unwrap();
        let s = EnsembleState::new(vec![CVector::from_real(&[2.0, 0.0])]).unwrap();
        assert!(simulate(&s, &p, &IntegrationPlan::new(0.1, 1.0).unwrap()).is_err());
    }

    #[test]
    fn drift_abort_and_renormalize() {
        // A field with a radial component inflates the norm until the abort fires.
        let s = EnsembleState::new(vec![CVector::from_real(&[1.0, 0.0])]).unwrap();
        let plan = IntegrationPlan::new(0.1, 1.0).unwrap();
        let res = integrate(&s, &plan, |_t, z, out| {
            out.clear();
            out.extend(z.iter().cloned());
        });
        assert!(matches!(res, Err(Error::DriftAbort { step: 1, .. })));

        let unit_state = renormalize(&s).unwrap();
        assert_eq!(unit_state, s);
        let doubled = EnsembleState::new(vec![CVector::from_real(&[0.0, 2.0])]).unwrap();
        assert_eq!(renormalize(&doubled).unwrap().z[0], CVector::from_real(&[0.0, 1.0]));
        let zero = EnsembleState::new(vec![CVector::zeros(2)]).unwrap();
        assert!(matches!(renormalize(&zero), Err(Error::ZeroNorm { index: 0 })));

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let near = EnsembleState::new(
            (0..10).map(|_| unit(&mut rng, 3).scale_real(1.0 + 1e-4 * rng.random::<f64>())).collect(),
        )
        .unwrap();
        let r = renormalize(&near).unwrap();
        assert!(r.max_norm_drift() < 1e-15);
        let again = renormalize(&r).unwrap();
        for (a, b) in again.z.iter().zip(&r.z) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
