use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::diagnostics::{cross_ratio, cross_ratio_value, project, sample_quadruples, tail_sup, PairDiagnostics};
use crate::error::{Error, Result};
use crate::guarantees::{
    complex_init_threshold, real_init_threshold, CheckOptions, GuaranteeMonitor, GuaranteeReport,
};
use crate::integrator::{simulate_observed, IntegrationPlan};
use crate::linalg::{random_skew_hermitian, random_skew_symmetric, CVector, SkewHermitian};
use crate::model::{EnsembleState, ModelParams};

use super::config::{Field, OmegaMode, RunConfig};

const MAX_BISECTIONS: usize = 100;

/// One CSV row: the scalar diagnostics of a recorded snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeseriesRow {
    pub t: f64,
    pub j_m: f64,
    /// Present only for real runs.
    pub theta_m: Option<f64>,
    pub diameter: f64,
    pub norm_drift: f64,
    /// Worst relative cross-ratio change over the sampled quadruples.
    pub cross_ratio_drift: Option<f64>,
}

/// Random draws shared by every run built from the same seed.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub params: ModelParams,
    pub init: EnsembleState,
    pub init_threshold: f64,
    pub quadruples: Vec<[usize; 4]>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub params: ModelParams,
    pub init: EnsembleState,
    pub init_threshold: f64,
    pub quadruples: Vec<[usize; 4]>,
    pub rows: Vec<TimeseriesRow>,
    pub reports: Vec<GuaranteeReport>,
    pub final_state: EnsembleState,
    pub max_norm_drift: f64,
    pub tail_sup_j_m: f64,
}

impl RunOutput {
    /// True unless some checked envelope was violated.
    pub fn envelopes_hold(&self) -> bool {
        self.reports.iter().all(GuaranteeReport::passed)
    }

    pub fn j_m_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.j_m).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

fn draw_generator<R: Rng + ?Sized>(field: Field, dim: usize, range: f64, rng: &mut R) -> Result<SkewHermitian> {
    match field {
        Field::Complex => random_skew_hermitian(dim, range, rng),
        Field::Real => random_skew_symmetric(dim, range, rng),
    }
}

/// Draw `Ω_j`, `W0`, `W1` in that order from `rng`.
pub fn build_params<R: Rng + ?Sized>(cfg: &RunConfig, rng: &mut R) -> Result<ModelParams> {
    let dim = cfg.d + 1;
    let omega = match cfg.omega_mode {
        OmegaMode::Identical => vec![draw_generator(cfg.field, dim, cfg.omega_range, rng)?; cfg.n],
        OmegaMode::Heterogeneous => (0..cfg.n)
            .map(|_| draw_generator(cfg.field, dim, cfg.omega_range, rng))
            .collect::<Result<_>>()?,
    };
    let w0 = draw_generator(cfg.field, dim, cfg.w0_range, rng)?;
    let w1 = draw_generator(cfg.field, dim, cfg.w1_range, rng)?;
    ModelParams::new(cfg.kappa0, cfg.kappa1, w0, w1, omega)
}

fn gaussian<R: Rng + ?Sized>(field: Field, dim: usize, rng: &mut R) -> CVector {
    CVector::new(
        (0..dim)
            .map(|_| {
                let re = rng.sample(StandardNormal);
                let im = match field {
                    Field::Complex => rng.sample(StandardNormal),
                    Field::Real => 0.0,
                };
                Complex64::new(re, im)
            })
            .collect(),
    )
}

fn normalized(v: &CVector) -> CVector {
    v.scale_real(1.0 / v.norm())
}

/// A clustered ensemble with `max J_ij <= init_margin * threshold`.
///
/// Particles are `base + ε ξ_j` projected to the sphere, with `ε` bisected so
/// the spread lands just inside the target.
pub fn gen_initial<R: Rng + ?Sized>(cfg: &RunConfig, threshold: f64, rng: &mut R) -> Result<EnsembleState> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InitialData(format!("threshold must be positive, got {threshold}")));
    }
    let dim = cfg.d + 1;
    let base = normalized(&gaussian(cfg.field, dim, rng));
    let noise: Vec<CVector> = (0..cfg.n).map(|_| gaussian(cfg.field, dim, rng)).collect();
    let target = cfg.init_margin * threshold;
    let build = |eps: f64| -> Result<EnsembleState> {
        let z = noise
            .iter()
            .enumerate()
            .map(|(index, xi)| {
                let mut v = base.clone();
                v.axpy(Complex64::new(eps, 0.0), xi);
                if v.norm() == 0.0 {
                    return Err(Error::ZeroNorm { index });
                }
                Ok(normalized(&v))
            })
            .collect::<Result<_>>()?;
        EnsembleState::new(z)
    };
    let spread = |s: &EnsembleState| PairDiagnostics::compute(s).j_m;

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while spread(&build(hi)?) <= target {
        if hi > 1e6 {
            return build(hi);
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if spread(&build(mid)?) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(lo > f64::MIN_POSITIVE) {
        return Err(Error::InitialData(format!(
            "spread target {target:.3e} needs a perturbation below {hi:.3e}"
        )));
    }
    build(lo)
}

fn threshold_for(cfg: &RunConfig, params: &ModelParams) -> Result<f64> {
    match cfg.field {
        Field::Complex => complex_init_threshold(params),
        Field::Real => real_init_threshold(params),
    }
}

/// Draw parameters, initial data and cross-ratio quadruples for `cfg`.
///
/// The initial-data threshold is the smallest one over `kappa0_values`, so
/// one ensemble is admissible for every coupling of a sweep.
pub fn prepare(cfg: &RunConfig, kappa0_values: &[f64]) -> Result<Prepared> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = build_params(cfg, &mut rng)?;
    let mut init_threshold = threshold_for(cfg, &params)?;
    for &k in kappa0_values {
        init_threshold = init_threshold.min(threshold_for(cfg, &params.clone().with_kappa0(k)?)?);
    }
    let init = gen_initial(cfg, init_threshold, &mut rng)?;
    let quadruples = sample_quadruples(&init, cfg.quadruples, &mut rng);
    Ok(Prepared {
        params,
        init,
        init_threshold,
        quadruples,
    })
}

/// Draw, integrate, diagnose and check one configuration.
pub fn run_single(cfg: &RunConfig) -> Result<RunOutput> {
    let prepared = prepare(cfg, &[])?;
    execute(cfg, &prepared)
}

/// Integrate prepared draws under `cfg`'s couplings and plan.
pub fn execute(cfg: &RunConfig, prepared: &Prepared) -> Result<RunOutput> {
    let params = prepared.params.clone().with_kappa0(cfg.kappa0)?;
    let plan = IntegrationPlan::new(cfg.dt, cfg.t_final)?
        .with_stride(cfg.record_stride)?
        .with_renormalize(cfg.renormalize);
    let opts = CheckOptions {
        tail_fraction: cfg.tail_fraction,
    };
    let initial_ratios: Vec<Complex64> = prepared
        .quadruples
        .iter()
        .map(|q| cross_ratio(&prepared.init, *q).map(|c| c.value))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(plan.recorded_len());
    let mut monitor: Option<GuaranteeMonitor> = None;
    let (final_state, max_norm_drift) = simulate_observed(&prepared.init, &params, &plan, |snap| {
        let diag = PairDiagnostics::compute(snap);
        let cross_ratio_drift = if initial_ratios.is_empty() {
            None
        } else {
            let unit = project(snap);
            let mut worst = 0.0f64;
            for (q, c0) in prepared.quadruples.iter().zip(&initial_ratios) {
                let c = cross_ratio_value(&unit, *q);
                worst = worst.max((c - c0).norm() / (1.0 + c0.norm()));
            }
            Some(worst)
        };
        rows.push(TimeseriesRow {
            t: snap.time,
            j_m: diag.j_m,
            theta_m: diag.theta_m.filter(|_| cfg.field == Field::Real),
            diameter: diag.diameter,
            norm_drift: snap.max_norm_drift(),
            cross_ratio_drift,
        });
        match &mut monitor {
            None => monitor = Some(GuaranteeMonitor::new(&params, snap.time, &diag, opts)?),
            Some(m) => m.observe(snap.time, &diag),
        }
        Ok(())
    })?;
    let reports = monitor.expect("initial snapshot observed").finish()?;
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let j_m: Vec<f64> = rows.iter().map(|r| r.j_m).collect();
    let tail_sup_j_m = tail_sup(&times, &j_m, cfg.tail_fraction)?;
    Ok(RunOutput {
        config: cfg.clone(),
        params,
        init: prepared.init.clone(),
        init_threshold: prepared.init_threshold,
        quadruples: prepared.quadruples.clone(),
        rows,
        reports,
        final_state,
        max_norm_drift,
        tail_sup_j_m,
    })
}
