//! Built-in invariant suites behind `lhs verify`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::diagnostics::{pair_inner_rate, PairDiagnostics};
use crate::error::Result;
use crate::integrator::{simulate, IntegrationPlan};
use crate::linalg::{herm_inner, random_skew_hermitian, CVector, SkewHermitian};
use crate::model::{rhs_meanfield, rhs_sum, EnsembleState, ModelParams};
use crate::reductions::{splitting_order, verify_reduction, verify_splitting, KuramotoState, Subsystem};

use super::config::{Field, OmegaMode, RunConfig};
use super::run::{prepare, run_single};

pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
pub const CROSS_RATIO_LIMIT: f64 = 1e-6;
pub const MEANFIELD_LIMIT: f64 = 1e-12;
pub const MEANFIELD_INSTANCES: usize = 1000;
pub const REDUCTION_LIMIT: f64 = 1e-6;
pub const SPLITTING_LIMIT: f64 = 1e-6;
pub const SPLITTING_ORDER: f64 = 4.0;
pub const SPLITTING_ORDER_SLACK: f64 = 0.5;
pub const CORRELATION_SLACK: f64 = 1e-10;
pub const REAL_RELATION_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Conservation,
    Splitting,
    Reduction,
    Meanfield,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::Conservation => "conservation",
            Self::Splitting => "splitting",
            Self::Reduction => "reduction",
            Self::Meanfield => "meanfield",
            Self::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Self::All => vec![Self::Conservation, Self::Splitting, Self::Reduction, Self::Meanfield],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Self::Conservation, Self::Splitting, Self::Reduction, Self::Meanfield, Self::All]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// One measured quantity against its limit. `upper` limits pass when
/// `value <= limit`; interval checks use `lower..=limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn upper(suite: Suite, name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            suite: suite.name(),
            name: name.into(),
            value,
            lower: None,
            limit,
            passed: value <= limit,
        }
    }

    fn within(suite: Suite, name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            suite: suite.name(),
            name: name.into(),
            value,
            lower: Some(lower),
            limit: upper,
            passed: lower <= value && value <= upper,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        match self.lower {
            None => write!(f, "{verdict} {}.{} value={:.3e} limit={:.3e}", self.suite, self.name, self.value, self.limit),
            Some(lo) => write!(
                f,
                "{verdict} {}.{} value={:.4} range=[{lo}, {}]",
                self.suite, self.name, self.value, self.limit
            ),
        }
    }
}

pub fn run_suite(suite: Suite) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in suite.members() {
        out.extend(match s {
            Suite::Conservation => conservation()?,
            Suite::Splitting => splitting()?,
            Suite::Reduction => reduction()?,
            Suite::Meanfield => vec![meanfield(MEANFIELD_INSTANCES, 0x6d66)?],
            Suite::All => unreachable!("expanded above"),
        });
    }
    Ok(out)
}

/// The identical-ensemble reference run: `N = 50`, `d = 2`, `κ0 = 1`,
/// `T = 10`, `dt = 0.02`, no renormalization.
pub fn reference_identical(seed: u64) -> RunConfig {
    RunConfig::minimal(2, 50, 1.0, 10.0, seed)
}

fn conservation() -> Result<Vec<Check>> {
    let s = Suite::Conservation;
    let cfg = reference_identical(1);
    let out = run_single(&cfg)?;
    let cross = out
        .rows
        .iter()
        .filter_map(|r| r.cross_ratio_drift)
        .fold(0.0f64, f64::max);
    let mut checks = vec![
        Check::upper(s, "norm_drift", out.max_norm_drift, NORM_DRIFT_LIMIT),
        Check::upper(s, "cross_ratio_drift", cross, CROSS_RATIO_LIMIT),
    ];

    let prepared = prepare(&cfg, &[])?;
    let plan = IntegrationPlan::new(cfg.dt, cfg.t_final)?;
    let traj = simulate(&prepared.init, &prepared.params, &plan)?;
    let mut corr = 0.0f64;
    for state in &traj.states {
        corr = corr.max(correlation_violation(&PairDiagnostics::compute(state)));
    }
    checks.push(Check::upper(s, "correlation_bounds", corr, CORRELATION_SLACK));
    let fd = derivative_mismatch(&traj.states, &prepared.params, cfg.dt)?;
    checks.push(Check::upper(s, "inner_product_rate", fd, 10.0 * cfg.dt * cfg.dt));

    let mut real = RunConfig::minimal(2, 20, 2.0, 5.0, 2);
    real.field = Field::Real;
    real.omega_mode = OmegaMode::Heterogeneous;
    let p = prepare(&real, &[])?;
    let traj = simulate(&p.init, &p.params, &IntegrationPlan::new(real.dt, real.t_final)?.with_stride(25)?)?;
    let mut rel = 0.0f64;
    for state in &traj.states {
        let d = PairDiagnostics::compute(state);
        let theta = d.theta.as_ref().expect("real run keeps real states");
        for a in 0..state.n() {
            for b in 0..state.n() {
                rel = rel.max((d.j[(a, b)].powi(2) - (1.0 - theta[(a, b)].cos())).abs());
            }
        }
    }
    checks.push(Check::upper(s, "real_functional_relation", rel, REAL_RELATION_LIMIT));
    Ok(checks)
}

/// Largest violation of `R` symmetric, `I` antisymmetric, `R^2 + I^2 <= 1`.
pub fn correlation_violation(d: &PairDiagnostics) -> f64 {
    let n = d.r.n();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let (r, i) = (d.r[(a, b)], d.i[(a, b)]);
            worst = worst
                .max((r - d.r[(b, a)]).abs())
                .max((i + d.i[(b, a)]).abs())
                .max(r * r + i * i - 1.0);
        }
    }
    worst
}

/// Worst gap between the centered difference of `<z_i, z_j>` across two
/// recorded steps and its analytic rate, over pairs `(0, j)`.
pub fn derivative_mismatch(states: &[EnsembleState], params: &ModelParams, dt: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for w in states.windows(3) {
        for j in 1..w[1].n() {
            let fwd = herm_inner(&w[2].z[0], &w[2].z[j])?;
            let bwd = herm_inner(&w[0].z[0], &w[0].z[j])?;
            let fd = (fwd - bwd) / (2.0 * dt);
            worst = worst.max((fd - pair_inner_rate(&w[1], params, 0, j)?).norm());
        }
    }
    Ok(worst)
}

fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::new(
        (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect(),
    );
    v.scale_real(1.0 / v.norm())
}

/// Worst entrywise gap between the pairwise-sum and centroid forms of the
/// vector field over `instances` random draws with `N <= 8`, `d <= 3`.
pub fn meanfield(instances: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(1..=8);
        let dim = rng.random_range(1..=4);
        let omega = (0..n)
            .map(|_| random_skew_hermitian(dim, 1.0, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let w0 = random_skew_hermitian(dim, 0.5, &mut rng)?;
        let w1 = random_skew_hermitian(dim, 0.5, &mut rng)?;
        let params = ModelParams::new(rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), w0, w1, omega)?;
        let state = EnsembleState::new((0..n).map(|_| random_unit(dim, &mut rng)).collect())?;
        let a = rhs_sum(&state, &params)?;
        let b = rhs_meanfield(&state, &params)?;
        for (x, y) in a.dz.iter().zip(&b.dz) {
            for (p, q) in x.entries().iter().zip(y.entries()) {
                worst = worst.max((p - q).norm());
            }
        }
    }
    Ok(Check::upper(Suite::Meanfield, "sum_vs_centroid", worst, MEANFIELD_LIMIT))
}

/// The three splitting cases: no free flow, frustrations commuting with `Ω`,
/// and a generic draw.
pub fn splitting_cases(seed: u64) -> Result<(EnsembleState, Vec<(&'static str, ModelParams)>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 20;
    let om = random_skew_hermitian(3, 1.0, &mut rng)?;
    let w0 = random_skew_hermitian(3, 0.1, &mut rng)?;
    let w1 = random_skew_hermitian(3, 0.1, &mut rng)?;
    let init = EnsembleState::new((0..n).map(|_| random_unit(3, &mut rng)).collect())?;
    let m = om.matrix();
    let commuting = SkewHermitian::new(&m.scale_real(0.1) + &m.matmul(m).scale(Complex64::new(0.0, 0.05)))?;
    let cases = vec![
        ("zero_frequency", ModelParams::identical(n, 1.0, 0.5, w0.clone(), w1.clone(), SkewHermitian::zero(3))?),
        ("commuting", ModelParams::identical(n, 1.0, 0.5, commuting.clone(), commuting, om.clone())?),
        ("generic", ModelParams::identical(n, 1.0, 0.5, w0, w1, om)?),
    ];
    Ok((init, cases))
}

fn splitting() -> Result<Vec<Check>> {
    let s = Suite::Splitting;
    let (init, cases) = splitting_cases(3)?;
    let mut checks = Vec::new();
    for (name, params) in &cases {
        let rep = verify_splitting(params, &init, 10.0, 0.02)?;
        checks.push(Check::upper(s, format!("{name}.deviation"), rep.max_deviation, SPLITTING_LIMIT));
        checks.push(Check::upper(s, format!("{name}.tilde_norm"), rep.tilde_norm_drift, 1e-10));
        if *name != "zero_frequency" {
            let (_, slope) = splitting_order(params, &init, 10.0, &[0.08, 0.04, 0.02])?;
            checks.push(Check::within(
                s,
                format!("{name}.order"),
                slope.unwrap_or(f64::NAN),
                SPLITTING_ORDER - SPLITTING_ORDER_SLACK,
                SPLITTING_ORDER + SPLITTING_ORDER_SLACK,
            ));
        }
    }
    Ok(checks)
}

fn reduction() -> Result<Vec<Check>> {
    let s = Suite::Reduction;
    let plan = IntegrationPlan::new(0.02, 10.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b75);
    let mut checks = Vec::new();
    for kappa in [0.5, 1.0, 2.0] {
        let n = 10;
        let theta = (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let nu = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let alpha = rng.random_range(-1.5..1.5);
        let k = KuramotoState::new(theta, nu, kappa, alpha)?;
        for (label, which) in [("a", Subsystem::A), ("b", Subsystem::B)] {
            let dev = verify_reduction(&k, which, &plan)?;
            checks.push(Check::upper(s, format!("subsystem_{label}.kappa_{kappa}"), dev, REDUCTION_LIMIT));
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Conservation, Suite::Splitting, Suite::Reduction, Suite::Meanfield, Suite::All] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn small_meanfield_suite() {
        let c = meanfield(50, 1).unwrap();
        assert!(c.passed, "{c}");
    }

    #[test]
    fn check_display() {
        let c = Check::within(Suite::Splitting, "x.order", 4.1, 3.5, 4.5);
        assert_eq!(c.to_string(), "PASS splitting.x.order value=4.1000 range=[3.5, 4.5]");
        assert!(!Check::upper(Suite::Meanfield, "m", 2.0, 1.0).passed);
    }
}
