//! Hypothesis thresholds, guaranteed decay rates, the practical-aggregation
//! polynomials, and verdicts comparing them against recorded runs.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;

use rayon::prelude::*;

use crate::diagnostics::{omega_diameter, tail_sup, PairDiagnostics, PairMatrix};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::linalg::SkewHermitian;
use crate::model::{EnsembleState, ModelParams};

/// Multiplicative slack on exponential envelopes.
pub const ENVELOPE_RTOL: f64 = 1e-3;
/// Additive slack on exponential envelopes.
pub const ENVELOPE_ATOL: f64 = 1e-8;
/// Multiplicative slack on tail values against the lower polynomial root.
pub const TAIL_SLACK: f64 = 0.25;
/// Tolerance for treating `W1` as zero.
pub const ZERO_NORM_TOL: f64 = 1e-12;

const ROOT_GRID: f64 = 1e-3;
const ROOT_UPPER: f64 = 2.0;
const ROOT_XTOL: f64 = 1e-12;

/// `5^{1/4} / sqrt 2`, the frustration weight in every complex estimate.
fn frustration_weight() -> f64 {
    5f64.powf(0.25) / SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// Real sphere, identical frequencies: pairwise angle decay.
    P31,
    /// Real sphere, distinct frequencies: quadratic-root residual bound.
    T31,
    /// Complex sphere, `κ1 = 0`, identical frequencies: pairwise `J` decay.
    T41,
    /// Complex sphere, `κ1 = 0`, distinct frequencies: quartic-root residual bound.
    T42,
    /// Both couplings, identical frequencies, `W1 = 0`: decay of `J_M`.
    T51,
    /// Both couplings, general case: quartic-root residual bound.
    T52,
}

impl TheoremId {
    pub const ALL: [TheoremId; 6] = [Self::P31, Self::T31, Self::T41, Self::T42, Self::T51, Self::T52];

    pub fn label(self) -> &'static str {
        match self {
            Self::P31 => "real_complete",
            Self::T31 => "real_practical",
            Self::T41 => "complex_complete",
            Self::T42 => "complex_practical",
            Self::T51 => "full_complete",
            Self::T52 => "full_practical",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of comparing a trajectory against a guaranteed bound.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCheck {
    pub passed: bool,
    /// Largest `observed - allowed` over every checked point; `<= 0` passes.
    pub worst_margin: f64,
    pub points: usize,
    pub tolerance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeReport {
    pub theorem_id: TheoremId,
    pub hypothesis_satisfied: bool,
    pub threshold_value: f64,
    pub observed_initial: f64,
    pub predicted_rate: Option<f64>,
    pub roots: Option<(f64, f64)>,
    /// `None` when the bound does not apply to this run.
    pub envelope: Option<EnvelopeCheck>,
    /// Additional named quantities rendered alongside the report.
    pub extra: Vec<(String, f64)>,
    pub verdict_details: String,
}

impl GuaranteeReport {
    fn new(theorem_id: TheoremId, threshold_value: f64, observed_initial: f64) -> Self {
        Self {
            theorem_id,
            hypothesis_satisfied: false,
            threshold_value,
            observed_initial,
            predicted_rate: None,
            roots: None,
            envelope: None,
            extra: Vec::new(),
            verdict_details: String::new(),
        }
    }

    fn refused(theorem_id: TheoremId, why: &str) -> Self {
        let mut r = Self::new(theorem_id, f64::NAN, f64::NAN);
        r.verdict_details = format!("refused: {why}");
        r
    }

    /// False only when an envelope was checked and violated.
    pub fn passed(&self) -> bool {
        self.envelope.as_ref().is_none_or(|e| e.passed)
    }

    /// `key=value` lines prefixed by the theorem label.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let p = self.theorem_id.label();
        let mut out = vec![
            (format!("{p}.hypothesis_satisfied"), self.hypothesis_satisfied.to_string()),
            (format!("{p}.threshold"), fmt_f(self.threshold_value)),
            (format!("{p}.observed_initial"), fmt_f(self.observed_initial)),
            (
                format!("{p}.predicted_rate"),
                self.predicted_rate.map_or_else(|| "none".into(), fmt_f),
            ),
        ];
        match self.roots {
            Some((a, b)) => {
                out.push((format!("{p}.root_lower"), fmt_f(a)));
                out.push((format!("{p}.root_upper"), fmt_f(b)));
            }
            None => out.push((format!("{p}.roots"), "none".into())),
        }
        for (k, v) in &self.extra {
            out.push((format!("{p}.{k}"), fmt_f(*v)));
        }
        match &self.envelope {
            Some(e) => {
                out.push((format!("{p}.envelope"), if e.passed { "pass" } else { "fail" }.into()));
                out.push((format!("{p}.worst_margin"), fmt_f(e.worst_margin)));
                out.push((format!("{p}.points"), e.points.to_string()));
                out.push((format!("{p}.tolerance"), e.tolerance.clone()));
            }
            None => out.push((format!("{p}.envelope"), "not_applicable".into())),
        }
        out.push((format!("{p}.details"), self.verdict_details.clone()));
        out
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn real_norm(w: &SkewHermitian) -> Result<f64> {
    if !w.is_real() {
        return Err(Error::NotReal {
            what: "frustration",
            magnitude: w.matrix().max_imag(),
        });
    }
    Ok(w.frobenius_norm())
}

/// `arccot(||W||_F / sqrt 2)` in `(0, π/2]`.
pub fn threshold_p31(w: &SkewHermitian) -> Result<f64> {
    Ok(p31_angle(real_norm(w)?))
}

fn p31_angle(w_norm: f64) -> f64 {
    1f64.atan2(w_norm / SQRT_2)
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= n || j >= n {
        return Err(Error::InvalidParameter(format!("pair ({i},{j}) out of range for N = {n}")));
    }
    Ok(())
}

/// `Λ_ij = (κ/2N) Σ_k (cos θ_ik + cos θ_jk - (||W||/√2)(sin θ_ik + sin θ_jk))` at the initial angles.
pub fn rate_p31(theta: &PairMatrix, kappa: f64, w_norm: f64, i: usize, j: usize) -> Result<f64> {
    let n = theta.n();
    check_pair(n, i, j)?;
    let thr = p31_angle(w_norm);
    if let Some((t, (a, b))) = theta.max_off_diagonal() {
        if t >= thr {
            return Err(Error::HypothesisViolated {
                theorem: "real_complete",
                detail: format!("theta[{a},{b}] = {t} >= {thr}"),
            });
        }
    }
    let c = w_norm / SQRT_2;
    let sum: f64 = (0..n)
        .map(|k| {
            let (a, b) = (theta[(i, k)], theta[(j, k)]);
            a.cos() + b.cos() - c * (a.sin() + b.sin())
        })
        .sum();
    Ok(kappa / (2.0 * n as f64) * sum)
}

/// Roots `(s1, s2)` of `a s^2 - 2κ s + c0` with `a = (4 + 2√2 ||W||) κ`, when the discriminant is positive.
fn quad_roots(kappa: f64, c0: f64, w_norm: f64) -> Option<(f64, f64)> {
    if !(kappa > 0.0) {
        return None;
    }
    let a = (4.0 + 2.0 * SQRT_2 * w_norm) * kappa;
    let b = 2.0 * kappa;
    let disc = b * b - 4.0 * a * c0;
    if !(disc > 0.0) {
        return None;
    }
    let s2 = (b + disc.sqrt()) / (2.0 * a);
    Some((c0 / (a * s2), s2))
}

/// Roots of `p(s) = (4 + 2√2 ||W||_F) κ s^2 - 2κ s + D(Ω)/4`.
pub fn quad_roots_t31(kappa: f64, d_omega: f64, w_norm: f64) -> Option<(f64, f64)> {
    quad_roots(kappa, d_omega / 4.0, w_norm)
}

/// Roots of `(4 + 2√2 ||W||_F) κ s^2 - 2κ s + D(Ω)/√2`, twice the comparison
/// inequality `ṡ <= D/(2√2) - κ s (1 - (2 + √2 ||W||_F) s)` for `s = sin(θ_M/2)`.
/// Its lower root is roughly `2√2` times that of [`quad_roots_t31`], and it is
/// the one the envelope check uses.
pub fn quad_roots_t31_bound(kappa: f64, d_omega: f64, w_norm: f64) -> Option<(f64, f64)> {
    quad_roots(kappa, d_omega / SQRT_2, w_norm)
}

/// `2√2 / (sqrt(√5 ||W0||^2 + 8) + 5^{1/4} ||W0||)`.
pub fn threshold_t41(w0_norm: f64) -> f64 {
    threshold_scaled(w0_norm, 1.0)
}

fn threshold_scaled(w0_norm: f64, a: f64) -> f64 {
    2.0 * SQRT_2 * a / ((5f64.sqrt() * w0_norm * w0_norm + 8.0 * a).sqrt() + 5f64.powf(0.25) * w0_norm)
}

/// `Λ_ij = (κ0/2N) Σ_k (2 - J_ik^2 - J_jk^2 - (5^{1/4}/√2)||W0|| (J_ik + J_jk))` at the initial functional.
pub fn rate_t41(j_in: &PairMatrix, kappa0: f64, w0_norm: f64, i: usize, j: usize) -> Result<f64> {
    let n = j_in.n();
    check_pair(n, i, j)?;
    let thr = threshold_t41(w0_norm);
    if let Some((v, (a, b))) = j_in.max_off_diagonal() {
        if v >= thr {
            return Err(Error::HypothesisViolated {
                theorem: "complex_complete",
                detail: format!("J[{a},{b}] = {v} >= {thr}"),
            });
        }
    }
    let c = frustration_weight() * w0_norm;
    let sum: f64 = (0..n)
        .map(|k| {
            let (a, b) = (j_in[(i, k)], j_in[(j, k)]);
            2.0 - a * a - b * b - c * (a + b)
        })
        .sum();
    Ok(kappa0 / (2.0 * n as f64) * sum)
}

/// Coefficients `[c0, c1, c2, c3, c4]` of the practical-aggregation quartic.
pub fn quartic_coefficients(kappa0: f64, kappa1: f64, d_omega: f64, w0_norm: f64, w1_norm: f64) -> [f64; 5] {
    let c = frustration_weight() * w0_norm;
    [
        0.75 * SQRT_2 * d_omega,
        kappa1 * SQRT_2 * w1_norm,
        2.0 * kappa1 - kappa0,
        kappa0 * c,
        kappa0,
    ]
}

/// Horner evaluation of `Σ c_k x^k`.
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Sum of coefficient magnitudes, the scale for residual checks.
pub fn poly_scale(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c.abs()).sum::<f64>().max(f64::MIN_POSITIVE)
}

fn bisect(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = eval_poly(coeffs, lo);
    while hi - lo > ROOT_XTOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = eval_poly(coeffs, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First downward and subsequent upward crossing of zero on `[0, 2]`.
fn dip_roots(coeffs: &[f64]) -> Option<(f64, f64)> {
    let steps = (ROOT_UPPER / ROOT_GRID).round() as usize;
    let at = |k: usize| k as f64 * ROOT_GRID;
    let root_in = |k: usize, cur: f64| if cur == 0.0 { at(k) } else { bisect(coeffs, at(k - 1), at(k)) };
    let mut lower = None;
    let mut prev = eval_poly(coeffs, 0.0);
    for k in 1..=steps {
        let cur = eval_poly(coeffs, at(k));
        match lower {
            // without a constant or linear term p vanishes at 0 and dips at once
            None if k == 1 && prev == 0.0 && cur < 0.0 => lower = Some(0.0),
            None if prev > 0.0 && cur <= 0.0 => lower = Some(root_in(k, cur)),
            Some(lo) if prev < 0.0 && cur >= 0.0 => return Some((lo, root_in(k, cur))),
            _ => {}
        }
        prev = cur;
    }
    None
}

/// `(J-, J+)` of `p(J) = κ0 J^2 (J^2 + (5^{1/4}/√2)||W0|| J - 1) + (3√2/4) D(Ω)`.
pub fn quartic_roots_t42(kappa0: f64, d_omega: f64, w0_norm: f64) -> Option<(f64, f64)> {
    quartic_roots_t52(kappa0, 0.0, d_omega, w0_norm, 0.0)
}

/// `(J-, J+)` of the quartic above plus `κ1 J (2J + √2 ||W1||)`.
pub fn quartic_roots_t52(kappa0: f64, kappa1: f64, d_omega: f64, w0_norm: f64, w1_norm: f64) -> Option<(f64, f64)> {
    if !(kappa0 > 0.0) {
        return None;
    }
    dip_roots(&quartic_coefficients(kappa0, kappa1, d_omega, w0_norm, w1_norm))
}

/// The identical-ensemble threshold with `a = 1 - 2κ1/κ0` in place of 1.
pub fn threshold_t51(w0_norm: f64, kappa0: f64, kappa1: f64) -> Result<f64> {
    if !(kappa0 > 2.0 * kappa1 && kappa1 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need kappa0 > 2 kappa1 >= 0, got kappa0 = {kappa0}, kappa1 = {kappa1}"
        )));
    }
    Ok(threshold_scaled(w0_norm, 1.0 - 2.0 * kappa1 / kappa0))
}

/// `Λ~ = κ0 (1 - 2κ1/κ0 - J_M^2 - (5^{1/4}/√2)||W0|| J_M)`.
pub fn rate_t51(j_m_in: f64, kappa0: f64, kappa1: f64, w0_norm: f64) -> Result<f64> {
    let thr = threshold_t51(w0_norm, kappa0, kappa1)?;
    if j_m_in >= thr {
        return Err(Error::HypothesisViolated {
            theorem: "full_complete",
            detail: format!("J_M(0) = {j_m_in} >= {thr}"),
        });
    }
    let c = frustration_weight() * w0_norm;
    Ok(kappa0 * (1.0 - 2.0 * kappa1 / kappa0 - j_m_in * j_m_in - c * j_m_in))
}

/// Initial-data threshold on `J_M` for the theorem governing these parameters:
/// the full-model bound when it applies, otherwise the complex-sphere one.
pub fn complex_init_threshold(params: &ModelParams) -> Result<f64> {
    if params.frustration_override().is_some() {
        return Err(Error::OverriddenFrustration("initial-data threshold"));
    }
    let w0 = params.w0().frobenius_norm();
    let (k0, k1) = (params.kappa0(), params.kappa1());
    if k1 > 0.0 && k0 > 2.0 * k1 && params.w1().frobenius_norm() <= ZERO_NORM_TOL && params.identical_omega() {
        threshold_t51(w0, k0, k1)
    } else {
        Ok(threshold_t41(w0))
    }
}

/// Initial-data threshold on `J_M` for a real run, from the angle condition
/// of the identical or heterogeneous real theorem via `J = sqrt(1 - cos θ)`.
pub fn real_init_threshold(params: &ModelParams) -> Result<f64> {
    if params.frustration_override().is_some() {
        return Err(Error::OverriddenFrustration("initial-data threshold"));
    }
    let w = real_norm(params.w0())?;
    let theta = if params.identical_omega() {
        p31_angle(w)
    } else {
        (1.0 / (2.0 + SQRT_2 * w)).asin()
    };
    Ok((1.0 - theta.cos()).sqrt())
}

/// Options shared by every envelope check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tail_fraction: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tail_fraction: crate::diagnostics::DEFAULT_TAIL_FRACTION,
        }
    }
}

/// Verdicts for every theorem applicable to `params`, checked against `trajectory`.
pub fn check_run(
    params: &ModelParams,
    init: &EnsembleState,
    trajectory: &Trajectory,
    opts: CheckOptions,
) -> Result<Vec<GuaranteeReport>> {
    let first = trajectory
        .states
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let offset = if first.n() == init.n() && first.dim() == init.dim() {
        first.z.iter().zip(&init.z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    if offset > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "trajectory does not start from the given initial state (offset {offset:.3e})"
        )));
    }
    let diags: Vec<PairDiagnostics> = trajectory.states.par_iter().map(PairDiagnostics::compute).collect();
    check_diagnostics(params, &trajectory.times, &diags, opts)
}

/// As [`check_run`], from diagnostics already computed per snapshot.
pub fn check_diagnostics(
    params: &ModelParams,
    times: &[f64],
    diags: &[PairDiagnostics],
    opts: CheckOptions,
) -> Result<Vec<GuaranteeReport>> {
    if diags.is_empty() || times.len() != diags.len() {
        return Err(Error::InvalidParameter(format!(
            "need one diagnostic per time, got {} times and {} snapshots",
            times.len(),
            diags.len()
        )));
    }
    let mut monitor = GuaranteeMonitor::new(params, times[0], &diags[0], opts)?;
    for (t, d) in times.iter().zip(diags).skip(1) {
        monitor.observe(*t, d);
    }
    monitor.finish()
}

/// Streaming verdicts: built from the initial snapshot, fed every later one,
/// so a run never has to keep its pairwise matrices in memory.
#[derive(Debug, Clone)]
pub struct GuaranteeMonitor {
    pending: Vec<Pending>,
    opts: CheckOptions,
    t0: f64,
    times: Vec<f64>,
    j_m: Vec<f64>,
    theta_m: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Pending {
    report: GuaranteeReport,
    pairwise: Option<Pairwise>,
    finish: Finish,
}

#[derive(Debug, Clone)]
struct Pairwise {
    rates: PairMatrix,
    initial: PairMatrix,
    on_theta: bool,
    worst: f64,
    points: usize,
}

#[derive(Debug, Clone, Copy)]
enum Finish {
    None,
    Pairwise,
    RealPractical { s0: f64, s1: f64 },
    Exponential { j_m0: f64, rate: f64 },
    Practical { j_m0: f64, lower: f64 },
}

impl GuaranteeMonitor {
    pub fn new(params: &ModelParams, t0: f64, initial: &PairDiagnostics, opts: CheckOptions) -> Result<Self> {
        if params.n() != initial.j.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                found: initial.j.n(),
            });
        }
        let ids = applicable(params, initial.theta.is_some());
        let pending = if params.frustration_override().is_some() {
            ids.into_iter()
                .map(|id| Pending {
                    report: GuaranteeReport::refused(id, "frustration override replaces I + W"),
                    pairwise: None,
                    finish: Finish::None,
                })
                .collect()
        } else {
            let d_omega = omega_diameter(params);
            ids.into_iter()
                .map(|id| setup(id, params, d_omega, initial))
                .collect::<Result<_>>()?
        };
        let mut m = Self {
            pending,
            opts,
            t0,
            times: Vec::new(),
            j_m: Vec::new(),
            theta_m: Vec::new(),
        };
        m.observe(t0, initial);
        Ok(m)
    }

    pub fn observe(&mut self, t: f64, d: &PairDiagnostics) {
        self.times.push(t);
        self.j_m.push(d.j_m);
        self.theta_m.push(d.theta_m.unwrap_or(f64::NAN));
        let elapsed = t - self.t0;
        for p in &mut self.pending {
            if let Some(pw) = &mut p.pairwise {
                let cur = if pw.on_theta {
                    d.theta.as_ref().expect("real run has angles")
                } else {
                    &d.j
                };
                let n = cur.n();
                for i in 0..n {
                    for j in (i + 1)..n {
                        let allowed = exp_allowed(pw.initial[(i, j)], pw.rates[(i, j)], elapsed);
                        pw.worst = pw.worst.max(cur[(i, j)] - allowed);
                        pw.points += 1;
                    }
                }
            }
        }
    }

    /// Hypotheses, thresholds, rates and roots as set up from the initial
    /// snapshot; envelopes are filled in only by [`Self::finish`].
    pub fn initial_reports(&self) -> Vec<GuaranteeReport> {
        self.pending.iter().map(|p| p.report.clone()).collect()
    }

    pub fn finish(self) -> Result<Vec<GuaranteeReport>> {
        let Self {
            pending,
            opts,
            t0,
            times,
            j_m,
            theta_m,
        } = self;
        pending
            .into_iter()
            .map(|p| {
                let mut r = p.report;
                match p.finish {
                    Finish::None => {}
                    Finish::Pairwise => {
                        let pw = p.pairwise.expect("pairwise tracker present");
                        r.envelope = Some(EnvelopeCheck {
                            passed: pw.worst <= 0.0,
                            worst_margin: pw.worst,
                            points: pw.points,
                            tolerance: exp_tol(),
                        });
                    }
                    Finish::RealPractical { s0, s1 } => {
                        let ceiling = s0.max(s1) * (1.0 + ENVELOPE_RTOL) + ENVELOPE_ATOL;
                        let s: Vec<f64> = theta_m.iter().map(|t| (t / 2.0).sin()).collect();
                        let sup_margin = max_of(s.iter().map(|x| x - ceiling));
                        let angle_margin = max_of(theta_m.iter().map(|t| t - FRAC_PI_2));
                        let tail = tail_sup(&times, &s, opts.tail_fraction)?;
                        let tail_margin = tail - (1.0 + TAIL_SLACK) * s1;
                        r.extra.push(("tail_sin_half_angle".into(), tail));
                        r.extra.push(("max_angle".into(), max_of(theta_m.iter().copied())));
                        r.envelope = Some(EnvelopeCheck {
                            passed: sup_margin <= 0.0 && angle_margin < 0.0 && tail_margin <= 0.0,
                            worst_margin: sup_margin.max(angle_margin).max(tail_margin),
                            points: 2 * s.len() + 1,
                            tolerance: format!("{},tail_slack={TAIL_SLACK}", exp_tol()),
                        });
                    }
                    Finish::Exponential { j_m0, rate } => {
                        let worst = max_of(
                            j_m.iter().zip(&times).map(|(v, t)| v - exp_allowed(j_m0, rate, t - t0)),
                        );
                        r.envelope = Some(EnvelopeCheck {
                            passed: worst <= 0.0,
                            worst_margin: worst,
                            points: j_m.len(),
                            tolerance: exp_tol(),
                        });
                    }
                    Finish::Practical { j_m0, lower } => {
                        let ceiling = j_m0.max(lower) * (1.0 + ENVELOPE_RTOL) + ENVELOPE_ATOL;
                        let sup_margin = max_of(j_m.iter().map(|x| x - ceiling));
                        let tail = tail_sup(&times, &j_m, opts.tail_fraction)?;
                        let tail_margin = tail - (1.0 + TAIL_SLACK) * lower;
                        r.envelope = Some(EnvelopeCheck {
                            passed: sup_margin <= 0.0 && tail_margin <= 0.0,
                            worst_margin: sup_margin.max(tail_margin),
                            points: j_m.len() + 1,
                            tolerance: format!("{},tail_slack={TAIL_SLACK}", exp_tol()),
                        });
                    }
                }
                if matches!(r.theorem_id, TheoremId::T42 | TheoremId::T52) {
                    r.extra.push(("tail_sup_J_M".into(), tail_sup(&times, &j_m, opts.tail_fraction)?));
                    r.extra.push(("tail_fraction".into(), opts.tail_fraction));
                }
                Ok(r)
            })
            .collect()
    }
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

fn applicable(params: &ModelParams, real_state: bool) -> Vec<TheoremId> {
    let hetero = !params.identical_omega();
    if params.kappa1() > 0.0 {
        let mut v = vec![TheoremId::T51];
        if hetero || params.w1().frobenius_norm() > ZERO_NORM_TOL {
            v.push(TheoremId::T52);
        }
        v
    } else if real_state && params.is_real() {
        vec![if hetero { TheoremId::T31 } else { TheoremId::P31 }]
    } else {
        vec![if hetero { TheoremId::T42 } else { TheoremId::T41 }]
    }
}

fn exp_tol() -> String {
    format!("rtol={ENVELOPE_RTOL:e},atol={ENVELOPE_ATOL:e}")
}

fn exp_allowed(initial: f64, rate: f64, t: f64) -> f64 {
    initial * (-rate * t).exp() * (1.0 + ENVELOPE_RTOL) + ENVELOPE_ATOL
}

fn min_off_diagonal(m: &PairMatrix) -> Option<f64> {
    m.map(|x| -x).max_off_diagonal().map(|(v, _)| -v)
}

fn no_envelope(report: GuaranteeReport) -> Pending {
    Pending {
        report,
        pairwise: None,
        finish: Finish::None,
    }
}

fn setup(id: TheoremId, params: &ModelParams, d_omega: f64, d0: &PairDiagnostics) -> Result<Pending> {
    let n = params.n();
    let w0 = params.w0().frobenius_norm();
    let (k0, k1) = (params.kappa0(), params.kappa1());
    match id {
        TheoremId::P31 => {
            let w = real_norm(params.w0())?;
            let theta0 = d0.theta.as_ref().ok_or(Error::NotReal {
                what: "state",
                magnitude: f64::NAN,
            })?;
            let thr = p31_angle(w);
            let theta_m0 = d0.theta_m.unwrap_or(0.0);
            let mut r = GuaranteeReport::new(id, thr, theta_m0);
            if theta_m0 >= thr {
                r.verdict_details = format!("max initial angle {theta_m0} not below {thr}");
                return Ok(no_envelope(r));
            }
            r.hypothesis_satisfied = true;
            let rates = pair_rates(n, |i, j| rate_p31(theta0, k0, w, i, j))?;
            r.predicted_rate = min_off_diagonal(&rates);
            r.verdict_details = "pairwise angle envelope".into();
            Ok(Pending {
                report: r,
                pairwise: Some(Pairwise {
                    rates,
                    initial: theta0.clone(),
                    on_theta: true,
                    worst: f64::NEG_INFINITY,
                    points: 0,
                }),
                finish: Finish::Pairwise,
            })
        }
        TheoremId::T31 => {
            let w = real_norm(params.w0())?;
            let theta0 = d0.theta.as_ref().ok_or(Error::NotReal {
                what: "state",
                magnitude: f64::NAN,
            })?;
            let theta_m0 = d0.theta_m.unwrap_or(0.0);
            let max_sin = theta0.map(f64::sin).max_off_diagonal().map_or(0.0, |(v, _)| v);
            let thr = 1.0 / (2.0 + SQRT_2 * w);
            let mut r = GuaranteeReport::new(id, thr, max_sin);
            r.roots = quad_roots_t31(k0, d_omega, w);
            let bound = quad_roots_t31_bound(k0, d_omega, w);
            if let Some((s1, s2)) = bound {
                r.extra.push(("bound_root_lower".into(), s1));
                r.extra.push(("bound_root_upper".into(), s2));
            }
            r.extra.push(("D_omega".into(), d_omega));
            let mut notes = Vec::new();
            if r.roots.is_none() && k0 > d_omega * (2.0 + 2.0 * SQRT_2 * w) / 4.0 {
                notes.push("coupling meets the prose condition but not the discriminant condition".to_string());
            }
            r.hypothesis_satisfied = max_sin < thr && theta_m0 < FRAC_PI_2;
            let mut finish = Finish::None;
            if !r.hypothesis_satisfied {
                notes.push(format!("max sin = {max_sin}, max angle = {theta_m0}"));
            } else {
                let s0 = (theta_m0 / 2.0).sin();
                match bound {
                    Some((s1, s2)) if s0 < s2 => {
                        finish = Finish::RealPractical { s0, s1 };
                        notes.push("max angle below pi/2, sin(theta_M/2) below max(s(0), s1), tail below s1".into());
                    }
                    _ => notes.push("comparison roots absent or s(0) >= s2: no envelope".into()),
                }
            }
            r.verdict_details = notes.join("; ");
            Ok(Pending {
                report: r,
                pairwise: None,
                finish,
            })
        }
        TheoremId::T41 => {
            let thr = threshold_t41(w0);
            let mut r = GuaranteeReport::new(id, thr, d0.j_m);
            if d0.j_m >= thr {
                r.verdict_details = format!("J_M(0) = {} not below {thr}", d0.j_m);
                return Ok(no_envelope(r));
            }
            r.hypothesis_satisfied = true;
            let rates = pair_rates(n, |i, j| rate_t41(&d0.j, k0, w0, i, j))?;
            r.predicted_rate = min_off_diagonal(&rates);
            r.verdict_details = "pairwise J envelope".into();
            Ok(Pending {
                report: r,
                pairwise: Some(Pairwise {
                    rates,
                    initial: d0.j.clone(),
                    on_theta: false,
                    worst: f64::NEG_INFINITY,
                    points: 0,
                }),
                finish: Finish::Pairwise,
            })
        }
        TheoremId::T51 => {
            let w1 = params.w1().frobenius_norm();
            let thr = threshold_t51(w0, k0, k1).unwrap_or(f64::NAN);
            let mut r = GuaranteeReport::new(id, thr, d0.j_m);
            let mut why = Vec::new();
            if !(k0 > 2.0 * k1) {
                why.push(format!("kappa0 = {k0} not above 2 kappa1 = {}", 2.0 * k1));
            }
            if w1 > ZERO_NORM_TOL {
                why.push(format!("||W1|| = {w1} nonzero"));
            }
            if !params.identical_omega() {
                why.push(format!("D(Omega) = {d_omega} nonzero"));
            }
            if thr.is_finite() && d0.j_m >= thr {
                why.push(format!("J_M(0) = {} not below {thr}", d0.j_m));
            }
            if !why.is_empty() {
                r.verdict_details = format!("hypothesis not satisfied: {}", why.join("; "));
                return Ok(no_envelope(r));
            }
            r.hypothesis_satisfied = true;
            let rate = rate_t51(d0.j_m, k0, k1, w0)?;
            r.predicted_rate = Some(rate);
            r.verdict_details = "J_M exponential envelope".into();
            Ok(Pending {
                report: r,
                pairwise: None,
                finish: Finish::Exponential { j_m0: d0.j_m, rate },
            })
        }
        TheoremId::T42 | TheoremId::T52 => {
            let (k1, w1) = if id == TheoremId::T52 {
                (k1, params.w1().frobenius_norm())
            } else {
                (0.0, 0.0)
            };
            let thr = threshold_t41(w0);
            let j_m0 = d0.j_m;
            let mut r = GuaranteeReport::new(id, thr, j_m0);
            r.roots = quartic_roots_t52(k0, k1, d_omega, w0, w1);
            r.extra.push(("D_omega".into(), d_omega));
            r.hypothesis_satisfied = j_m0 < thr;
            let mut finish = Finish::None;
            r.verdict_details = match r.roots {
                _ if !r.hypothesis_satisfied => format!("J_M(0) = {j_m0} not below {thr}"),
                Some((lower, upper)) if j_m0 < upper => {
                    finish = Finish::Practical { j_m0, lower };
                    "J_M below max(J_M(0), J-) throughout, tail below J-".into()
                }
                Some((_, upper)) => format!("J_M(0) = {j_m0} not below J+ = {upper}: no envelope at this coupling"),
                None => "quartic has no positive dip at this coupling: no envelope".into(),
            };
            Ok(Pending {
                report: r,
                pairwise: None,
                finish,
            })
        }
    }
}

fn pair_rates(n: usize, f: impl Fn(usize, usize) -> Result<f64>) -> Result<PairMatrix> {
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push(f(i, j)?);
        }
    }
    Ok(PairMatrix::from_fn(n, |i, j| v[i * n + j]))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::linalg::CMatrix;

    fn skew_with_norm(norm: f64) -> SkewHermitian {
        // [[0, -a], [a, 0]] has Frobenius norm sqrt(2) a
        let a = norm / SQRT_2;
        SkewHermitian::new(CMatrix::from_real_rows(&[&[0.0, -a], &[a, 0.0]]).unwrap()).unwrap()
    }

    #[test]
    fn p31_threshold_values() {
        assert_eq!(threshold_p31(&SkewHermitian::zero(3)).unwrap(), FRAC_PI_2);
        assert!((threshold_p31(&skew_with_norm(SQRT_2)).unwrap() - FRAC_PI_4).abs() < 1e-15);
        // arccot(0.2/sqrt 2) = 1.43030662... (50-digit evaluation)
        assert!((threshold_p31(&skew_with_norm(0.2)).unwrap() - 1.430_306_625_041_376_3).abs() < 1e-14);
        let complex = SkewHermitian::new(CMatrix::identity(2).scale(num_complex::Complex64::new(0.0, 1.0))).unwrap();
        assert!(threshold_p31(&complex).is_err());
    }

    #[test]
    fn p31_rates() {
        let zeros = PairMatrix::from_fn(4, |_, _| 0.0);
        assert!((rate_p31(&zeros, 2.0, 0.3, 0, 1).unwrap() - 2.0).abs() < 1e-15);
        let third = PairMatrix::from_fn(4, |i, j| if i == j { 0.0 } else { FRAC_PI_3 });
        // the diagonal contributes cos 0 = 1 for k = i and k = j
        let want = 1.5 / 8.0 * (2.0 * 1.0 + 6.0 * 0.5);
        assert!((rate_p31(&third, 1.5, 0.0, 0, 1).unwrap() - want).abs() < 1e-15);
        let too_wide = PairMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.6 });
        assert!(matches!(rate_p31(&too_wide, 1.0, 0.0, 0, 1), Err(Error::HypothesisViolated { .. })));
    }

    #[test]
    fn t31_roots() {
        let (s1, s2) = quad_roots_t31(3.0, 0.0, 0.4).unwrap();
        assert_eq!(s1, 0.0);
        assert!((s2 - 1.0 / (2.0 + SQRT_2 * 0.4)).abs() < 1e-15);
        assert!((quad_roots_t31(1.0, 0.0, 0.0).unwrap().1 - 0.5).abs() < 1e-15);
        let (k, d, w) = (10.0, 1.0, 0.1);
        let a = (4.0 + 2.0 * SQRT_2 * w) * k;
        let disc: f64 = 4.0 * k * k - k * (4.0 + 2.0 * SQRT_2 * w) * d;
        let (r1, r2) = ((2.0 * k - disc.sqrt()) / (2.0 * a), (2.0 * k + disc.sqrt()) / (2.0 * a));
        let (s1, s2) = quad_roots_t31(k, d, w).unwrap();
        assert!((s1 - r1).abs() < 1e-12 && (s2 - r2).abs() < 1e-12);
        assert!(0.0 < s1 && s1 < s2);
        assert!(quad_roots_t31(0.5, 1.0, 0.0).is_none());
        let (s1, s2) = quad_roots_t31(1e8, 1.0, 0.1).unwrap();
        assert!(s1 < 1e-8 && (s2 - 1.0 / (2.0 + SQRT_2 * 0.1)).abs() < 1e-8);
        let (b1, b2) = quad_roots_t31_bound(k, d, w).unwrap();
        let residual = (4.0 + 2.0 * SQRT_2 * w) * k * b1 * b1 - 2.0 * k * b1 + d / SQRT_2;
        assert!(residual.abs() < 1e-12 && b1 > r1 && b2 < r2);
    }

    #[test]
    fn t41_threshold_values() {
        assert!((threshold_t41(0.0) - 1.0).abs() < 1e-15);
        // 2 sqrt 2 / (sqrt(sqrt 5 + 8) + 5^{1/4}) = 0.60246... (50-digit evaluation)
        assert!((threshold_t41(1.0) - 0.602_467_981_714_902).abs() < 1e-14);
        let mut prev = threshold_t41(0.0);
        for k in 1..=1000 {
            let cur = threshold_t41(k as f64 * 0.05);
            assert!(cur < prev);
            prev = cur;
        }
        assert!(threshold_t41(1e6) < 1e-5);
    }

    #[test]
    fn t41_rates() {
        let zeros = PairMatrix::from_fn(5, |_, _| 0.0);
        assert!((rate_t41(&zeros, 3.0, 0.7, 1, 2).unwrap() - 3.0).abs() < 1e-15);
        let half = PairMatrix::from_fn(5, |_, _| 0.5);
        assert!((rate_t41(&half, 4.0, 0.0, 0, 3).unwrap() - 3.0).abs() < 1e-15);
        let wide = PairMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 0.99 });
        assert!(rate_t41(&wide, 1.0, 0.5, 0, 1).is_err());
    }

    #[test]
    fn t42_roots() {
        let w = 0.3;
        let c = frustration_weight() * w;
        let (lo, hi) = quartic_roots_t42(5.0, 0.0, w).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (-c + (c * c + 4.0).sqrt()) / 2.0).abs() < 1e-11);
        let (lo, hi) = quartic_roots_t42(5.0, 0.0, 0.0).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 1.0).abs() < 1e-11);
        let lows: Vec<f64> = [10.0, 40.0, 160.0]
            .iter()
            .map(|&k| quartic_roots_t42(k, 1.0, 0.0).unwrap().0)
            .collect();
        for pair in lows.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
        }
        assert!(quartic_roots_t42(1.0, 5.0, 0.1).is_none());
        assert!(quartic_roots_t42(0.0, 1.0, 0.1).is_none());
    }

    #[test]
    fn roots_are_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut found = 0;
        for _ in 0..500 {
            let k0 = rng.random_range(0.5..50.0);
            let k1 = rng.random_range(0.0..2.0);
            let d = rng.random_range(0.0..3.0);
            let w0 = rng.random_range(0.0..1.0);
            let w1 = rng.random_range(0.0..1.0);
            let coeffs = quartic_coefficients(k0, k1, d, w0, w1);
            if let Some((lo, hi)) = quartic_roots_t52(k0, k1, d, w0, w1) {
                found += 1;
                assert!(0.0 <= lo && lo < hi && hi <= 2.0);
                for x in [lo, hi] {
                    assert!(eval_poly(&coeffs, x).abs() <= 1e-10 * poly_scale(&coeffs));
                }
                assert!(eval_poly(&coeffs, 0.5 * (lo + hi)) < 0.0);
            }
            if let Some((s1, s2)) = quad_roots_t31(k0, d, w0) {
                let q = [d / 4.0, -2.0 * k0, (4.0 + 2.0 * SQRT_2 * w0) * k0];
                for x in [s1, s2] {
                    assert!(eval_poly(&q, x).abs() <= 1e-10 * poly_scale(&q));
                }
            }
        }
        assert!(found > 50);
    }

    #[test]
    fn t51_threshold_and_rate() {
        for w in [0.0, 0.3, 1.2] {
            assert!((threshold_t51(w, 3.0, 0.0).unwrap() - threshold_t41(w)).abs() < 1e-15);
        }
        assert!((threshold_t51(0.0, 4.0, 1.0).unwrap() - SQRT_2 / 2.0).abs() < 1e-15);
        assert!(threshold_t51(0.2, 4.0, 2.0 - 1e-9).unwrap() < 1e-4);
        assert!(threshold_t51(0.2, 4.0, 2.0).is_err());
        let mut prev = 0.0;
        for k in 1..100 {
            let cur = threshold_t51(0.2, 2.0 + 0.1 * k as f64, 1.0).unwrap();
            assert!(cur > prev);
            prev = cur;
        }
        assert!((rate_t51(0.0, 3.0, 0.0, 0.4).unwrap() - 3.0).abs() < 1e-15);
        assert!((rate_t51(0.5, 4.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(rate_t51(0.8, 4.0, 1.0, 0.0), Err(Error::HypothesisViolated { .. })));
        assert!(rate_t51(0.1, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn t52_reduces_and_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let k0 = rng.random_range(1.0..40.0);
            let d = rng.random_range(0.0..1.0);
            let w0 = rng.random_range(0.0..0.5);
            assert_eq!(quartic_roots_t52(k0, 0.0, d, w0, 0.7), quartic_roots_t42(k0, d, w0));
        }
        assert_eq!(quartic_roots_t52(3.0, 0.0, 0.0, 0.0, 0.0).map(|r| r.0), Some(0.0));
        let scaled: Vec<f64> = [50.0, 100.0, 200.0, 400.0, 800.0]
            .iter()
            .map(|&k| quartic_roots_t52(k, 1.0, 0.8, 0.2, 0.2).unwrap().0 * k.sqrt())
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(lo > 0.1 && hi < 10.0 && hi / lo < 2.0, "{scaled:?}");
        let (_, hi) = quartic_roots_t52(1e7, 1.0, 0.5, 0.2, 0.2).unwrap();
        assert!((hi - threshold_t41(0.2)).abs() < 1e-5);
    }
}
