//! Pairwise observables: angles, correlations, the aggregation functional
//! `J_ij = ((1 - R_ij)^2 + I_ij^2)^{1/4}`, diameters and cross-ratios.
//!
//! The free functions evaluate exactly what they are given.
//! [`PairDiagnostics::compute`] first projects each particle radially onto
//! the unit sphere, so integrator norm drift (reported separately) does not
//! show up as a spurious pairwise separation once `1 - R_ij` falls below the
//! drift level.

use std::f64::consts::SQRT_2;
use std::ops::Index;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{inner_unchecked, CVector};
use crate::model::{centroid, EnsembleState, ModelParams};

/// Imaginary-part tolerance for treating a state as real.
pub const REAL_TOL: f64 = 1e-10;
/// Minimum denominator magnitude for a cross-ratio quadruple.
pub const GENERAL_POSITION_TOL: f64 = 1e-10;
/// Default fraction of the run used to estimate a limsup.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;

/// Dense `N x N` real matrix indexed by particle pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    n: usize,
    data: Vec<f64>,
}

impl PairMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest entry over `i < j`, ties to the lexicographically first pair.
    pub fn max_off_diagonal(&self) -> Option<(f64, (usize, usize))> {
        let mut best: Option<(f64, (usize, usize))> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self[(i, j)];
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, (i, j)));
                }
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl Index<(usize, usize)> for PairMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

fn check_real(state: &EnsembleState) -> Result<()> {
    let imag = state.max_imag();
    if imag > REAL_TOL {
        return Err(Error::NotReal {
            what: "state",
            magnitude: imag,
        });
    }
    Ok(())
}

/// `θ_ij = arccos <x_i, x_j>` for a real state, inner products clamped to `[-1, 1]`.
pub fn pair_angles(state: &EnsembleState) -> Result<PairMatrix> {
    check_real(state)?;
    let z = &state.z;
    Ok(PairMatrix::from_fn(state.n(), |i, j| {
        if i == j {
            0.0
        } else {
            inner_unchecked(&z[i], &z[j]).re.clamp(-1.0, 1.0).acos()
        }
    }))
}

/// `R_ij = Re <z_i, z_j>`, `I_ij = Im <z_i, z_j>`.
pub fn correlations(state: &EnsembleState) -> (PairMatrix, PairMatrix) {
    let n = state.n();
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        g[i * n + i] = Complex64::new(state.z[i].norm_sqr(), 0.0);
        for j in (i + 1)..n {
            let w = inner_unchecked(&state.z[i], &state.z[j]);
            g[i * n + j] = w;
            g[j * n + i] = w.conj();
        }
    }
    (
        PairMatrix::from_fn(n, |i, j| g[i * n + j].re),
        PairMatrix::from_fn(n, |i, j| g[i * n + j].im),
    )
}

/// Entrywise `J_ij = ((1 - R_ij)^2 + I_ij^2)^{1/4}`, zero on the diagonal.
pub fn agg_functional(r: &PairMatrix, im: &PairMatrix) -> PairMatrix {
    PairMatrix::from_fn(r.n(), |i, j| {
        if i == j {
            0.0
        } else {
            let a = 1.0 - r[(i, j)];
            let b = im[(i, j)];
            (a * a + b * b).sqrt().sqrt()
        }
    })
}

/// `J_M = max_{i<j} J_ij` with its pair; `(0, None)` when `N < 2`.
pub fn max_functional(j: &PairMatrix) -> (f64, Option<(usize, usize)>) {
    match j.max_off_diagonal() {
        Some((v, pair)) => (v, Some(pair)),
        None => (0.0, None),
    }
}

/// `max_{i,j} ||z_i - z_j||`.
pub fn diameter(state: &EnsembleState) -> f64 {
    let z = &state.z;
    let mut best = 0.0f64;
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            best = best.max((&z[i] - &z[j]).norm());
        }
    }
    best
}

/// `D(Ω) = max_{i,j} ||Ω_i - Ω_j||_F`.
pub fn omega_diameter(params: &ModelParams) -> f64 {
    let om = params.omega();
    let mut best = 0.0f64;
    for i in 0..om.len() {
        for j in (i + 1)..om.len() {
            best = best.max((om[i].matrix() - om[j].matrix()).frobenius_norm());
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossRatio {
    pub value: Complex64,
    pub indices: [usize; 4],
}

/// `1 - <u, v>` for unit vectors, evaluated through `v - u`:
/// `||v - u||^2 / 2 - i Im <u, v - u>`. Unlike the direct form this keeps full
/// relative accuracy as the pair coalesces.
pub fn sphere_gap(u: &CVector, v: &CVector) -> Complex64 {
    let d = v - u;
    Complex64::new(0.5 * d.norm_sqr(), -inner_unchecked(u, &d).im)
}

/// `C_ijkl = (1 - <z_i,z_j>)(1 - <z_k,z_l>) / ((1 - <z_i,z_l>)(1 - <z_k,z_j>))`.
pub fn cross_ratio(state: &EnsembleState, indices: [usize; 4]) -> Result<CrossRatio> {
    let [i, j, k, l] = indices;
    let n = state.n();
    if indices.iter().any(|&x| x >= n) {
        return Err(Error::InvalidParameter(format!(
            "cross-ratio index out of range for N = {n}: {indices:?}"
        )));
    }
    for a in 0..4 {
        for b in (a + 1)..4 {
            if indices[a] == indices[b] {
                return Err(Error::InvalidParameter(format!(
                    "cross-ratio indices must be distinct: {indices:?}"
                )));
            }
        }
    }
    let gap = |a: usize, b: usize| sphere_gap(&state.z[a], &state.z[b]);
    let (den1, den2) = (gap(i, l), gap(k, j));
    let magnitude = den1.norm().min(den2.norm());
    if magnitude <= GENERAL_POSITION_TOL {
        return Err(Error::DegenerateQuadruple { i, j, k, l, magnitude });
    }
    Ok(CrossRatio {
        value: gap(i, j) * gap(k, l) / (den1 * den2),
        indices,
    })
}

/// The cross-ratio without range or general-position checks, for tracking a
/// quadruple already validated at the start of a run.
pub(crate) fn cross_ratio_value(state: &EnsembleState, [i, j, k, l]: [usize; 4]) -> Complex64 {
    let gap = |a: usize, b: usize| sphere_gap(&state.z[a], &state.z[b]);
    gap(i, j) * gap(k, l) / (gap(i, l) * gap(k, j))
}

/// Draw up to `count` quadruples of distinct indices in general position.
pub fn sample_quadruples<R: Rng + ?Sized>(
    state: &EnsembleState,
    count: usize,
    rng: &mut R,
) -> Vec<[usize; 4]> {
    let n = state.n();
    let mut out = Vec::with_capacity(count);
    if n < 4 {
        return out;
    }
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count.max(1) {
        attempts += 1;
        let idx = sample(rng, n, 4);
        let q = [idx.index(0), idx.index(1), idx.index(2), idx.index(3)];
        if cross_ratio(state, q).is_ok() {
            out.push(q);
        }
    }
    out
}

/// `d/dt <z_i, z_j> = <(Ω_i - Ω_j) z_i, z_j> + κ0 (1 - <z_i,z_j>)(<V0 z_c, z_j> + <z_i, V0 z_c>)`
/// along the `κ1 = 0` flow at a unit-norm state.
pub fn pair_inner_rate(state: &EnsembleState, params: &ModelParams, i: usize, j: usize) -> Result<Complex64> {
    if params.kappa1() != 0.0 {
        return Err(Error::InvalidParameter(
            "pair inner-product rate is only closed-form for kappa1 = 0".into(),
        ));
    }
    let zc = centroid(state)?;
    let a = params.v0().mul_vec(&zc)?;
    let (zi, zj) = (&state.z[i], &state.z[j]);
    let dom = params.omega()[i].matrix() - params.omega()[j].matrix();
    let w = inner_unchecked(zi, zj);
    Ok(inner_unchecked(&dom.mul_vec(zi)?, zj)
        + params.kappa0() * (1.0 - w) * (inner_unchecked(&a, zj) + inner_unchecked(zi, &a)))
}

/// Maximum of `values` over the final `tail_fraction` of the time window.
pub fn tail_sup(times: &[f64], values: &[f64], tail_fraction: f64) -> Result<f64> {
    if values.is_empty() || times.len() != values.len() {
        return Err(Error::InvalidParameter(
            "tail_sup needs a nonempty series with one time per value".into(),
        ));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let start = t1 - tail_fraction * (t1 - t0);
    let slack = 1e-9 * (t1 - t0).abs().max(1.0);
    Ok(times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= start - slack)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Every pairwise observable of one snapshot.
///
/// `j` and `theta` come from chordal differences (see [`sphere_gap`]) rather
/// than from `r` and `i`, which loses relative accuracy once `J_ij` drops
/// below about `1e-5`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDiagnostics {
    /// Angles, present only for real states.
    pub theta: Option<PairMatrix>,
    pub r: PairMatrix,
    pub i: PairMatrix,
    pub j: PairMatrix,
    pub theta_m: Option<f64>,
    pub j_m: f64,
    pub argmax_pair: Option<(usize, usize)>,
    pub diameter: f64,
}

impl PairDiagnostics {
    /// Observables of the radial projection of `state` onto the sphere.
    pub fn compute(state: &EnsembleState) -> Self {
        let projected = project(state);
        let z = &projected.z;
        let n = z.len();
        let (r, i) = correlations(&projected);
        let real = projected.max_imag() <= REAL_TOL;
        let mut j = vec![0.0; n * n];
        let mut theta = vec![0.0; n * n];
        let mut diameter = 0.0f64;
        for a in 0..n {
            for b in (a + 1)..n {
                let d = &z[b] - &z[a];
                let chord = d.norm();
                let h = 0.5 * chord * chord;
                let im = inner_unchecked(&z[a], &d).im;
                let v = (h * h + im * im).sqrt().sqrt();
                let t = 2.0 * (0.5 * chord).min(1.0).asin();
                j[a * n + b] = v;
                j[b * n + a] = v;
                theta[a * n + b] = t;
                theta[b * n + a] = t;
                diameter = diameter.max(chord);
            }
        }
        let j = PairMatrix { n, data: j };
        let (j_m, argmax_pair) = max_functional(&j);
        let theta = real.then_some(PairMatrix { n, data: theta });
        let theta_m = theta
            .as_ref()
            .map(|t| t.max_off_diagonal().map_or(0.0, |(v, _)| v));
        Self {
            theta,
            r,
            i,
            j,
            theta_m,
            j_m,
            argmax_pair,
            diameter,
        }
    }
}

/// Radial projection; zero vectors are left untouched.
pub fn project(state: &EnsembleState) -> EnsembleState {
    EnsembleState {
        z: state
            .z
            .iter()
            .map(|v| {
                let n = v.norm();
                if n > 0.0 {
                    v.scale_real(1.0 / n)
                } else {
                    v.clone()
                }
            })
            .collect(),
        time: state.time,
    }
}

/// `J_ij` of a real pair at angle `θ`: `sqrt(1 - cos θ)`.
pub fn real_functional_from_angle(theta: f64) -> f64 {
    (1.0 - theta.cos()).max(0.0).sqrt()
}

/// `||z_i - z_j||^2 = 2 (1 - R_ij) <= 2 J_ij^2` for unit vectors.
pub fn distance_bound_from_functional(j: f64) -> f64 {
    SQRT_2 * j
}

#[doc(hidden)]
pub fn unit_from(v: CVector) -> CVector {
    let n = v.norm();
    v.scale_real(1.0 / n)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use super::*;
    use crate::linalg::{random_skew_hermitian, SkewHermitian};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(rng: &mut ChaCha8Rng, dim: usize, real: bool) -> CVector {
        unit_from(CVector::new(
            (0..dim)
                .map(|_| {
                    let im = if real { 0.0 } else { rng.sample(StandardNormal) };
                    c(rng.sample(StandardNormal), im)
                })
                .collect(),
        ))
    }

    fn state(v: Vec<CVector>) -> EnsembleState {
        EnsembleState::new(v).unwrap()
    }

    #[test]
    fn angles() {
        let e0 = CVector::from_real(&[1.0, 0.0, 0.0]);
        let e1 = CVector::from_real(&[0.0, 1.0, 0.0]);
        let t = pair_angles(&state(vec![e0.clone(), e0.clone(), e1])).unwrap();
        assert_eq!(t[(0, 1)], 0.0);
        assert!((t[(0, 2)] - FRAC_PI_2).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (a, b) = (unit(&mut rng, 3, true), unit(&mut rng, 3, true));
            let dot: f64 = (0..3).map(|k| a[k].re * b[k].re).sum();
            let t = pair_angles(&state(vec![a, b])).unwrap();
            assert!((t[(0, 1)] - dot.acos()).abs() < 1e-12);
        }
        let z = unit(&mut rng, 3, false);
        assert!(matches!(pair_angles(&state(vec![z])), Err(Error::NotReal { .. })));
        // slightly overshooting inner products are clamped
        let big = CVector::from_real(&[1.0 + 1e-9, 0.0]);
        assert_eq!(pair_angles(&state(vec![big.clone(), big])).unwrap()[(0, 1)], 0.0);
    }

    #[test]
    fn correlations_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = unit(&mut rng, 3, false);
        let iz = z.scale(c(0.0, 1.0));
        let (r, i) = correlations(&state(vec![z.clone(), iz]));
        assert!((r[(0, 0)] - 1.0).abs() < 1e-15 && i[(0, 0)] == 0.0);
        assert!(r[(0, 1)].abs() < 1e-15 && (i[(0, 1)].abs() - 1.0).abs() < 1e-15);

        let s = state((0..6).map(|_| unit(&mut rng, 3, false)).collect());
        let (r, i) = correlations(&s);
        for a in 0..6 {
            for b in 0..6 {
                let conj = inner_unchecked(&s.z[b], &s.z[a]).conj();
                assert!((r[(a, b)] - conj.re).abs() < 1e-14);
                assert!((i[(a, b)] - conj.im).abs() < 1e-14);
                assert!((r[(a, b)] - r[(b, a)]).abs() < 1e-14);
                assert!((i[(a, b)] + i[(b, a)]).abs() < 1e-14);
                assert!(r[(a, b)].powi(2) + i[(a, b)].powi(2) <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn functional_values() {
        let r = PairMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.0 });
        let z = PairMatrix::from_fn(2, |_, _| 0.0);
        assert!((agg_functional(&r, &z)[(0, 1)] - 1.0).abs() < 1e-15);
        let r = PairMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { -1.0 });
        assert!((agg_functional(&r, &z)[(0, 1)] - SQRT_2).abs() < 1e-15);
        let r = PairMatrix::from_fn(2, |_, _| 1.0);
        assert_eq!(agg_functional(&r, &z)[(0, 1)], 0.0);
    }

    #[test]
    fn functional_bounds_distance_and_matches_real_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = state((0..5).map(|_| unit(&mut rng, 3, false)).collect());
        let d = PairDiagnostics::compute(&s);
        for a in 0..5 {
            for b in 0..5 {
                let dist2 = (&s.z[a] - &s.z[b]).norm_sqr();
                assert!(dist2 <= 2.0 * d.j[(a, b)].powi(2) + 1e-12);
                assert!((d.j[(a, b)] - d.j[(b, a)]).abs() < 1e-14);
            }
        }
        assert!(d.theta.is_none());
        let s = state((0..5).map(|_| unit(&mut rng, 4, true)).collect());
        let d = PairDiagnostics::compute(&s);
        let theta = d.theta.as_ref().unwrap();
        for a in 0..5 {
            for b in 0..5 {
                assert!((d.j[(a, b)].powi(2) - (1.0 - theta[(a, b)].cos())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn max_functional_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = unit(&mut rng, 3, false);
        let cons = PairDiagnostics::compute(&state(vec![z.clone(); 4]));
        assert!(cons.j_m < 1e-7);
        let single = PairDiagnostics::compute(&state(vec![z.clone()]));
        assert_eq!((single.j_m, single.argmax_pair), (0.0, None));

        let mut pts = vec![z.clone(); 5];
        pts[3] = z.scale_real(-1.0);
        let d = PairDiagnostics::compute(&state(pts));
        assert_eq!(d.argmax_pair, Some((0, 3)));

        for _ in 0..20 {
            let s = state((0..7).map(|_| unit(&mut rng, 3, false)).collect());
            let d = PairDiagnostics::compute(&s);
            let mut best = 0.0f64;
            for a in 0..7 {
                for b in 0..7 {
                    let w = inner_unchecked(&s.z[a], &s.z[b]);
                    if a != b {
                        best = best.max(((1.0 - w.re).powi(2) + w.im.powi(2)).powf(0.25));
                    }
                }
            }
            assert!((d.j_m - best).abs() < 1e-12);
        }
        // ties resolve to the first pair
        let j = PairMatrix::from_fn(3, |i, k| if i == k { 0.0 } else { 1.0 });
        assert_eq!(max_functional(&j), (1.0, Some((0, 1))));
    }

    #[test]
    fn diameter_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = unit(&mut rng, 3, false);
        assert_eq!(diameter(&state(vec![z.clone(); 3])), 0.0);
        assert!((diameter(&state(vec![z.clone(), z.scale_real(-1.0)])) - 2.0).abs() < 1e-15);
        let s = state((0..6).map(|_| unit(&mut rng, 3, false)).collect());
        let mut best = 0.0f64;
        for a in &s.z {
            for b in &s.z {
                let d2: f64 = (0..3).map(|k| (a[k] - b[k]).norm_sqr()).sum();
                best = best.max(d2.sqrt());
            }
        }
        assert!((diameter(&s) - best).abs() < 1e-15);
    }

    #[test]
    fn cross_ratio_symmetry_and_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = state((0..6).map(|_| unit(&mut rng, 3, false)).collect());
        let a = cross_ratio(&s, [0, 1, 2, 3]).unwrap();
        let b = cross_ratio(&s, [2, 3, 0, 1]).unwrap();
        assert!((a.value - b.value).norm() < 1e-12 * (1.0 + a.value.norm()));
        let g = |x: usize, y: usize| {
            let w: Complex64 = (0..3).map(|k| s.z[x][k].conj() * s.z[y][k]).sum();
            c(1.0, 0.0) - w
        };
        let want = g(0, 1) * g(2, 3) / (g(0, 3) * g(2, 1));
        assert!((a.value - want).norm() < 1e-12 * (1.0 + want.norm()));
        assert!(cross_ratio(&s, [0, 1, 0, 3]).is_err());
        let deg = state(vec![s.z[0].clone(), s.z[1].clone(), s.z[2].clone(), s.z[0].clone()]);
        assert!(matches!(cross_ratio(&deg, [0, 1, 2, 3]), Err(Error::DegenerateQuadruple { .. })));
        let qs = sample_quadruples(&s, 5, &mut rng);
        assert_eq!(qs.len(), 5);
    }

    #[test]
    fn omega_diameter_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let om = random_skew_hermitian(3, 1.0, &mut rng).unwrap();
        let z = SkewHermitian::zero(3);
        let p = ModelParams::identical(4, 1.0, 0.0, z.clone(), z.clone(), om.clone()).unwrap();
        assert_eq!(omega_diameter(&p), 0.0);
        assert!(p.identical_omega());
        let p1 = ModelParams::identical(1, 1.0, 0.0, z.clone(), z.clone(), om.clone()).unwrap();
        assert_eq!(omega_diameter(&p1), 0.0);
        // shift by 0.3 i I: Frobenius distance 0.3 sqrt(3)
        let shift = crate::linalg::CMatrix::identity(3).scale(c(0.0, 0.3));
        let om2 = SkewHermitian::new(om.matrix() + &shift).unwrap();
        let p2 = ModelParams::new(1.0, 0.0, z.clone(), z, vec![om, om2]).unwrap();
        assert!((omega_diameter(&p2) - 0.3 * 3f64.sqrt()).abs() < 1e-14);
        assert!(!p2.identical_omega());
    }

    #[test]
    fn tail_sup_cases() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        assert_eq!(tail_sup(&t, &vec![3.5; 101], 0.2).unwrap(), 3.5);
        let dec: Vec<f64> = t.iter().map(|x| 10.0 - x).collect();
        assert!((tail_sup(&t, &dec, 0.2).unwrap() - 2.0).abs() < 1e-12);
        // decay onto a noisy plateau at 0.1
        let plateau: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(k, x)| (-3.0 * x).exp() + 0.1 + 1e-3 * ((k as f64) * 1.3).sin())
            .collect();
        assert!((tail_sup(&t, &plateau, 0.2).unwrap() - 0.1).abs() <= 1.1e-3);
        assert!(tail_sup(&[], &[], 0.2).is_err());
        assert!(tail_sup(&t, &dec, 0.0).is_err());
        let _ = PI;
    }
}
