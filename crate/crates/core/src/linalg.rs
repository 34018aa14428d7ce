//! Small dense complex linear algebra on `C^{d+1}`.
//!
//! Dimensions in this crate are tiny (the sphere index `d` is rarely above
//! 7), so vectors and matrices are plain row-major `Vec<Complex64>` buffers.
//! The inner product conjugates its first argument.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default absolute tolerance for floating comparisons.
pub const ATOL: f64 = 1e-12;
/// Default relative tolerance for floating comparisons.
pub const RTOL: f64 = 1e-10;

/// `|a - b| <= atol + rtol * max(|a|, |b|)`.
pub fn approx_eq(a: f64, b: f64, atol: f64, rtol: f64) -> bool {
    (a - b).abs() <= atol + rtol * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![ZERO; dim])
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The `k`-th standard basis vector of `C^dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: Complex64, x: &CVector) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest imaginary-part magnitude among the entries.
    pub fn max_imag(&self) -> f64 {
        self.0.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// `<u, v> = sum_i conj(u_i) v_i`.
pub fn herm_inner(u: &CVector, v: &CVector) -> Result<Complex64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(inner_unchecked(u, v))
}

#[inline]
pub(crate) fn inner_unchecked(u: &CVector, v: &CVector) -> Complex64 {
    u.0.iter().zip(&v.0).map(|(a, b)| a.conj() * b).sum()
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        if v.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.dim(),
            });
        }
        Ok(self.mul_vec_unchecked(v))
    }

    pub(crate) fn mul_vec_unchecked(&self, v: &CVector) -> CVector {
        let n = self.n;
        CVector(
            (0..n)
                .map(|i| {
                    self.data[i * n..(i + 1) * n]
                        .iter()
                        .zip(&v.0)
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        )
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// `||M||_F = Tr(M^† M)^{1/2}`.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, rhs: &CMatrix) -> CMatrix {
        &self.matmul(rhs) - &rhs.matmul(self)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "add dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "sub dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// `||M + M^†||_F <= tol * (1 + ||M||_F)`.
pub fn is_skew_hermitian(m: &CMatrix, tol: f64) -> bool {
    skew_residual(m) <= tol * (1.0 + m.frobenius_norm())
}

fn skew_residual(m: &CMatrix) -> f64 {
    (m + &m.adjoint()).frobenius_norm()
}

/// A matrix with `M^† = -M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewHermitian(CMatrix);

impl SkewHermitian {
    /// Tolerance used when validating user-supplied matrices.
    pub const TOL: f64 = 1e-12;

    pub fn new(m: CMatrix) -> Result<Self> {
        if is_skew_hermitian(&m, Self::TOL) {
            Ok(Self(m))
        } else {
            Err(Error::NotSkewHermitian {
                residual: skew_residual(&m),
            })
        }
    }

    pub fn zero(n: usize) -> Self {
        Self(CMatrix::zeros(n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn is_real(&self) -> bool {
        self.0.max_imag() == 0.0
    }

    /// `V = I + W`.
    pub fn frustration(&self) -> CMatrix {
        &CMatrix::identity(self.dim()) + &self.0
    }
}

/// Projection `(A - A^†) / 2` onto the skew-hermitian matrices.
pub fn skew_hermitize(a: &CMatrix) -> SkewHermitian {
    SkewHermitian((a - &a.adjoint()).scale_real(0.5))
}

/// Random skew-hermitian matrix whose entries have real and imaginary parts
/// in `[-range, range]`.
///
/// The strict upper triangle is sampled, the lower triangle is its negative
/// conjugate, and the diagonal is purely imaginary, so `M + M^†` is exactly
/// zero in floating point.
pub fn random_skew_hermitian<R: Rng + ?Sized>(
    dim: usize,
    range: f64,
    rng: &mut R,
) -> Result<SkewHermitian> {
    check_sampling(dim, range)?;
    let dist = Uniform::new_inclusive(-range, range)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(0.0, dist.sample(rng));
        for j in (i + 1)..dim {
            let c = Complex64::new(dist.sample(rng), dist.sample(rng));
            m[(i, j)] = c;
            m[(j, i)] = -c.conj();
        }
    }
    Ok(SkewHermitian(m))
}

/// Random real skew-symmetric matrix with upper entries in `[-range, range]`.
pub fn random_skew_symmetric<R: Rng + ?Sized>(
    dim: usize,
    range: f64,
    rng: &mut R,
) -> Result<SkewHermitian> {
    check_sampling(dim, range)?;
    let dist = Uniform::new_inclusive(-range, range)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let x = dist.sample(rng);
            m[(i, j)] = Complex64::new(x, 0.0);
            m[(j, i)] = Complex64::new(-x, 0.0);
        }
    }
    Ok(SkewHermitian(m))
}

fn check_sampling(dim: usize, range: f64) -> Result<()> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(range >= 0.0 && range.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sampling range must be finite and nonnegative, got {range}"
        )));
    }
    Ok(())
}

const EXP_TAYLOR_ORDER: usize = 18;
const EXP_SCALED_NORM: f64 = 0.5;

/// `exp(tM)` by scaling and squaring with a truncated Taylor series.
///
/// `tM` is halved until its Frobenius norm is at most 0.5; the order-18
/// series then has truncation error below `0.5^19 / 19!`.
pub fn matrix_exp(m: &CMatrix, t: f64) -> CMatrix {
    let n = m.dim();
    let a = m.scale_real(t);
    let norm = a.frobenius_norm();
    if !norm.is_finite() {
        return CMatrix {
            n,
            data: vec![Complex64::new(f64::NAN, f64::NAN); n * n],
        };
    }
    let mut squarings = 0u32;
    let mut scaled = norm;
    while scaled > EXP_SCALED_NORM {
        scaled *= 0.5;
        squarings += 1;
    }
    let a = a.scale_real(0.5f64.powi(squarings as i32));
    let id = CMatrix::identity(n);
    // Horner: I + A(I + A/2(I + A/3(...)))
    let mut e = id.clone();
    for k in (1..=EXP_TAYLOR_ORDER).rev() {
        e = &id + &a.matmul(&e).scale_real(1.0 / k as f64);
    }
    for _ in 0..squarings {
        e = e.matmul(&e);
    }
    e
}

/// Left and right sides of a pairing inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl PairingBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// `|<x, Wy>| <= ||W||_F / sqrt(2) * sqrt(|x|^2 |y|^2 - <x,y>^2)` for real
/// skew-symmetric `W` and real `x`, `y`.
pub fn pairing_bound_real(w: &CMatrix, x: &CVector, y: &CVector) -> Result<PairingBound> {
    check_pair_dims(w, x, y)?;
    for (what, mag) in [
        ("W", w.max_imag()),
        ("x", x.max_imag()),
        ("y", y.max_imag()),
    ] {
        if mag != 0.0 {
            return Err(Error::NotReal {
                what,
                magnitude: mag,
            });
        }
    }
    if !is_skew_hermitian(w, SkewHermitian::TOL) {
        return Err(Error::NotSkewHermitian {
            residual: skew_residual(w),
        });
    }
    let lhs = inner_unchecked(x, &w.mul_vec_unchecked(y)).norm();
    let xy = inner_unchecked(x, y).re;
    let gram = (x.norm_sqr() * y.norm_sqr() - xy * xy).max(0.0);
    let rhs = w.frobenius_norm() / std::f64::consts::SQRT_2 * gram.sqrt();
    Ok(PairingBound { lhs, rhs })
}

/// `|<Wx, y> + <y, Wx>| <= sqrt(2) ||W||_F sqrt(|x|^2 |y|^2 - Re(<x,y>^2))`
/// for skew-hermitian `W`.
pub fn pairing_bound_complex(w: &SkewHermitian, x: &CVector, y: &CVector) -> Result<PairingBound> {
    check_pair_dims(w.matrix(), x, y)?;
    let wx = w.matrix().mul_vec_unchecked(x);
    let lhs = (inner_unchecked(&wx, y) + inner_unchecked(y, &wx)).norm();
    let xy = inner_unchecked(x, y);
    let gram = (x.norm_sqr() * y.norm_sqr() - (xy * xy).re).max(0.0);
    let rhs = std::f64::consts::SQRT_2 * w.frobenius_norm() * gram.sqrt();
    Ok(PairingBound { lhs, rhs })
}

fn check_pair_dims(w: &CMatrix, x: &CVector, y: &CVector) -> Result<()> {
    for v in [x, y] {
        if v.dim() != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: w.dim(),
                found: v.dim(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
        CVector::new(
            (0..dim)
                .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        )
    }

    fn random_real_vec(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
        CVector::from_real(&(0..dim).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>())
    }

    #[test]
    fn inner_basis_and_phase() {
        let e0 = CVector::basis(2, 0);
        let e1 = CVector::basis(2, 1);
        assert_eq!(herm_inner(&e0, &e1).unwrap(), ZERO);
        let v = CVector::new(vec![c(0.0, 1.0), ZERO]);
        assert_eq!(herm_inner(&v, &v).unwrap(), ONE);
        assert!(matches!(
            herm_inner(&e0, &CVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inner_matches_split_real_loop() {
        // Oracle: expand conj(a)b into real arithmetic and sum with compensation.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = random_vec(&mut rng, 3);
            let v = random_vec(&mut rng, 3);
            let (mut re, mut im) = (0.0f64, 0.0f64);
            let (mut cre, mut cim) = (0.0f64, 0.0f64);
            for k in 0..3 {
                let (a, b) = (u[k], v[k]);
                for (acc, comp, term) in [
                    (&mut re, &mut cre, a.re * b.re + a.im * b.im),
                    (&mut im, &mut cim, a.re * b.im - a.im * b.re),
                ] {
                    let y = term - *comp;
                    let t = *acc + y;
                    *comp = (t - *acc) - y;
                    *acc = t;
                }
            }
            let got = herm_inner(&u, &v).unwrap();
            assert!((got.re - re).abs() < 1e-13 && (got.im - im).abs() < 1e-13);
            let back = herm_inner(&v, &u).unwrap();
            assert!((got - back.conj()).norm() < 1e-15);
            assert!(herm_inner(&u, &u).unwrap().im.abs() < 1e-15);
        }
    }

    #[test]
    fn frobenius_cases() {
        assert!((CMatrix::identity(3).frobenius_norm() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(CMatrix::zeros(3).frobenius_norm(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = CMatrix::zeros(3);
        let mut oracle = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let z = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
                m[(i, j)] = z;
                oracle += z.re * z.re + z.im * z.im;
            }
        }
        assert!(approx_eq(m.frobenius_norm(), oracle.sqrt(), 0.0, 1e-12));
    }

    #[test]
    fn skew_hermitize_cases() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        let s = skew_hermitize(&a);
        let expect = CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        assert_eq!(s.matrix(), &expect);
        // idempotent
        assert_eq!(skew_hermitize(s.matrix()).matrix(), &expect);
        // hermitian input collapses to zero
        let h = CMatrix::from_rows(vec![vec![c(2.0, 0.0), c(1.0, 1.0)], vec![c(1.0, -1.0), c(-3.0, 0.0)]])
            .unwrap();
        assert_eq!(skew_hermitize(&h).frobenius_norm(), 0.0);
        assert!(SkewHermitian::new(h).is_err());
    }

    #[test]
    fn random_skew_hermitian_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z = random_skew_hermitian(3, 0.0, &mut rng).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        for _ in 0..20 {
            let m = random_skew_hermitian(4, 0.1, &mut rng).unwrap();
            assert!(is_skew_hermitian(m.matrix(), 0.0));
            assert!(m.matrix().entries().iter().all(|e| e.re.abs() <= 0.1 && e.im.abs() <= 0.1));
        }
        let a = random_skew_hermitian(3, 1.0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = random_skew_hermitian(3, 1.0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(random_skew_hermitian(0, 1.0, &mut rng), Err(Error::ZeroDimension)));
        assert!(random_skew_hermitian(2, -1.0, &mut rng).is_err());
    }

    #[test]
    fn exp_zero_and_rotation() {
        assert_eq!(matrix_exp(&CMatrix::zeros(3), 1.7), CMatrix::identity(3));
        let gen = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let r = matrix_exp(&gen, FRAC_PI_2);
        assert!((&r - &gen).frobenius_norm() < 1e-14);
    }

    fn series_oracle(m: &CMatrix, t: f64) -> CMatrix {
        // exp(tM) = (exp(tM / 2^s))^(2^s) with a 50-term plain power series.
        let s = 6;
        let a = m.scale_real(t / 2f64.powi(s));
        let mut term = CMatrix::identity(m.dim());
        let mut sum = term.clone();
        for k in 1..50 {
            term = term.matmul(&a).scale_real(1.0 / k as f64);
            sum = &sum + &term;
        }
        for _ in 0..s {
            sum = sum.matmul(&sum);
        }
        sum
    }

    #[test]
    fn exp_matches_series_and_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let m = random_skew_hermitian(3, 1.0, &mut rng).unwrap();
            let e = matrix_exp(m.matrix(), 1.0);
            assert!((&e - &series_oracle(m.matrix(), 1.0)).frobenius_norm() < 1e-12);
            let u = e.adjoint().matmul(&e);
            assert!((&u - &CMatrix::identity(3)).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn pairing_trivial_cases() {
        let x = CVector::from_real(&[1.0, 2.0, 0.5]);
        let zero = CMatrix::zeros(3);
        let b = pairing_bound_real(&zero, &x, &x).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        let w = CMatrix::from_real_rows(&[&[0.0, 1.0, -2.0], &[-1.0, 0.0, 0.3], &[2.0, -0.3, 0.0]]).unwrap();
        let b = pairing_bound_real(&w, &x, &x).unwrap();
        assert!(b.lhs < 1e-15 && b.rhs < 1e-7);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let wc = random_skew_hermitian(3, 1.0, &mut rng).unwrap();
        let mut u = random_vec(&mut rng, 3);
        u = u.scale_real(1.0 / u.norm());
        let b = pairing_bound_complex(&wc, &u, &u).unwrap();
        assert!(b.lhs < 1e-14);
        let b = pairing_bound_complex(&SkewHermitian::zero(3), &u, &u).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        assert!(pairing_bound_real(&wc.matrix().clone(), &x, &x).is_err());
    }

    #[test]
    fn pairing_random_sweeps() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let w = random_skew_symmetric(4, 1.0, &mut rng).unwrap();
            let x = random_real_vec(&mut rng, 4);
            let y = random_real_vec(&mut rng, 4);
            assert!(pairing_bound_real(w.matrix(), &x, &y).unwrap().holds(1e-12));
        }
        for _ in 0..1000 {
            let w = random_skew_hermitian(3, 1.0, &mut rng).unwrap();
            let x = random_vec(&mut rng, 3);
            let y = random_vec(&mut rng, 3);
            assert!(pairing_bound_complex(&w, &x, &y).unwrap().holds(1e-12));
        }
    }

    #[test]
    fn skew_form_is_imaginary_on_unit_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let m = random_skew_hermitian(3, 1.0, &mut rng).unwrap();
            let mut u = random_vec(&mut rng, 3);
            u = u.scale_real(1.0 / u.norm());
            let q = herm_inner(&u, &m.matrix().mul_vec(&u).unwrap()).unwrap();
            assert!(q.re.abs() < 1e-12);
        }
    }
}
