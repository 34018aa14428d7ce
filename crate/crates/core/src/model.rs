//! Ensemble state, model parameters and the right-hand side of the frustrated
//! Lohe hermitian sphere dynamics
//!
//! ```text
//! dz_j/dt = Ω_j z_j + κ0 (<z_j,z_j> V0 z_c - <V0 z_c, z_j> z_j)
//!                   + κ1 (<z_j, V1 z_c> - <V1 z_c, z_j>) z_j,   V = I + W.
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner_unchecked, CMatrix, CVector, SkewHermitian};

/// Frobenius distance below which two frequency matrices count as equal.
pub const IDENTICAL_OMEGA_TOL: f64 = 1e-12;

/// Fully general frustration matrices that bypass `V = I + W`.
///
/// Only the Kuramoto reductions need this: a planar rotation by `α` and the
/// scalar phase `e^{iα}` are not of the form identity plus skew part.
#[derive(Debug, Clone, PartialEq)]
pub struct FrustrationOverride {
    pub v0: CMatrix,
    pub v1: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    kappa0: f64,
    kappa1: f64,
    w0: SkewHermitian,
    w1: SkewHermitian,
    omega: Vec<SkewHermitian>,
    identical_omega: bool,
    frustration_override: Option<FrustrationOverride>,
}

impl ModelParams {
    pub fn new(
        kappa0: f64,
        kappa1: f64,
        w0: SkewHermitian,
        w1: SkewHermitian,
        omega: Vec<SkewHermitian>,
    ) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        for (name, k) in [("kappa0", kappa0), ("kappa1", kappa1)] {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and nonnegative, got {k}"
                )));
            }
        }
        let dim = w0.dim();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        for m in std::iter::once(&w1).chain(&omega) {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
        }
        let identical_omega = omega
            .iter()
            .all(|o| (o.matrix() - omega[0].matrix()).frobenius_norm() <= IDENTICAL_OMEGA_TOL);
        Ok(Self {
            kappa0,
            kappa1,
            w0,
            w1,
            omega,
            identical_omega,
            frustration_override: None,
        })
    }

    /// All particles share `omega`.
    pub fn identical(
        n: usize,
        kappa0: f64,
        kappa1: f64,
        w0: SkewHermitian,
        w1: SkewHermitian,
        omega: SkewHermitian,
    ) -> Result<Self> {
        Self::new(kappa0, kappa1, w0, w1, vec![omega; n])
    }

    /// Replace `V0`, `V1` by arbitrary matrices. Threshold calculators refuse
    /// parameters carrying an override.
    pub fn with_override(mut self, v0: CMatrix, v1: CMatrix) -> Result<Self> {
        for v in [&v0, &v1] {
            if v.dim() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: v.dim(),
                });
            }
        }
        self.frustration_override = Some(FrustrationOverride { v0, v1 });
        Ok(self)
    }

    pub fn with_kappa0(mut self, kappa0: f64) -> Result<Self> {
        if !(kappa0 >= 0.0 && kappa0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa0 must be finite and nonnegative, got {kappa0}"
            )));
        }
        self.kappa0 = kappa0;
        Ok(self)
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn w0(&self) -> &SkewHermitian {
        &self.w0
    }

    pub fn w1(&self) -> &SkewHermitian {
        &self.w1
    }

    pub fn omega(&self) -> &[SkewHermitian] {
        &self.omega
    }

    pub fn identical_omega(&self) -> bool {
        self.identical_omega
    }

    pub fn frustration_override(&self) -> Option<&FrustrationOverride> {
        self.frustration_override.as_ref()
    }

    /// Ambient complex dimension `d + 1`.
    pub fn dim(&self) -> usize {
        self.w0.dim()
    }

    /// Sphere index `d`.
    pub fn d(&self) -> usize {
        self.dim() - 1
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn v0(&self) -> CMatrix {
        match &self.frustration_override {
            Some(o) => o.v0.clone(),
            None => self.w0.frustration(),
        }
    }

    pub fn v1(&self) -> CMatrix {
        match &self.frustration_override {
            Some(o) => o.v1.clone(),
            None => self.w1.frustration(),
        }
    }

    pub fn is_real(&self) -> bool {
        let v_real = match &self.frustration_override {
            Some(o) => o.v0.max_imag() == 0.0 && o.v1.max_imag() == 0.0,
            None => self.w0.is_real() && self.w1.is_real(),
        };
        v_real && self.omega.iter().all(SkewHermitian::is_real)
    }

    pub(crate) fn coupling(&self) -> Coupling {
        Coupling {
            kappa0: self.kappa0,
            kappa1: self.kappa1,
            v0: self.v0(),
            v1: self.v1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    pub z: Vec<CVector>,
    pub time: f64,
}

impl EnsembleState {
    pub fn new(z: Vec<CVector>) -> Result<Self> {
        Self::at_time(z, 0.0)
    }

    pub fn at_time(z: Vec<CVector>, time: f64) -> Result<Self> {
        let first = z.first().ok_or(Error::EmptyEnsemble)?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(bad) = z.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { z, time })
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn dim(&self) -> usize {
        self.z.first().map_or(0, CVector::dim)
    }

    /// `max_j | ||z_j|| - 1 |`.
    pub fn max_norm_drift(&self) -> f64 {
        self.z.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.z.iter().map(CVector::max_imag).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().all(CVector::is_finite)
    }

    fn check_against(&self, params: &ModelParams) -> Result<()> {
        if self.n() != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                found: self.n(),
            });
        }
        if let Some(bad) = self.z.iter().find(|v| v.dim() != params.dim()) {
            return Err(Error::DimensionMismatch {
                expected: params.dim(),
                found: bad.dim(),
            });
        }
        Ok(())
    }
}

/// Time derivatives `dz_j/dt`, one per particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub dz: Vec<CVector>,
}

/// Coupling strengths with explicit frustration matrices.
#[derive(Debug, Clone)]
pub(crate) struct Coupling {
    pub kappa0: f64,
    pub kappa1: f64,
    pub v0: CMatrix,
    pub v1: CMatrix,
}

impl Coupling {
    /// Mean-field coupling terms (no free flow) written into `out`.
    pub fn meanfield(&self, z: &[CVector], out: &mut Vec<CVector>) {
        let zc = mean(z);
        let a = self.v0.mul_vec_unchecked(&zc);
        let b = self.v1.mul_vec_unchecked(&zc);
        out.clear();
        out.extend(z.iter().map(|zj| {
            let mut dz = a.scale_real(self.kappa0 * zj.norm_sqr());
            dz.axpy(-self.kappa0 * inner_unchecked(&a, zj), zj);
            let phase = inner_unchecked(zj, &b) - inner_unchecked(&b, zj);
            dz.axpy(self.kappa1 * phase, zj);
            dz
        }));
    }
}

fn mean(z: &[CVector]) -> CVector {
    let mut c = CVector::zeros(z[0].dim());
    let w = Complex64::new(1.0 / z.len() as f64, 0.0);
    for zk in z {
        c.axpy(w, zk);
    }
    c
}

/// Arithmetic mean `z_c = (1/N) Σ z_k`.
pub fn centroid(state: &EnsembleState) -> Result<CVector> {
    if state.z.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Ok(mean(&state.z))
}

/// Pairwise-sum form of the vector field, `O(N^2)`. Kept as a cross-check for
/// [`rhs_meanfield`].
pub fn rhs_sum(state: &EnsembleState, params: &ModelParams) -> Result<Derivative> {
    state.check_against(params)?;
    let n = state.n() as f64;
    let (v0, v1) = (params.v0(), params.v1());
    let v0z: Vec<CVector> = state.z.iter().map(|zk| v0.mul_vec_unchecked(zk)).collect();
    let v1z: Vec<CVector> = state.z.iter().map(|zk| v1.mul_vec_unchecked(zk)).collect();
    let dz = state
        .z
        .iter()
        .zip(params.omega())
        .map(|(zj, om)| {
            let mut acc = om.matrix().mul_vec_unchecked(zj);
            let zz = inner_unchecked(zj, zj);
            let mut phase = Complex64::new(0.0, 0.0);
            for (a, b) in v0z.iter().zip(&v1z) {
                acc.axpy(zz * (params.kappa0() / n), a);
                acc.axpy(-inner_unchecked(a, zj) * (params.kappa0() / n), zj);
                phase += inner_unchecked(zj, b) - inner_unchecked(b, zj);
            }
            acc.axpy(phase * (params.kappa1() / n), zj);
            acc
        })
        .collect();
    Ok(Derivative { dz })
}

/// Centroid (mean-field) form of the vector field, `O(N)`.
pub fn rhs_meanfield(state: &EnsembleState, params: &ModelParams) -> Result<Derivative> {
    state.check_against(params)?;
    let mut dz = Vec::with_capacity(state.n());
    params.coupling().meanfield(&state.z, &mut dz);
    add_free_flow(&state.z, params.omega(), &mut dz);
    Ok(Derivative { dz })
}

pub(crate) fn add_free_flow(z: &[CVector], omega: &[SkewHermitian], dz: &mut [CVector]) {
    for ((d, zj), om) in dz.iter_mut().zip(z).zip(omega) {
        let rot = om.matrix().mul_vec_unchecked(zj);
        d.axpy(Complex64::new(1.0, 0.0), &rot);
    }
}

/// The real Lohe sphere field `Ω_j x_j + κ0 (<x_j,x_j> V x_c - <V x_c, x_j> x_j)`.
///
/// Requires real state, real `Ω_j` and `V0`, and `κ1 = 0`.
pub fn rhs_real_ls(state: &EnsembleState, params: &ModelParams) -> Result<Derivative> {
    state.check_against(params)?;
    if params.kappa1() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "real sphere model requires kappa1 = 0, got {}",
            params.kappa1()
        )));
    }
    let imag = state.max_imag();
    if imag != 0.0 {
        return Err(Error::NotReal {
            what: "state",
            magnitude: imag,
        });
    }
    let v0 = params.v0();
    if v0.max_imag() != 0.0 {
        return Err(Error::NotReal {
            what: "V0",
            magnitude: v0.max_imag(),
        });
    }
    if let Some(om) = params.omega().iter().find(|o| !o.is_real()) {
        return Err(Error::NotReal {
            what: "Omega",
            magnitude: om.matrix().max_imag(),
        });
    }
    let xc = mean(&state.z);
    let vx = v0.mul_vec_unchecked(&xc);
    let k = params.kappa0();
    let dz = state
        .z
        .iter()
        .zip(params.omega())
        .map(|(xj, om)| {
            let mut d = om.matrix().mul_vec_unchecked(xj);
            d.axpy(Complex64::new(k * xj.norm_sqr(), 0.0), &vx);
            d.axpy(Complex64::new(-k * inner_unchecked(&vx, xj).re, 0.0), xj);
            d
        })
        .collect();
    Ok(Derivative { dz })
}
