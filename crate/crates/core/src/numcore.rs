//! Dense linear-algebra primitives shared by every other module.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Factorizations
//! (Hermitian eigendecomposition, SVD) run through `faer`, which holds the
//! reconstruction and orthonormality residuals at the 1e-14 level that the
//! downstream certificates rely on. Matrix functions always go through a full
//! eigendecomposition, never a power series.
//!
//! Antilinear maps are stored as a matrix `a` acting by `v ↦ a · conj(v)` in
//! the standard basis. Real subspaces of ℂⁿ are handled in realified
//! coordinates `(Re v; Im v) ∈ ℝ²ⁿ`.

use faer::Side;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Relative asymmetry accepted by [`eig_hermitian`].
pub const HERMITIAN_RTOL: f64 = 1e-10;
/// Default relative PSD tolerance.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;
/// Absolute Frobenius tolerance for `U*U = 1` checks.
pub const UNITARY_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const IMAG: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn complexify(m: &RMatrix) -> CMatrix {
    m.map(re)
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(values.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = re(v);
    }
    m
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// `‖a − b‖_F / max(‖a‖_F, ‖b‖_F)`, zero when both vanish.
pub fn relative_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

pub fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `‖M − M*‖_F / ‖M‖_F` (zero for the zero matrix).
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        0.0
    } else {
        (m - m.adjoint()).norm() / n
    }
}

pub fn ensure_hermitian(m: &CMatrix) -> Result<()> {
    check_square(m)?;
    check_finite(m)?;
    let residual = hermitian_asymmetry(m);
    if residual > HERMITIAN_RTOL {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - identity(n)).norm()
}

pub fn ensure_unitary(u: &CMatrix) -> Result<()> {
    check_square(u)?;
    check_finite(u)?;
    let residual = unitarity_residual(u);
    if residual > UNITARY_TOL {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

fn to_faer(m: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn to_faer_real(m: &RMatrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
///
/// Each eigenvector is phase-normalized so that its first entry of (near)
/// maximal modulus is real and positive, which makes outputs deterministic
/// and gives the standard basis back for diagonal inputs.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn max_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    /// Largest eigenvalue modulus, i.e. the spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// `U diag(f(λ)) U*` for an arbitrary scalar map.
    pub fn map<F: Fn(f64) -> Complex64>(&self, f: F) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= w);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn apply_function(&self, f: ScalarMap) -> Result<CMatrix> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&l| f.eval(l))
            .collect::<Result<Vec<_>>>()?;
        let mut scaled = self.eigenvectors.clone();
        for (j, w) in values.into_iter().enumerate() {
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= w);
        }
        Ok(scaled * self.eigenvectors.adjoint())
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(re)
    }

    pub fn reconstruction_residual(&self, m: &CMatrix) -> f64 {
        relative_difference(&self.reconstruct(), m)
    }

    pub fn orthonormality_residual(&self) -> f64 {
        unitarity_residual(&self.eigenvectors)
    }
}

/// Named scalar maps for the spectral calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarMap {
    /// `λ ↦ e^{−tλ}`
    ExpScaled(f64),
    /// `λ ↦ e^{zλ}` for complex `z`
    Exp(Complex64),
    /// `λ ↦ λ^{it}`, requires `λ > 0`
    PowerIt(f64),
    /// `λ ↦ λ^p`, requires `λ > 0` (or `λ = 0` with `p > 0`)
    Power(f64),
    /// `λ ↦ log λ`, requires `λ > 0`
    Log,
}

impl ScalarMap {
    pub fn eval(self, lambda: f64) -> Result<Complex64> {
        match self {
            ScalarMap::ExpScaled(t) => Ok(re((-t * lambda).exp())),
            ScalarMap::Exp(z) => Ok((z * lambda).exp()),
            ScalarMap::PowerIt(t) => {
                if lambda <= 0.0 {
                    return Err(Error::DomainError {
                        eigenvalue: lambda,
                        reason: "imaginary power of a nonpositive number",
                    });
                }
                Ok(Complex64::from_polar(1.0, t * lambda.ln()))
            }
            ScalarMap::Power(p) => {
                if lambda > 0.0 {
                    Ok(re(lambda.powf(p)))
                } else if lambda == 0.0 && p > 0.0 {
                    Ok(ZERO)
                } else {
                    Err(Error::DomainError {
                        eigenvalue: lambda,
                        reason: "real power of a nonpositive number",
                    })
                }
            }
            ScalarMap::Log => {
                if lambda <= 0.0 {
                    return Err(Error::DomainError {
                        eigenvalue: lambda,
                        reason: "logarithm of a nonpositive number",
                    });
                }
                Ok(re(lambda.ln()))
            }
        }
    }
}

fn normalize_phase(v: &mut nalgebra::DVectorViewMut<'_, Complex64>) {
    let max = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    if let Some(pivot) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-8)).copied() {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

pub fn eig_hermitian(m: &CMatrix) -> Result<SpectralDecomposition> {
    let n = check_square(m)?;
    check_finite(m)?;
    let residual = hermitian_asymmetry(m);
    if residual > HERMITIAN_RTOL {
        return Err(Error::NotHermitian { residual });
    }
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let sym = hermitian_part(m);
    let evd = to_faer(&sym)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenFailure)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut eigenvectors = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    for j in 0..n {
        normalize_phase(&mut eigenvectors.column_mut(j));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Convenience: `f(M)` for Hermitian `M`.
pub fn apply_function(m: &CMatrix, f: ScalarMap) -> Result<CMatrix> {
    eig_hermitian(m)?.apply_function(f)
}

/// Result of a PSD test: `is_psd ⇔ min_eig ≥ −tol·max(1, ‖G‖₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCertificate {
    pub min_eig: f64,
    pub norm: f64,
    pub tol: f64,
    pub is_psd: bool,
}

impl PsdCertificate {
    /// The acceptance threshold `−tol·max(1, ‖G‖₂)`.
    pub fn threshold(&self) -> f64 {
        -self.tol * self.norm.max(1.0)
    }

    /// `min_eig / max(1, ‖G‖₂)`.
    pub fn relative_margin(&self) -> f64 {
        self.min_eig / self.norm.max(1.0)
    }
}

pub fn psd_certificate(g: &CMatrix, tol: f64) -> Result<PsdCertificate> {
    let spec = eig_hermitian(g)?;
    Ok(certificate_from_spectrum(&spec, tol))
}

pub(crate) fn certificate_from_spectrum(spec: &SpectralDecomposition, tol: f64) -> PsdCertificate {
    let min_eig = spec.min_eigenvalue().unwrap_or(0.0);
    let norm = spec.spectral_norm();
    PsdCertificate {
        min_eig,
        norm,
        tol,
        is_psd: min_eig >= -tol * norm.max(1.0),
    }
}

/// Rank factorization `G = B*B` of a PSD matrix together with its null space.
///
/// For coordinate vectors `u, v` the quotient inner product is
/// `⟨q(u), q(v)⟩ = (Bv)*(Bu) = v* G u`, linear in the first argument.
#[derive(Debug, Clone)]
pub struct QuotientModel {
    ambient_dim: usize,
    factor: CMatrix,
    range_basis: CMatrix,
    sqrt_values: Vec<f64>,
    null_basis: CMatrix,
}

impl QuotientModel {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.factor.nrows()
    }

    /// `B`, a `rank × ambient_dim` matrix.
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }

    /// Orthonormal columns spanning `{v : Gv ≈ 0}`.
    pub fn null_basis(&self) -> &CMatrix {
        &self.null_basis
    }

    pub fn null_projector(&self) -> CMatrix {
        &self.null_basis * self.null_basis.adjoint()
    }

    /// `q(u) = Bu`.
    pub fn project(&self, coords: &CVector) -> CVector {
        &self.factor * coords
    }

    pub fn inner(&self, u: &CVector, v: &CVector) -> Complex64 {
        self.project(v).dotc(&self.project(u))
    }

    /// Right inverse `B⁺` with `B B⁺ = 1`.
    pub fn right_inverse(&self) -> CMatrix {
        let mut m = self.range_basis.clone();
        for (j, s) in self.sqrt_values.iter().enumerate() {
            m.column_mut(j).iter_mut().for_each(|z| *z /= *s);
        }
        m
    }

    pub fn gram(&self) -> CMatrix {
        self.factor.adjoint() * &self.factor
    }

    /// `‖B*B − G‖_F / ‖G‖_F`.
    pub fn factor_residual(&self, g: &CMatrix) -> f64 {
        let n = g.norm();
        let r = (self.gram() - g).norm();
        if n == 0.0 {
            r
        } else {
            r / n
        }
    }
}

/// Builds the quotient by the null space of a PSD Gram matrix.
///
/// Eigenvalues in `[−tol·s, tol·s]`, `s = max(1, ‖G‖₂)`, count as zero.
pub fn gram_quotient(g: &CMatrix, tol: f64) -> Result<QuotientModel> {
    let spec = eig_hermitian(g)?;
    let cert = certificate_from_spectrum(&spec, tol);
    if !cert.is_psd {
        return Err(Error::NotPsd { min_eig: cert.min_eig });
    }
    let n = spec.dim();
    let cutoff = tol * cert.norm.max(1.0);
    let kept: Vec<usize> = (0..n).filter(|&i| spec.eigenvalues[i] > cutoff).collect();
    let dropped: Vec<usize> = (0..n).filter(|&i| spec.eigenvalues[i] <= cutoff).collect();
    let u = spec.eigenvectors();
    let range_basis = u.select_columns(kept.iter());
    let null_basis = u.select_columns(dropped.iter());
    let sqrt_values: Vec<f64> = kept.iter().map(|&i| spec.eigenvalues[i].sqrt()).collect();
    let mut factor = range_basis.adjoint();
    for (r, s) in sqrt_values.iter().enumerate() {
        factor.row_mut(r).iter_mut().for_each(|z| *z *= *s);
    }
    Ok(QuotientModel {
        ambient_dim: n,
        factor,
        range_basis,
        sqrt_values,
        null_basis,
    })
}

/// An antilinear map `v ↦ a · conj(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearMap {
    matrix: CMatrix,
}

impl AntilinearMap {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn conjugation(n: usize) -> Self {
        Self {
            matrix: identity(n),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v.map(|z| z.conj())
    }

    /// Applies the map to every column of `m`.
    pub fn apply_columns(&self, m: &CMatrix) -> CMatrix {
        &self.matrix * conj(m)
    }

    /// The linear map `self ∘ other`: `v ↦ a · conj(b) · v`.
    pub fn compose(&self, other: &AntilinearMap) -> CMatrix {
        &self.matrix * conj(&other.matrix)
    }

    /// `self ∘ M` for linear `M`.
    pub fn after_linear(&self, m: &CMatrix) -> AntilinearMap {
        AntilinearMap {
            matrix: &self.matrix * conj(m),
        }
    }

    /// `M ∘ self` for linear `M`.
    pub fn before_linear(&self, m: &CMatrix) -> AntilinearMap {
        AntilinearMap {
            matrix: m * &self.matrix,
        }
    }

    /// Adjoint with respect to `⟨v, w⟩ = w* v`: `⟨Av, w⟩ = conj⟨v, A*w⟩`.
    pub fn adjoint(&self) -> AntilinearMap {
        AntilinearMap {
            matrix: self.matrix.transpose(),
        }
    }

    /// `‖A∘A − 1‖_F`.
    pub fn involution_residual(&self) -> f64 {
        (self.compose(self) - identity(self.dim())).norm()
    }

    pub fn realify(&self) -> RMatrix {
        realify_antilinear(&self.matrix)
    }
}

/// Anti-unitary map `v ↦ u · conj(v)` with `u` unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiUnitaryMap {
    inner: AntilinearMap,
}

impl AntiUnitaryMap {
    pub fn new(u: CMatrix) -> Result<Self> {
        ensure_unitary(&u)?;
        Ok(Self {
            inner: AntilinearMap { matrix: u },
        })
    }

    /// Entrywise complex conjugation in the standard basis.
    pub fn conjugation(n: usize) -> Self {
        Self {
            inner: AntilinearMap::conjugation(n),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.inner.matrix
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn as_antilinear(&self) -> &AntilinearMap {
        &self.inner
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        self.inner.apply(v)
    }

    pub fn apply_columns(&self, m: &CMatrix) -> CMatrix {
        self.inner.apply_columns(m)
    }

    /// `‖u·conj(u) − 1‖_F`; zero iff `J² = 1`.
    pub fn involution_residual(&self) -> f64 {
        self.inner.involution_residual()
    }

    pub fn is_involutive(&self, tol: f64) -> bool {
        self.involution_residual() <= tol
    }

    /// Matrix of `v ↦ J(M(J v))`, namely `u · conj(M) · conj(u)`.
    pub fn conjugate(&self, m: &CMatrix) -> Result<CMatrix> {
        let n = check_square(m)?;
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: n,
            });
        }
        let u = self.matrix();
        Ok(u * conj(m) * conj(u))
    }

    pub fn realify(&self) -> RMatrix {
        self.inner.realify()
    }
}

/// Computes `J M J` as a linear matrix.
pub fn antiunitary_conjugate(j: &AntiUnitaryMap, m: &CMatrix) -> Result<CMatrix> {
    j.conjugate(m)
}

pub fn realify_vector(v: &CVector) -> RVector {
    let n = v.len();
    RVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

pub fn complexify_vector(x: &RVector) -> CVector {
    let n = x.len() / 2;
    CVector::from_fn(n, |i, _| Complex64::new(x[i], x[i + n]))
}

pub fn realify_columns(m: &CMatrix) -> RMatrix {
    let n = m.nrows();
    RMatrix::from_fn(2 * n, m.ncols(), |i, j| {
        if i < n {
            m[(i, j)].re
        } else {
            m[(i - n, j)].im
        }
    })
}

pub fn complexify_columns(m: &RMatrix) -> CMatrix {
    let n = m.nrows() / 2;
    CMatrix::from_fn(n, m.ncols(), |i, j| Complex64::new(m[(i, j)], m[(i + n, j)]))
}

/// Real `2n × 2n` matrix of a complex-linear map: `[[X, −Y], [Y, X]]`.
pub fn realify_linear(m: &CMatrix) -> RMatrix {
    let n = m.nrows();
    let k = m.ncols();
    RMatrix::from_fn(2 * n, 2 * k, |i, j| {
        let z = m[(i % n, j % k)];
        match (i < n, j < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Real matrix of `v ↦ a · conj(v)`: `[[X, Y], [Y, −X]]`.
pub fn realify_antilinear(a: &CMatrix) -> RMatrix {
    let n = a.nrows();
    RMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = a[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) => z.re,
            (false, false) => -z.re,
            _ => z.im,
        }
    })
}

/// Thin SVD of a real matrix: `(U, σ, V)` with `σ` nonincreasing.
pub fn svd_real(m: &RMatrix) -> Result<(RMatrix, Vec<f64>, RMatrix)> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok((RMatrix::zeros(r, 0), Vec::new(), RMatrix::zeros(c, 0)));
    }
    let svd = to_faer_real(m).svd().map_err(|_| Error::EigenFailure)?;
    let u = svd.U();
    let v = svd.V();
    let s = svd.S().column_vector();
    let k = r.min(c);
    let sig: Vec<f64> = (0..k).map(|i| s[i]).collect();
    let uu = RMatrix::from_fn(r, r, |i, j| u[(i, j)]);
    let vv = RMatrix::from_fn(c, c, |i, j| v[(i, j)]);
    Ok((uu, sig, vv))
}

/// Orthonormal basis of the column space (singular values above `rtol·σ_max`).
pub fn orthonormal_basis(m: &RMatrix, rtol: f64) -> Result<RMatrix> {
    let (u, s, _) = svd_real(m)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| x > rtol * smax && x > 0.0).count();
    Ok(u.columns(0, rank).into_owned())
}

/// Orthonormal basis of `{x : Mx = 0}` using singular values `≤ tol` (absolute).
pub fn null_space(m: &RMatrix, tol: f64) -> Result<RMatrix> {
    let c = m.ncols();
    let (_, s, v) = svd_real(m)?;
    let kept = (0..c).filter(|&j| j >= s.len() || s[j] <= tol);
    Ok(v.select_columns(kept.collect::<Vec<_>>().iter()))
}

pub fn numerical_rank(m: &RMatrix, rtol: f64) -> Result<usize> {
    let (_, s, _) = svd_real(m)?;
    let smax = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&x| x > rtol * smax && x > 0.0).count())
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal column bases. Returns 1 when the dimensions differ.
pub fn subspace_distance(a: &RMatrix, b: &RMatrix) -> Result<f64> {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return Ok(1.0);
    }
    if a.ncols() == 0 {
        return Ok(0.0);
    }
    let residual = b - a * (a.transpose() * b);
    let (_, s, _) = svd_real(&residual)?;
    Ok(s.first().copied().unwrap_or(0.0).min(1.0))
}

/// Moore–Penrose pseudo-inverse of a complex matrix (cutoff `rtol·σ_max`).
pub fn pinv(m: &CMatrix, rtol: f64) -> Result<CMatrix> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(CMatrix::zeros(c, r));
    }
    let svd = to_faer(m).thin_svd().map_err(|_| Error::EigenFailure)?;
    let u = svd.U();
    let v = svd.V();
    let s = svd.S().column_vector();
    let k = r.min(c);
    let smax = s[0].re;
    let mut out = CMatrix::zeros(c, r);
    for l in 0..k {
        let sl = s[l].re;
        if sl <= rtol * smax || sl == 0.0 {
            continue;
        }
        for i in 0..c {
            for j in 0..r {
                out[(i, j)] += v[(i, l)] * u[(j, l)].conj() / sl;
            }
        }
    }
    Ok(out)
}

/// Unitary factor `W V*` of the polar decomposition `m = (W V*)(V Σ V*)`.
pub fn polar_unitary(m: &CMatrix) -> Result<CMatrix> {
    check_square(m)?;
    check_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let svd = to_faer(m).svd().map_err(|_| Error::EigenFailure)?;
    let u = svd.U();
    let v = svd.V();
    Ok(CMatrix::from_fn(n, n, |i, j| (0..n).map(|l| u[(i, l)] * v[(j, l)].conj()).sum()))
}
