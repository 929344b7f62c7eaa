//! Positive definite kernels with values in sesquilinear forms, the GNS
//! construction on cyclic groups, reflection positive Hilbert spaces and
//! Osterwalder–Schrader quantization.
//!
//! Forms are linear in the first argument: `form(v, w) = w* F v`. A block
//! kernel `K` over points `x, y` is flattened so that block `(x, y)` of the
//! Gram matrix is the matrix of `K(x, y)`; the feature vectors
//! `k_{x,v} = B(e_x ⊗ v)` of the Gram factor `G = B*B` then satisfy
//! `⟨k_{y,w}, k_{x,v}⟩ = K(x, y)(w, v)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numcore::{
    check_finite, check_square, ensure_unitary, gram_quotient, hermitian_asymmetry, identity,
    psd_certificate, unitarity_residual, CMatrix, CVector, PsdCertificate, QuotientModel,
    DEFAULT_PSD_TOL, HERMITIAN_RTOL, ONE, ZERO,
};

/// Absolute tolerance for representation identities.
pub const REP_TOL: f64 = 1e-10;

/// Sesquilinear form `(v, w) ↦ w* F v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SesqForm {
    matrix: CMatrix,
}

impl SesqForm {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eval(&self, v: &CVector, w: &CVector) -> Complex64 {
        w.dotc(&(&self.matrix * v))
    }

    pub fn is_hermitian(&self) -> bool {
        hermitian_asymmetry(&self.matrix) <= HERMITIAN_RTOL
    }

    pub fn psd_certificate(&self, tol: f64) -> Result<PsdCertificate> {
        psd_certificate(&self.matrix, tol)
    }
}

/// Standard basis vector `e_i` of `ℂⁿ`.
pub fn basis_vector(n: usize, i: usize) -> CVector {
    CVector::from_fn(n, |k, _| if k == i { ONE } else { ZERO })
}

/// Kernel samples `K(x, y)` over `points` indices, each a `dim × dim` matrix.
#[derive(Debug, Clone)]
pub struct BlockKernel {
    points: usize,
    dim: usize,
    blocks: Vec<CMatrix>,
}

impl BlockKernel {
    pub fn from_fn<F: FnMut(usize, usize) -> CMatrix>(points: usize, dim: usize, mut f: F) -> Result<Self> {
        let mut blocks = Vec::with_capacity(points * points);
        for x in 0..points {
            for y in 0..points {
                let b = f(x, y);
                let d = check_square(&b)?;
                if d != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: d,
                    });
                }
                check_finite(&b)?;
                blocks.push(b);
            }
        }
        Ok(Self {
            points,
            dim,
            blocks,
        })
    }

    /// Splits a flattened `(points·dim)²` matrix into blocks.
    pub fn from_flattened(points: usize, dim: usize, g: &CMatrix) -> Result<Self> {
        let n = check_square(g)?;
        if n != points * dim {
            return Err(Error::DimensionMismatch {
                expected: points * dim,
                found: n,
            });
        }
        Self::from_fn(points, dim, |x, y| g.view((x * dim, y * dim), (dim, dim)).into_owned())
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self, x: usize, y: usize) -> &CMatrix {
        &self.blocks[x * self.points + y]
    }

    pub fn flattened(&self) -> CMatrix {
        let d = self.dim;
        let m = self.points;
        let mut g = CMatrix::zeros(m * d, m * d);
        for x in 0..m {
            for y in 0..m {
                g.view_mut((x * d, y * d), (d, d)).copy_from(self.block(x, y));
            }
        }
        g
    }
}

/// Reproducing kernel Hilbert space of a block kernel, as a Gram quotient.
#[derive(Debug, Clone)]
pub struct RkhsModel {
    kernel: BlockKernel,
    quotient: QuotientModel,
}

impl RkhsModel {
    pub fn dim(&self) -> usize {
        self.quotient.rank()
    }

    pub fn quotient(&self) -> &QuotientModel {
        &self.quotient
    }

    /// `k_{x,v}` in model coordinates.
    pub fn feature(&self, x: usize, v: &CVector) -> CVector {
        let d = self.kernel.dim;
        let mut coords = CVector::zeros(self.kernel.points * d);
        coords.rows_mut(x * d, d).copy_from(v);
        self.quotient.project(&coords)
    }

    /// Largest `|⟨k_{y,w}, k_{x,v}⟩ − K(x,y)(w,v)|` over points and basis vectors.
    pub fn reproducing_residual(&self) -> f64 {
        let d = self.kernel.dim;
        let m = self.kernel.points;
        let mut worst: f64 = 0.0;
        for x in 0..m {
            for y in 0..m {
                let k = self.kernel.block(x, y);
                for a in 0..d {
                    for b in 0..d {
                        let v = basis_vector(d, a);
                        let w = basis_vector(d, b);
                        let lhs = self.feature(x, &v).dotc(&self.feature(y, &w));
                        let rhs = w.dotc(&(k * &v));
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Realizes `H_K` from the flattened Gram matrix of `K`.
pub fn kernel_to_rkhs(kernel: &BlockKernel, tol: f64) -> Result<RkhsModel> {
    let g = kernel.flattened();
    let residual = hermitian_asymmetry(&g);
    if residual > HERMITIAN_RTOL {
        return Err(Error::NotHermitian { residual });
    }
    let quotient = gram_quotient(&g, tol)?;
    Ok(RkhsModel {
        kernel: kernel.clone(),
        quotient,
    })
}

/// A form-valued function on `Z_N` whose kernel `K(g, h) = φ(g − h)` is PSD.
#[derive(Debug, Clone)]
pub struct SesqPDFunction {
    values: Vec<CMatrix>,
    dim: usize,
    certificate: PsdCertificate,
}

impl SesqPDFunction {
    /// `values[k]` is the matrix of `φ(k)`, `k = 0..N`.
    pub fn new(values: Vec<CMatrix>, tol: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("cyclic group order must be positive".into()));
        }
        let dim = check_square(&values[0])?;
        let n = values.len();
        let kernel = BlockKernel::from_fn(n, dim, |g, h| values[(g + n - h) % n].clone())?;
        let g = kernel.flattened();
        let residual = hermitian_asymmetry(&g);
        if residual > HERMITIAN_RTOL {
            return Err(Error::NotHermitian { residual });
        }
        let certificate = psd_certificate(&g, tol)?;
        if !certificate.is_psd {
            return Err(Error::NotPsd {
                min_eig: certificate.min_eig,
            });
        }
        Ok(Self {
            values,
            dim,
            certificate,
        })
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, k: i64) -> &CMatrix {
        let n = self.values.len() as i64;
        &self.values[k.rem_euclid(n) as usize]
    }

    pub fn certificate(&self) -> &PsdCertificate {
        &self.certificate
    }

    pub fn kernel(&self) -> BlockKernel {
        let n = self.order();
        BlockKernel::from_fn(n, self.dim, |g, h| self.values[(g + n - h) % n].clone())
            .expect("validated on construction")
    }

    /// `max_k ‖φ(−k) − φ(k)‖_F`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.order() as i64;
        (0..n)
            .map(|k| (self.value(-k) - self.value(k)).norm())
            .fold(0.0, f64::max)
    }
}

/// GNS model `(π, j)` of a positive definite function on `Z_N`.
#[derive(Debug, Clone)]
pub struct GnsModel {
    order: usize,
    dim_v: usize,
    quotient: QuotientModel,
    pi: Vec<CMatrix>,
    j: CMatrix,
    symmetric: bool,
}

fn translation(n: usize, d: usize, g: usize) -> CMatrix {
    // e_h ⊗ v ↦ e_{h−g} ⊗ v
    let mut p = CMatrix::zeros(n * d, n * d);
    for h in 0..n {
        let target = (h + n - g % n) % n;
        for a in 0..d {
            p[(target * d + a, h * d + a)] = ONE;
        }
    }
    p
}

fn reflection_perm(n: usize, d: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n * d, n * d);
    for h in 0..n {
        let target = (n - h) % n;
        for a in 0..d {
            p[(target * d + a, h * d + a)] = ONE;
        }
    }
    p
}

/// Builds `H_φ` from `K(g, h) = φ(g − h)` with `j(v) = k_{0,v}` and
/// `π(g) k_{x,v} = k_{x−g,v}`.
pub fn gns_construct(phi: &SesqPDFunction, tol: f64) -> Result<GnsModel> {
    let n = phi.order();
    let d = phi.dim();
    let quotient = gram_quotient(&phi.kernel().flattened(), tol)?;
    let b = quotient.factor();
    let binv = quotient.right_inverse();
    let pi = (0..n)
        .map(|g| b * translation(n, d, g) * &binv)
        .collect::<Vec<_>>();
    let j = b.columns(0, d).into_owned();
    let symmetric = phi.symmetry_residual() <= REP_TOL * phi.value(0).norm().max(1.0);
    Ok(GnsModel {
        order: n,
        dim_v: d,
        quotient,
        pi,
        j,
        symmetric,
    })
}

impl GnsModel {
    pub fn dim(&self) -> usize {
        self.quotient.rank()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn quotient(&self) -> &QuotientModel {
        &self.quotient
    }

    pub fn representation(&self, g: i64) -> &CMatrix {
        &self.pi[g.rem_euclid(self.order as i64) as usize]
    }

    /// The embedding `j: V → H_φ` as a `dim × d` matrix.
    pub fn embedding(&self) -> &CMatrix {
        &self.j
    }

    /// Largest `|φ(g)(v, w) − ⟨π(g) j v, j w⟩|` over `g` and basis vectors.
    pub fn reconstruction_residual(&self, phi: &SesqPDFunction) -> f64 {
        let mut worst: f64 = 0.0;
        for g in 0..self.order as i64 {
            let model = self.j.adjoint() * self.representation(g) * &self.j;
            worst = worst.max((model - phi.value(g)).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        worst
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.pi.iter().map(unitarity_residual).fold(0.0, f64::max)
    }

    /// `max_{g,h} ‖π(g)π(h) − π(g+h)‖_F`.
    pub fn homomorphism_residual(&self) -> f64 {
        let n = self.order as i64;
        let mut worst: f64 = 0.0;
        for g in 0..n {
            for h in 0..n {
                let lhs = self.representation(g) * self.representation(h);
                worst = worst.max((lhs - self.representation(g + h)).norm());
            }
        }
        worst
    }

    /// Dimension of `span{π(g) j v}`.
    pub fn cyclic_rank(&self) -> usize {
        let d = self.dim_v;
        let mut span = CMatrix::zeros(self.dim(), self.order * d);
        for g in 0..self.order {
            span.columns_mut(g * d, d).copy_from(&(&self.pi[g] * &self.j));
        }
        let spec = crate::numcore::eig_hermitian(&(&span * span.adjoint())).expect("Gram is Hermitian");
        let scale = spec.spectral_norm().max(1e-300);
        spec.eigenvalues().iter().filter(|&&l| l > 1e-10 * scale).count()
    }

    /// The reflection `θ k_{x,v} = k_{−x,v}`, defined when `φ(−k) = φ(k)`.
    pub fn reflection(&self) -> Result<CMatrix> {
        if !self.symmetric {
            return Err(Error::InvalidInput(
                "reflection requires a symmetric function φ(−k) = φ(k)".into(),
            ));
        }
        let b = self.quotient.factor();
        Ok(b * reflection_perm(self.order, self.dim_v) * self.quotient.right_inverse())
    }
}

/// `(E, E₊, θ)` with `θ` a unitary involution and `E₊` spanned by the
/// columns of `e_plus`.
#[derive(Debug, Clone)]
pub struct RPHilbertSpace {
    theta: CMatrix,
    e_plus: CMatrix,
}

impl RPHilbertSpace {
    pub fn new(theta: CMatrix, e_plus: CMatrix) -> Result<Self> {
        ensure_unitary(&theta)?;
        let n = theta.nrows();
        let residual = (&theta * &theta - identity(n)).norm();
        if residual > 1e-12 * (n as f64).sqrt().max(1.0) {
            return Err(Error::NotInvolutive { residual });
        }
        if e_plus.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: e_plus.nrows(),
            });
        }
        check_finite(&e_plus)?;
        Ok(Self { theta, e_plus })
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }

    pub fn e_plus(&self) -> &CMatrix {
        &self.e_plus
    }

    pub fn ambient_dim(&self) -> usize {
        self.theta.nrows()
    }

    /// `G[k, j] = ⟨θuⱼ, uₖ⟩ = uₖ* θ uⱼ`.
    pub fn twisted_gram(&self) -> CMatrix {
        self.e_plus.adjoint() * &self.theta * &self.e_plus
    }
}

/// The OS quotient `Ê = E₊/N`: coordinates `c ↦ Bc` with
/// `⟨q(c), q(c')⟩ = ⟨θEc, Ec'⟩`.
#[derive(Debug, Clone)]
pub struct OsQuotient {
    pub quotient: QuotientModel,
    pub certificate: PsdCertificate,
}

impl OsQuotient {
    pub fn dim(&self) -> usize {
        self.quotient.rank()
    }

    pub fn q(&self, coords: &CVector) -> CVector {
        self.quotient.project(coords)
    }

    /// `‖B*B − G‖_F / ‖G‖_F` against the twisted Gram matrix.
    pub fn isometry_residual(&self, rph: &RPHilbertSpace) -> f64 {
        self.quotient.factor_residual(&rph.twisted_gram())
    }
}

pub fn os_quantize(rph: &RPHilbertSpace, tol: f64) -> Result<OsQuotient> {
    let g = rph.twisted_gram();
    let certificate = psd_certificate(&g, tol)?;
    if !certificate.is_psd {
        return Err(Error::NotThetaPositive {
            min_eig: certificate.min_eig,
        });
    }
    let quotient = gram_quotient(&g, tol)?;
    Ok(OsQuotient {
        quotient,
        certificate,
    })
}

/// The induced operator `T̂ q(c) = q(C c)` where `T E = E C`.
pub fn descend_operator(rph: &RPHilbertSpace, os: &OsQuotient, t: &CMatrix, tol: f64) -> Result<CMatrix> {
    let n = check_square(t)?;
    if n != rph.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: rph.ambient_dim(),
            found: n,
        });
    }
    let e = rph.e_plus();
    let te = t * e;
    let c = crate::numcore::pinv(e, 1e-12)? * &te;
    let invariance = (&te - e * &c).norm();
    if invariance > tol * te.norm().max(1.0) {
        return Err(Error::NotInvariant {
            residual: invariance,
        });
    }
    let b = os.quotient.factor();
    let null = os.quotient.null_basis();
    let leak = (b * &c * null).norm();
    if leak > tol * c.norm().max(1.0) {
        return Err(Error::NullSpaceNotPreserved { residual: leak });
    }
    Ok(b * c * os.quotient.right_inverse())
}

/// Outcome of [`check_rp_conditions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpConditions {
    /// `max_k ‖π(−k) − θπ(k)θ‖_F`.
    pub rp1_residual: f64,
    pub rp1: bool,
    /// `H = {0}` for the circle, so `π(H)E₊ = E₊` holds trivially.
    pub rp2: bool,
    pub rp2_trivial: bool,
    /// All vectors are smooth in finite dimensions.
    pub rp3_vacuous: bool,
}

/// Checks `π(−k) = θπ(k)θ` for a unitary representation of `Z_N`.
pub fn check_rp_conditions(pi: &[CMatrix], theta: &CMatrix, e_plus: &CMatrix, tol: f64) -> Result<RpConditions> {
    let n = pi.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty representation".into()));
    }
    let dim = check_square(theta)?;
    if e_plus.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: e_plus.nrows(),
        });
    }
    let mut rep_residual: f64 = (&pi[0] - identity(dim)).norm();
    for p in pi {
        if check_square(p)? != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.nrows(),
            });
        }
        rep_residual = rep_residual.max(unitarity_residual(p));
    }
    for g in 0..n {
        for h in 0..n {
            rep_residual = rep_residual.max((&pi[g] * &pi[h] - &pi[(g + h) % n]).norm());
        }
    }
    if rep_residual > REP_TOL {
        return Err(Error::NotRepresentation {
            residual: rep_residual,
        });
    }
    let rp1_residual = (0..n)
        .map(|k| (&pi[(n - k) % n] - theta * &pi[k] * theta).norm())
        .fold(0.0, f64::max);
    Ok(RpConditions {
        rp1_residual,
        rp1: rp1_residual <= tol,
        rp2: true,
        rp2_trivial: true,
        rp3_vacuous: true,
    })
}

/// Scalar character `k ↦ e^{2πik/N}` on `Z_N` as 1×1 matrices.
pub fn character(n: usize, m: i64) -> Vec<CMatrix> {
    (0..n)
        .map(|k| {
            let phase = 2.0 * std::f64::consts::PI * (m * k as i64) as f64 / n as f64;
            CMatrix::from_element(1, 1, Complex64::from_polar(1.0, phase))
        })
        .collect()
}

/// Default tolerance for kernels built by this module.
pub const DEFAULT_TOL: f64 = DEFAULT_PSD_TOL;
