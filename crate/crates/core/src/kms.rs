//! Gibbs states on `M_n`, KMS conditions, the form-valued function `ψ`,
//! reflection positive functions `φ^{A,A}` and the modular data of the
//! Hilbert–Schmidt GNS representation.
//!
//! The GNS space is `M_n` with `⟨X, Y⟩ = tr(Y* X)`, `Ω = ρ^{1/2}` and
//! `π(A)X = AX`. Matrices are vectorized row-major, so
//! `vec(AXB) = (A ⊗ Bᵀ) vec(X)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gnsrep::SesqForm;
use crate::measures::AtomicOperatorMeasure;
use crate::numcore::{
    check_finite, check_square, eig_hermitian, ensure_hermitian, hermitian_asymmetry, hermitian_part, identity,
    psd_certificate, re, CMatrix, CVector, PsdCertificate, RMatrix, ScalarMap, SpectralDecomposition,
    DEFAULT_PSD_TOL, HERMITIAN_RTOL, IMAG, ONE,
};
use crate::rpfunc::CircleRPFunction;
use crate::standardsub::{check_lemma_identities, subspace_to_tomita, LemmaReport, ModularPair, StandardSubspace};

/// Number of samples used for `φ^{A,A}` when the state is not Gibbs.
pub const SAMPLE_POINTS: usize = 513;

/// `(M_n, α_t = Ad e^{ith}, ω = tr(ρ ·))`.
#[derive(Debug, Clone)]
pub struct GibbsSystem {
    h: CMatrix,
    beta: f64,
    rho: CMatrix,
    spectrum: SpectralDecomposition,
    /// Diagonal of `ρ` in the eigenbasis of `h`.
    populations: Vec<f64>,
    gibbs: bool,
}

fn ensure_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

impl GibbsSystem {
    /// Gibbs state `ρ = e^{−βh} / tr e^{−βh}`.
    pub fn new(h: CMatrix, beta: f64) -> Result<Self> {
        ensure_beta(beta)?;
        ensure_hermitian(&h)?;
        let h = hermitian_part(&h);
        let spectrum = eig_hermitian(&h)?;
        let emin = spectrum.min_eigenvalue().unwrap_or(0.0);
        let weights: Vec<f64> = spectrum.eigenvalues().iter().map(|e| (-beta * (e - emin)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let populations: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let u = spectrum.eigenvectors();
        let rho = hermitian_part(&(u * crate::numcore::diag_real(&populations) * u.adjoint()));
        Ok(Self {
            h,
            beta,
            rho,
            spectrum,
            populations,
            gibbs: true,
        })
    }

    /// The same dynamics with an arbitrary density matrix `ρ`.
    pub fn with_state(h: CMatrix, beta: f64, rho: CMatrix) -> Result<Self> {
        let base = Self::new(h, beta)?;
        let n = check_square(&rho)?;
        if n != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: n,
            });
        }
        check_finite(&rho)?;
        ensure_hermitian(&rho)?;
        let rho = hermitian_part(&rho);
        let cert = psd_certificate(&rho, DEFAULT_PSD_TOL)?;
        if !cert.is_psd {
            return Err(Error::NotPsd { min_eig: cert.min_eig });
        }
        let tr = rho.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidInput(format!("density matrix has trace {tr}")));
        }
        let u = base.spectrum.eigenvectors();
        let populations = (0..n).map(|i| (u.column(i).adjoint() * &rho * u.column(i))[(0, 0)].re).collect();
        Ok(Self {
            rho,
            populations,
            gibbs: false,
            ..base
        })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn is_gibbs(&self) -> bool {
        self.gibbs
    }

    pub fn energies(&self) -> &[f64] {
        self.spectrum.eigenvalues()
    }

    /// Diagonal of `ρ` in the energy eigenbasis (the Boltzmann weights for Gibbs states).
    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    /// `ω(A) = tr(ρA)`.
    pub fn omega(&self, a: &CMatrix) -> Complex64 {
        (&self.rho * a).trace()
    }

    /// `e^{izh}`.
    fn propagator(&self, z: Complex64) -> CMatrix {
        self.spectrum.map(|e| (IMAG * z * e).exp())
    }
}

/// `α_z(A) = e^{izh} A e^{−izh}`.
pub fn evolve(sys: &GibbsSystem, a: &CMatrix, z: Complex64) -> CMatrix {
    sys.propagator(z) * a * sys.propagator(-z)
}

/// `|ω(A α_{t+iβ}(B)) − ω(α_t(B) A)|`.
pub fn kms_residual(sys: &GibbsSystem, a: &CMatrix, b: &CMatrix, t: f64) -> f64 {
    let lhs = sys.omega(&(a * evolve(sys, b, Complex64::new(t, sys.beta))));
    let rhs = sys.omega(&(evolve(sys, b, re(t)) * a));
    (lhs - rhs).norm()
}

/// Row-major `vec`.
pub fn vec(x: &CMatrix) -> CVector {
    let (r, c) = x.shape();
    CVector::from_fn(r * c, |k, _| x[(k / c, k % c)])
}

pub fn unvec(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Matrix `F` of `ψ(z)(A, B) = ω(B* α_z(A)) = vec(B)* F vec(A)`.
pub fn psi_matrix(sys: &GibbsSystem, z: Complex64) -> CMatrix {
    kron(&sys.propagator(z), &(sys.propagator(-z) * &sys.rho).transpose())
}

/// `ψ(t)` as a sesquilinear form on `M_n ≅ ℂ^{n²}`.
pub fn psi_function(sys: &GibbsSystem, t: f64) -> SesqForm {
    SesqForm::new(psi_matrix(sys, re(t))).expect("square and finite")
}

/// `ψ(z)(A, B)` evaluated directly.
pub fn psi_value(sys: &GibbsSystem, z: Complex64, a: &CMatrix, b: &CMatrix) -> Complex64 {
    sys.omega(&(b.adjoint() * evolve(sys, a, z)))
}

/// Block matrix `[ψ(tₓ − t_y)]`.
pub fn psi_kernel(sys: &GibbsSystem, times: &[f64]) -> CMatrix {
    let d = sys.dim() * sys.dim();
    let m = times.len();
    let mut g = CMatrix::zeros(m * d, m * d);
    for x in 0..m {
        for y in 0..m {
            g.view_mut((x * d, y * d), (d, d))
                .copy_from(&psi_matrix(sys, re(times[x] - times[y])));
        }
    }
    g
}

/// `max_t ‖F(−t) − F(t)*‖_F`.
pub fn psi_symmetry_residual(sys: &GibbsSystem, times: &[f64]) -> f64 {
    times
        .iter()
        .map(|&t| (psi_matrix(sys, re(-t)) - psi_matrix(sys, re(t)).adjoint()).norm())
        .fold(0.0, f64::max)
}

/// Relative residuals of the two analytic continuation identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncontResiduals {
    /// `ψ(t + iβ)(A, B)` against `ψ(−t)(B*, A*)`.
    pub shifted: f64,
    /// `ψ(iβ − t)(A, B)` against `ψ(t)(B*, A*)`.
    pub reflected: f64,
}

pub fn kms_ancont_check(sys: &GibbsSystem, a: &CMatrix, b: &CMatrix, t: f64) -> AncontResiduals {
    let scale = (a.norm() * b.norm()).max(1e-300);
    let beta = sys.beta;
    let (a_adj, b_adj) = (a.adjoint(), b.adjoint());
    let shifted = (psi_value(sys, Complex64::new(t, beta), a, b) - psi_value(sys, re(-t), &b_adj, &a_adj)).norm();
    let reflected =
        (psi_value(sys, Complex64::new(-t, beta), a, b) - psi_value(sys, re(t), &b_adj, &a_adj)).norm();
    AncontResiduals {
        shifted: shifted / scale,
        reflected: reflected / scale,
    }
}

/// `φ^{A,A}(t) = ψ(it)(A, A) = tr(ρ A e^{−th} A e^{th})` for `A = A*`.
///
/// For Gibbs states the result is measure-backed: atoms at `E_k − E_i` with
/// weights `pᵢ |A_{ik}|²` in the energy basis form the symmetric measure, of
/// which the positive half (and half the atom at zero) is `μ₊`. Other states
/// give a sample-backed function on `SAMPLE_POINTS` uniform points.
pub fn rp_from_kms(sys: &GibbsSystem, a: &CMatrix) -> Result<CircleRPFunction> {
    let n = check_square(a)?;
    if n != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: n,
        });
    }
    let residual = hermitian_asymmetry(a);
    if residual > HERMITIAN_RTOL {
        return Err(Error::NotSelfAdjoint { residual });
    }
    let beta = sys.beta;
    if sys.gibbs {
        let u = sys.spectrum.eigenvectors();
        let ap = u.adjoint() * a * u;
        let e = sys.energies();
        let p = &sys.populations;
        let scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let mut atoms = Vec::new();
        for i in 0..n {
            for k in 0..n {
                let w = p[i] * ap[(i, k)].norm_sqr();
                if w == 0.0 {
                    continue;
                }
                let lambda = e[k] - e[i];
                if lambda.abs() <= 1e-12 * scale {
                    atoms.push((0.0, w / 2.0));
                } else if lambda > 0.0 {
                    atoms.push((lambda, w));
                }
            }
        }
        let mu = if atoms.is_empty() {
            AtomicOperatorMeasure::empty(1)
        } else {
            AtomicOperatorMeasure::scalar(&atoms)?
        };
        CircleRPFunction::from_measure(mu, beta)
    } else {
        let m = SAMPLE_POINTS - 1;
        let grid: Vec<f64> = (0..=m).map(|k| k as f64 * beta / m as f64).collect();
        let values = grid
            .iter()
            .map(|&t| CMatrix::from_element(1, 1, psi_value(sys, Complex64::new(0.0, t), a, a)))
            .collect();
        CircleRPFunction::from_samples(grid, values, beta)
    }
}

/// `L = h ⊗ 1 − 1 ⊗ hᵀ`, the generator of `π(α_t(A))Ω = e^{itL} π(A)Ω`.
pub fn liouvillian(sys: &GibbsSystem) -> CMatrix {
    let n = sys.dim();
    hermitian_part(&(kron(&sys.h, &identity(n)) - kron(&identity(n), &sys.h.transpose())))
}

/// `Ω = ρ^{1/2}` as a vector.
pub fn cyclic_vector(sys: &GibbsSystem) -> Result<CVector> {
    Ok(vec(&eig_hermitian(&sys.rho)?.apply_function(ScalarMap::Power(0.5))?))
}

/// `⟨e^{−tL} π(A)Ω, π(B)Ω⟩` and `‖e^{−βL/2} π(A)Ω‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorValue {
    pub value: Complex64,
    pub half_beta_norm: f64,
}

pub fn phi_via_generator(sys: &GibbsSystem, a: &CMatrix, b: &CMatrix, t: f64) -> Result<GeneratorValue> {
    let beta = sys.beta;
    if !(0.0..=beta).contains(&t) {
        return Err(Error::OutOfRange {
            value: t,
            lo: 0.0,
            hi: beta,
        });
    }
    let n = sys.dim();
    for m in [a, b] {
        if check_square(m)? != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            });
        }
    }
    let spec = eig_hermitian(&liouvillian(sys))?;
    let omega = unvec(&cyclic_vector(sys)?, n);
    let a_omega = vec(&(a * &omega));
    let b_omega = vec(&(b * &omega));
    let value = b_omega.dotc(&(spec.apply_function(ScalarMap::ExpScaled(t))? * &a_omega));
    let half = spec.apply_function(ScalarMap::ExpScaled(beta / 2.0))? * &a_omega;
    Ok(GeneratorValue {
        value,
        half_beta_norm: half.norm(),
    })
}

/// Sign convention of the modular flow reported by [`tomita_from_gibbs`].
pub const MODULAR_FLOW_CONVENTION: &str = "Delta^{-it} L_M Delta^{it} = L_{alpha_{beta t}(M)}";

/// Modular data of `(M_n, Ω)` and its checks.
#[derive(Debug, Clone)]
pub struct TomitaReport {
    pub subspace: StandardSubspace,
    pub pair: ModularPair,
    /// `‖Δ − ρ ⊗ (ρ⁻¹)ᵀ‖_F / ‖Δ‖_F`.
    pub delta_residual: f64,
    /// `J` against `X ↦ X*`.
    pub j_residual: f64,
    /// `max ‖[J L_A J, L_B]‖_F / (‖A‖‖B‖)` over samples.
    pub commutant_residual: f64,
    /// Sorted `Δ` eigenvalues against sorted `pᵢ/pⱼ`, relative.
    pub boltzmann_residual: f64,
    /// `max ‖Δ^{−it} L_M Δ^{it} − L_{α_{βt}(M)}‖_F / ‖M‖`.
    pub flow_residual: f64,
    pub flow_convention: &'static str,
    /// `‖−log Δ − βL‖_F / max(1, ‖βL‖_F)`.
    pub log_residual: f64,
    /// `‖Δ^{1/2} − e^{−H/2}‖_F` with `H = −log Δ`.
    pub half_power_residual: f64,
    /// `max |⟨AΩ, BΩ⟩ − ω(B*A)|` over samples.
    pub gns_residual: f64,
    pub cyclic_rank: usize,
    pub separating_rank: usize,
    pub lemma: LemmaReport,
    pub samples: usize,
}

impl TomitaReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.delta_residual,
            self.j_residual,
            self.commutant_residual,
            self.boltzmann_residual,
            self.flow_residual,
            self.log_residual,
            self.half_power_residual,
            self.gns_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        let full = self.pair.dim();
        self.max_residual() <= tol
            && self.cyclic_rank == full
            && self.separating_rank == full
            && self.lemma.passed(1e-9)
    }
}

/// Basis of the Hermitian matrices: `E_kk`, `(E_kl + E_lk)/√2`, `i(E_kl − E_lk)/√2`.
pub fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(k, k)] = ONE;
        out.push(e);
    }
    for k in 0..n {
        for l in k + 1..n {
            let mut sym = CMatrix::zeros(n, n);
            sym[(k, l)] = re(s);
            sym[(l, k)] = re(s);
            out.push(sym);
            let mut anti = CMatrix::zeros(n, n);
            anti[(k, l)] = IMAG * s;
            anti[(l, k)] = -IMAG * s;
            out.push(anti);
        }
    }
    out
}

fn swap_permutation(n: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            p[(i * n + j, j * n + i)] = ONE;
        }
    }
    p
}

fn column_rank(columns: &[CVector]) -> Result<usize> {
    let dim = columns.first().map_or(0, |c| c.len());
    let m = CMatrix::from_fn(dim, columns.len(), |i, j| columns[j][i]);
    let spec = eig_hermitian(&hermitian_part(&(&m * m.adjoint())))?;
    let scale = spec.spectral_norm().max(1e-300);
    Ok(spec.eigenvalues().iter().filter(|&&l| l > 1e-20 * scale).count())
}

/// Builds `V = {AΩ : A = A*}`, its modular pair, and checks it against the
/// closed forms `Δ = ρ · ρ⁻¹`, `J X = X*`.
pub fn tomita_from_gibbs(sys: &GibbsSystem, samples: usize, seed: u64) -> Result<TomitaReport> {
    let n = sys.dim();
    let nn = n * n;
    let rho_spec = eig_hermitian(&sys.rho)?;
    let min_eig = rho_spec.min_eigenvalue().unwrap_or(0.0);
    if min_eig <= 1e-12 * rho_spec.spectral_norm() {
        return Err(Error::NotSeparating { min_eig });
    }
    let omega = rho_spec.apply_function(ScalarMap::Power(0.5))?;
    let rho_inv = rho_spec.apply_function(ScalarMap::Power(-1.0))?;

    let basis = hermitian_basis(n);
    let columns = CMatrix::from_fn(nn, nn, |i, j| {
        let v = &basis[j] * &omega;
        v[(i / n, i % n)]
    });
    let subspace = StandardSubspace::from_complex_columns(&columns)?;
    let tomita = subspace_to_tomita(&subspace)?;
    let pair = tomita.pair.clone();

    let expected_delta = kron(&sys.rho, &rho_inv.transpose());
    let delta_residual = (pair.delta() - &expected_delta).norm() / expected_delta.norm();
    let j_residual = (pair.j().matrix() - swap_permutation(n)).norm();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = |m: &CMatrix| kron(m, &identity(n));
    let mut commutant_residual: f64 = 0.0;
    let mut flow_residual: f64 = 0.0;
    let mut gns_residual: f64 = 0.0;
    for k in 0..samples {
        let a = crate::random::complex_matrix(&mut rng, n, n);
        let b = crate::random::complex_matrix(&mut rng, n, n);
        let jaj = pair.j().conjugate(&left(&a))?;
        let comm = &jaj * left(&b) - left(&b) * &jaj;
        commutant_residual = commutant_residual.max(comm.norm() / (a.norm() * b.norm()));

        let t = (k as f64 + 1.0) * 0.37 - 1.0;
        let flowed = pair.delta_it(-t) * left(&a) * pair.delta_it(t);
        let target = left(&evolve(sys, &a, re(sys.beta * t)));
        flow_residual = flow_residual.max((flowed - target).norm() / a.norm());

        let ip = vec(&(&b * &omega)).dotc(&vec(&(&a * &omega)));
        gns_residual = gns_residual.max((ip - sys.omega(&(b.adjoint() * &a))).norm());
    }

    let mut ratios: Vec<f64> = Vec::with_capacity(nn);
    let p = rho_spec.eigenvalues();
    for i in 0..n {
        for j in 0..n {
            ratios.push(p[i] / p[j]);
        }
    }
    ratios.sort_by(f64::total_cmp);
    let delta_eigs = eig_hermitian(pair.delta())?;
    let boltzmann_residual = delta_eigs
        .eigenvalues()
        .iter()
        .zip(&ratios)
        .map(|(x, y)| (x - y).abs() / y.max(1.0))
        .fold(0.0, f64::max);

    let h_mod = -pair.generator();
    let beta_l = liouvillian(sys) * re(sys.beta);
    let log_residual = (&h_mod - &beta_l).norm() / beta_l.norm().max(1.0);
    let half = eig_hermitian(&hermitian_part(&h_mod))?.apply_function(ScalarMap::ExpScaled(0.5))?;
    let half_power_residual = (pair.delta_power(0.5) - half).norm();

    let mut cyclic = Vec::with_capacity(nn);
    let mut separating = Vec::with_capacity(nn);
    for i in 0..n {
        for j in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(i, j)] = ONE;
            cyclic.push(vec(&(&e * &omega)));
            separating.push(vec(&(&omega * &e)));
        }
    }
    let cyclic_rank = column_rank(&cyclic)?;
    let separating_rank = column_rank(&separating)?;

    let lemma = check_lemma_identities(&subspace, &pair, samples.max(1), seed)?;
    Ok(TomitaReport {
        subspace,
        pair,
        delta_residual,
        j_residual,
        commutant_residual,
        boltzmann_residual,
        flow_residual,
        flow_convention: MODULAR_FLOW_CONVENTION,
        log_residual,
        half_power_residual,
        gns_residual,
        cyclic_rank,
        separating_rank,
        lemma,
        samples,
    })
}

/// `2n² × n²` realified basis of `V` (exposed for cross-checks).
pub fn realified_hermitian_subspace(sys: &GibbsSystem) -> Result<RMatrix> {
    let n = sys.dim();
    let omega = unvec(&cyclic_vector(sys)?, n);
    let cols: Vec<CVector> = hermitian_basis(n).iter().map(|a| vec(&(a * &omega))).collect();
    let m = CMatrix::from_fn(n * n, cols.len(), |i, j| cols[j][i]);
    Ok(crate::numcore::realify_columns(&m))
}

/// PSD certificate of [`psi_kernel`].
pub fn psi_kernel_certificate(sys: &GibbsSystem, times: &[f64], tol: f64) -> Result<PsdCertificate> {
    psd_certificate(&hermitian_part(&psi_kernel(sys, times)), tol)
}
