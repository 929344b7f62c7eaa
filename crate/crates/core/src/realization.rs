//! Euclidean realizations of unitary one-parameter groups `e^{itH}` by
//! reflection positive functions on the circle, and the dual picture in the
//! finite `L²(μ)` model.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{symmetrize_from_plus, AtomicOperatorMeasure};
use crate::numcore::{
    check_square, diag_real, eig_hermitian, ensure_hermitian, ensure_unitary, gram_quotient, hermitian_part,
    identity, psd_certificate, re, unitarity_residual, AntiUnitaryMap, CMatrix, PsdCertificate, ScalarMap,
    SpectralDecomposition, DEFAULT_PSD_TOL,
};
use crate::rpfunc::{spectral_measure, CircleRPFunction};

/// Relative gap for clustering eigenvalues.
pub const CLUSTER_RTOL: f64 = 1e-8;

/// `t ↦ e^{itH}`.
#[derive(Debug, Clone)]
pub struct OneParameterGroup {
    generator: CMatrix,
    spectrum: SpectralDecomposition,
}

impl OneParameterGroup {
    pub fn new(h: CMatrix) -> Result<Self> {
        ensure_hermitian(&h)?;
        let generator = hermitian_part(&h);
        let spectrum = eig_hermitian(&generator)?;
        Ok(Self { generator, spectrum })
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn at(&self, t: f64) -> CMatrix {
        self.spectrum.map(|l| Complex64::from_polar(1.0, t * l))
    }

    /// `e^{−zH}` for complex `z`.
    pub fn semigroup(&self, z: Complex64) -> CMatrix {
        self.spectrum.map(|l| (-z * l).exp())
    }

    pub fn group_law_residual(&self, s: f64, t: f64) -> f64 {
        (self.at(s) * self.at(t) - self.at(s + t)).norm()
    }

    pub fn unitarity_residual(&self, t: f64) -> f64 {
        unitarity_residual(&self.at(t))
    }
}

/// A cluster of (numerically) equal eigenvalues.
#[derive(Debug, Clone)]
struct Cluster {
    value: f64,
    start: usize,
    len: usize,
}

fn clusters(spec: &SpectralDecomposition) -> (Vec<Cluster>, f64) {
    let vals = spec.eigenvalues();
    let tol = CLUSTER_RTOL * spec.spectral_norm().max(1.0);
    let mut out = Vec::new();
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && vals[end] - vals[end - 1] <= tol {
            end += 1;
        }
        let value = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.push(Cluster {
            value,
            start,
            len: end - start,
        });
        start = end;
    }
    (out, tol)
}

/// One row of the pairing table: `λ > 0` against `−λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPairing {
    pub lambda: f64,
    pub multiplicity: usize,
    /// Matched `−λ` cluster value, if any.
    pub partner: Option<f64>,
    pub partner_multiplicity: usize,
}

impl EigenPairing {
    pub fn balanced(&self) -> bool {
        self.partner.is_some() && self.multiplicity == self.partner_multiplicity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JExistence {
    pub exists: bool,
    pub pairing: Vec<EigenPairing>,
    pub zero_multiplicity: usize,
}

impl fmt::Display for JExistence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>14} {:>5}   {:>14} {:>5}", "lambda", "mult", "-lambda", "mult")?;
        for p in &self.pairing {
            match p.partner {
                Some(q) => writeln!(
                    f,
                    "{:>14.6e} {:>5}   {:>14.6e} {:>5}",
                    p.lambda, p.multiplicity, q, p.partner_multiplicity
                )?,
                None if p.lambda > 0.0 => {
                    writeln!(f, "{:>14.6e} {:>5}   {:>14} {:>5}", p.lambda, p.multiplicity, "-", 0)?
                }
                None => writeln!(f, "{:>14} {:>5}   {:>14.6e} {:>5}", "-", 0, p.lambda, p.multiplicity)?,
            }
        }
        write!(f, "zero modes: {}", self.zero_multiplicity)
    }
}

/// Positive clusters with their partners, unmatched negative clusters, kernel.
type ClusterPairing = (Vec<(Cluster, Option<Cluster>)>, Vec<Cluster>, Option<Cluster>);

fn pair_clusters(spec: &SpectralDecomposition) -> ClusterPairing {
    let (cs, tol) = clusters(spec);
    let mut zero = None;
    let mut negatives: Vec<Cluster> = Vec::new();
    let mut positives: Vec<Cluster> = Vec::new();
    for c in cs {
        if c.value.abs() <= tol {
            zero = Some(c);
        } else if c.value < 0.0 {
            negatives.push(c);
        } else {
            positives.push(c);
        }
    }
    let mut used = vec![false; negatives.len()];
    let mut pairs = Vec::new();
    for p in positives {
        let hit = negatives
            .iter()
            .enumerate()
            .filter(|(i, n)| !used[*i] && (n.value + p.value).abs() <= tol)
            .min_by(|a, b| (a.1.value + p.value).abs().total_cmp(&(b.1.value + p.value).abs()))
            .map(|(i, _)| i);
        if let Some(i) = hit {
            used[i] = true;
        }
        pairs.push((p, hit.map(|i| negatives[i].clone())));
    }
    let unmatched = negatives
        .into_iter()
        .zip(used)
        .filter(|(_, u)| !u)
        .map(|(c, _)| c)
        .collect();
    (pairs, unmatched, zero)
}

fn existence_from(spec: &SpectralDecomposition) -> JExistence {
    let (pairs, unmatched, zero) = pair_clusters(spec);
    let mut pairing: Vec<EigenPairing> = pairs
        .iter()
        .map(|(p, q)| EigenPairing {
            lambda: p.value,
            multiplicity: p.len,
            partner: q.as_ref().map(|q| q.value),
            partner_multiplicity: q.as_ref().map_or(0, |q| q.len),
        })
        .collect();
    pairing.extend(unmatched.iter().map(|c| EigenPairing {
        lambda: c.value,
        multiplicity: c.len,
        partner: None,
        partner_multiplicity: 0,
    }));
    let exists = pairing.iter().all(EigenPairing::balanced);
    JExistence {
        exists,
        pairing,
        zero_multiplicity: zero.map_or(0, |z| z.len),
    }
}

/// Whether `mult(λ) = mult(−λ)` for every eigenvalue `λ ≠ 0` of `H`.
pub fn check_j_existence(h: &CMatrix) -> Result<JExistence> {
    ensure_hermitian(h)?;
    Ok(existence_from(&eig_hermitian(&hermitian_part(h))?))
}

/// Eigenvector blocks `(P_λ, P_{−λ})` for balanced pairs plus the kernel basis.
struct PairedBasis {
    plus: CMatrix,
    plus_values: Vec<f64>,
    minus: CMatrix,
    zero: CMatrix,
}

fn paired_basis(spec: &SpectralDecomposition) -> std::result::Result<PairedBasis, String> {
    let existence = existence_from(spec);
    if !existence.exists {
        return Err(existence.to_string());
    }
    let (pairs, _, zero) = pair_clusters(spec);
    let n = spec.dim();
    let u = spec.eigenvectors();
    let k: usize = pairs.iter().map(|(p, _)| p.len).sum();
    let mut plus = CMatrix::zeros(n, k);
    let mut minus = CMatrix::zeros(n, k);
    let mut plus_values = Vec::with_capacity(k);
    let mut col = 0;
    for (p, q) in &pairs {
        let q = q.as_ref().expect("balanced pairing");
        plus.columns_mut(col, p.len).copy_from(&u.columns(p.start, p.len));
        minus.columns_mut(col, p.len).copy_from(&u.columns(q.start, q.len));
        plus_values.extend_from_slice(&spec.eigenvalues()[p.start..p.start + p.len]);
        col += p.len;
    }
    let zero = match zero {
        Some(z) => u.columns(z.start, z.len).into_owned(),
        None => CMatrix::zeros(n, 0),
    };
    Ok(PairedBasis {
        plus,
        plus_values,
        minus,
        zero,
    })
}

/// Anti-unitary involution `J` with `JHJ = −H`: conjugation on the kernel
/// and `P_λ e_k ↔ P_{−λ} e_k` between paired eigenspaces.
pub fn construct_j(h: &CMatrix) -> Result<AntiUnitaryMap> {
    ensure_hermitian(h)?;
    let spec = eig_hermitian(&hermitian_part(h))?;
    let b = paired_basis(&spec).map_err(|table| Error::NoSuchJ { table })?;
    let u = &b.zero * b.zero.transpose() + &b.minus * b.plus.transpose() + &b.plus * b.minus.transpose();
    AntiUnitaryMap::new(u)
}

/// Unitary involution `R` with `RHR = −H`.
pub fn construct_r(h: &CMatrix) -> Result<CMatrix> {
    ensure_hermitian(h)?;
    let spec = eig_hermitian(&hermitian_part(h))?;
    let b = paired_basis(&spec).map_err(|table| Error::NoSuchR { table })?;
    Ok(&b.zero * b.zero.adjoint() + &b.minus * b.plus.adjoint() + &b.plus * b.minus.adjoint())
}

/// `(φ, j, J, R)` realizing `e^{itH}` with `φ(t) = e^{−tA} + e^{−(β−t)A} = j* e^{−tH} j`.
#[derive(Debug, Clone)]
pub struct RealizationBundle {
    pub phi: CircleRPFunction,
    /// `A = diag` of the positive eigenvalues of `H`.
    pub a: CMatrix,
    /// `j = P + Q e^{−βA/2}` (`n × k`).
    pub j: CMatrix,
    pub jmap: AntiUnitaryMap,
    pub r: CMatrix,
    pub group: OneParameterGroup,
    pub beta: f64,
}

pub fn euclidean_realize(h: &CMatrix, beta: f64) -> Result<RealizationBundle> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidBeta(beta));
    }
    let group = OneParameterGroup::new(h.clone())?;
    let spec = group.spectrum();
    let existence = existence_from(spec);
    if existence.zero_multiplicity > 0 {
        return Err(Error::ZeroMode {
            multiplicity: existence.zero_multiplicity,
        });
    }
    if !existence.exists {
        return Err(Error::AsymmetricSpectrum {
            table: existence.to_string(),
        });
    }
    let b = paired_basis(spec).map_err(|table| Error::AsymmetricSpectrum { table })?;
    let jmap = construct_j(group.generator())?;
    let r = construct_r(group.generator())?;
    let damp: Vec<f64> = b.plus_values.iter().map(|l| (-beta * l / 2.0).exp()).collect();
    let j = &b.plus + &b.minus * diag_real(&damp);
    let a = diag_real(&b.plus_values);
    let phi = CircleRPFunction::from_generator(a.clone(), beta)?;
    Ok(RealizationBundle {
        phi,
        a,
        j,
        jmap,
        r,
        group,
        beta,
    })
}

impl RealizationBundle {
    /// `‖JHJ + H‖_F`.
    pub fn j_commutation_residual(&self) -> f64 {
        let h = self.group.generator();
        (self.jmap.conjugate(h).expect("same dimension") + h).norm()
    }

    /// `‖RHR + H‖_F`.
    pub fn r_residual(&self) -> f64 {
        let h = self.group.generator();
        (&self.r * h * &self.r + h).norm()
    }

    /// `max_t ‖φ(β−t) − φ(t)‖_F`.
    pub fn symmetry_residual(&self, grid: &[f64]) -> f64 {
        self.phi.symmetry_residual(grid)
    }

    /// `‖R e^{−βH/2} j − j‖_F` and `‖J e^{−βH/2} j − j‖_F`.
    pub fn fix_residuals(&self) -> (f64, f64) {
        let half = self.group.semigroup(re(self.beta / 2.0));
        let hj = &half * &self.j;
        ((&self.r * &hj - &self.j).norm(), (self.jmap.apply_columns(&hj) - &self.j).norm())
    }

    /// `j* E j` for the spectral measure `E` of `H`.
    pub fn pulled_back_measure(&self) -> Result<AtomicOperatorMeasure> {
        let e = spectral_measure(self.group.spectrum(), true)?;
        let atoms = e
            .atoms()
            .iter()
            .map(|at| (at.lambda, hermitian_part(&(self.j.adjoint() * &at.weight * &self.j))))
            .collect();
        AtomicOperatorMeasure::new(self.j.ncols(), atoms)
    }

    /// Distance between `μ` of `φ` and `dE₊(λ) + e^{βλ} dE₊(−λ)` built from
    /// the spectral data of `A`, and between `μ` and `j* E j`.
    pub fn measure_identity_residuals(&self) -> Result<(f64, f64)> {
        let mu = self.phi.measure()?;
        let e_plus = spectral_measure(&eig_hermitian(&self.a)?, true)?;
        let built = symmetrize_from_plus(&e_plus, self.phi.circle())?;
        Ok((mu.distance(&built), mu.distance(&self.pulled_back_measure()?)))
    }
}

/// `max_t ‖φ(t) − j* e^{−tH} j‖_F` with the bundle's `j`.
pub fn dilation_residual(bundle: &RealizationBundle, grid: &[f64]) -> Result<f64> {
    dilation_residual_with(bundle, &bundle.j, grid)
}

/// Same as [`dilation_residual`] for a replacement embedding `j`.
pub fn dilation_residual_with(bundle: &RealizationBundle, j: &CMatrix, grid: &[f64]) -> Result<f64> {
    if j.shape() != bundle.j.shape() {
        return Err(Error::DimensionMismatch {
            expected: bundle.j.ncols(),
            found: j.ncols(),
        });
    }
    let mut worst: f64 = 0.0;
    for &t in grid {
        let phi = bundle.phi.eval(t)?;
        let model = j.adjoint() * bundle.group.semigroup(re(t)) * j;
        worst = worst.max((phi - model).norm());
    }
    Ok(worst)
}

/// The `L²(ℝ, μ; V)` model of a measure- or generator-backed `φ`.
#[derive(Debug, Clone)]
pub struct DualModel {
    pub group: OneParameterGroup,
    /// Constant-function embedding `j(v)(λ) = v` (`model dim × d`).
    pub j: CMatrix,
    /// `ĵ(v)(λ) = e^{−βλ/4} v`.
    pub j_tilde: CMatrix,
    /// `(Jf)(λ) = e^{−βλ/2} f(−λ)`, a unitary involution.
    pub model_j: CMatrix,
    /// `(Rf)(λ) = f(−λ)`, equal to `e^{βH/2} J`.
    pub model_r: CMatrix,
    /// `(λ, block size)` in model order.
    pub blocks: Vec<(f64, usize)>,
    pub beta: f64,
}

pub fn reconstruct_dual(phi: &CircleRPFunction) -> Result<DualModel> {
    let beta = phi.beta();
    let mu_plus = phi.plus_measure()?;
    let d = phi.dim();
    // (λ, B) with W = B*B; partner blocks share the range of B
    let mut entries: Vec<(f64, CMatrix, Option<usize>)> = Vec::new();
    for atom in mu_plus.atoms() {
        if atom.lambda == 0.0 {
            let b = gram_quotient(&(&atom.weight * re(2.0)), DEFAULT_PSD_TOL)?.factor().clone();
            if b.nrows() > 0 {
                entries.push((0.0, b, None));
            }
        } else {
            let b = gram_quotient(&atom.weight, DEFAULT_PSD_TOL)?.factor().clone();
            if b.nrows() > 0 {
                let k = entries.len();
                let partner = &b * re((-beta * atom.lambda / 2.0).exp());
                entries.push((atom.lambda, b, Some(k + 1)));
                entries.push((-atom.lambda, partner, Some(k)));
            }
        }
    }
    let offsets: Vec<usize> = entries
        .iter()
        .scan(0, |acc, (_, b, _)| {
            let o = *acc;
            *acc += b.nrows();
            Some(o)
        })
        .collect();
    let dim: usize = entries.iter().map(|(_, b, _)| b.nrows()).sum();
    let mut j = CMatrix::zeros(dim, d);
    let mut j_tilde = CMatrix::zeros(dim, d);
    let mut model_j = CMatrix::zeros(dim, dim);
    let mut lambdas = Vec::with_capacity(dim);
    for (i, (lambda, b, partner)) in entries.iter().enumerate() {
        let r = b.nrows();
        let o = offsets[i];
        j.view_mut((o, 0), (r, d)).copy_from(b);
        j_tilde
            .view_mut((o, 0), (r, d))
            .copy_from(&(b * re((-beta * lambda / 4.0).exp())));
        let p = partner.map_or(o, |k| offsets[k]);
        for a in 0..r {
            model_j[(o + a, p + a)] = re(1.0);
        }
        lambdas.extend(std::iter::repeat_n(*lambda, r));
    }
    let group = OneParameterGroup::new(diag_real(&lambdas))?;
    let grow = diag_real(&lambdas.iter().map(|l| (beta * l / 2.0).exp()).collect::<Vec<_>>());
    let model_r = grow * &model_j;
    Ok(DualModel {
        group,
        j,
        j_tilde,
        model_j,
        model_r,
        blocks: entries.iter().map(|(l, b, _)| (*l, b.nrows())).collect(),
        beta,
    })
}

impl DualModel {
    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// Sorted generator spectrum.
    pub fn spectrum(&self) -> Vec<f64> {
        self.group.spectrum().eigenvalues().to_vec()
    }

    /// `max_t ‖j* U_t j − φ(−it)‖_F`.
    pub fn gns_residual(&self, phi: &CircleRPFunction, times: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &t in times {
            let model = self.j.adjoint() * self.group.at(t) * &self.j;
            let target = phi.eval_complex(Complex64::new(0.0, -t))?;
            worst = worst.max((model - target).norm());
        }
        Ok(worst)
    }

    /// `max_t ‖φ(t) − j* e^{−tH} j‖_F` on `[0, β]`.
    pub fn dilation_residual(&self, phi: &CircleRPFunction, grid: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &t in grid {
            let model = self.j.adjoint() * self.group.semigroup(re(t)) * &self.j;
            worst = worst.max((model - phi.eval(t)?).norm());
        }
        Ok(worst)
    }

    /// `‖J² − 1‖`, `‖J*J − 1‖` and `‖JHJ + H‖`.
    pub fn model_j_residuals(&self) -> (f64, f64, f64) {
        let n = self.dim();
        let j = &self.model_j;
        let h = self.group.generator();
        (
            (j * j - identity(n)).norm(),
            unitarity_residual(j),
            (j * h * j + h).norm(),
        )
    }

    /// `‖R − e^{βH/2}J‖_F` and `‖Rj − j‖_F`.
    pub fn model_r_residuals(&self) -> (f64, f64) {
        let grow = self.group.semigroup(re(-self.beta / 2.0));
        (
            (&self.model_r - grow * &self.model_j).norm(),
            (&self.model_r * &self.j - &self.j).norm(),
        )
    }
}

/// Residuals of `ĵ* U_t ĵ = φ(β/2 − it)` and of `ψ(−t) = ψ(t)*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildeCheck {
    pub embedding: f64,
    pub symmetry: f64,
}

pub fn tilde_embedding_check(phi: &CircleRPFunction, times: &[f64]) -> Result<TildeCheck> {
    let model = reconstruct_dual(phi)?;
    let half = phi.beta() / 2.0;
    let mut embedding: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    for &t in times {
        let lhs = model.j_tilde.adjoint() * model.group.at(t) * &model.j_tilde;
        let psi = phi.eval_complex(Complex64::new(half, -t))?;
        let psi_neg = phi.eval_complex(Complex64::new(half, t))?;
        embedding = embedding.max((lhs - &psi).norm());
        symmetry = symmetry.max((psi_neg - psi.adjoint()).norm());
    }
    Ok(TildeCheck { embedding, symmetry })
}

/// PSD certificates for `φ(t) = e^{−|t|H}` on a grid of positive times.
#[derive(Debug, Clone)]
pub struct LineCaseReport {
    /// `[φ(tⱼ − tₖ)]`.
    pub gram: PsdCertificate,
    /// `[φ(tⱼ + tₖ)]`.
    pub os: PsdCertificate,
}

impl LineCaseReport {
    pub fn passed(&self) -> bool {
        self.gram.is_psd && self.os.is_psd
    }
}

pub fn line_case_check(h: &CMatrix, grid: &[f64], tol: f64) -> Result<LineCaseReport> {
    ensure_hermitian(h)?;
    if let Some(&t) = grid.iter().find(|t| t.is_nan() || **t <= 0.0 || t.is_infinite()) {
        return Err(Error::GridOutOfRange(t));
    }
    let spec = eig_hermitian(&hermitian_part(h))?;
    let d = spec.dim();
    let m = grid.len();
    let block = |t: f64| spec.apply_function(ScalarMap::ExpScaled(t.abs()));
    let mut gram = CMatrix::zeros(m * d, m * d);
    let mut os = CMatrix::zeros(m * d, m * d);
    for x in 0..m {
        for y in 0..m {
            gram.view_mut((x * d, y * d), (d, d)).copy_from(&block(grid[x] - grid[y])?);
            os.view_mut((x * d, y * d), (d, d)).copy_from(&block(grid[x] + grid[y])?);
        }
    }
    Ok(LineCaseReport {
        gram: psd_certificate(&gram, tol)?,
        os: psd_certificate(&os, tol)?,
    })
}

/// For a unitary involution `R` with `RHR = −H` and `j` with range in
/// `Fix(R e^{−βH/2})`, returns `max_t ‖φ(β−t) − φ(t)‖_F` for
/// `φ(t) = j* e^{−tH} j`.
pub fn reflection_symmetry_residual(
    h: &CMatrix,
    r: &CMatrix,
    j: &CMatrix,
    beta: f64,
    grid: &[f64],
) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidBeta(beta));
    }
    let group = OneParameterGroup::new(h.clone())?;
    let n = group.dim();
    if check_square(r)? != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: r.nrows(),
        });
    }
    ensure_unitary(r)?;
    let residual = (r * r - identity(n)).norm();
    if residual > 1e-10 {
        return Err(Error::NotInvolutive { residual });
    }
    let odd = (r * group.generator() * r + group.generator()).norm();
    if odd > 1e-10 * group.generator().norm().max(1.0) {
        return Err(Error::InvalidInput(format!("R H R + H has norm {odd:.3e}")));
    }
    let fixed = (r * group.semigroup(re(beta / 2.0)) * j - j).norm();
    if fixed > 1e-10 * j.norm().max(1.0) {
        return Err(Error::NotFixed { residual: fixed });
    }
    let mut worst: f64 = 0.0;
    for &t in grid {
        if !(0.0..=beta).contains(&t) {
            return Err(Error::OutOfRange {
                value: t,
                lo: 0.0,
                hi: beta,
            });
        }
        let a = j.adjoint() * group.semigroup(re(t)) * j;
        let b = j.adjoint() * group.semigroup(re(beta - t)) * j;
        worst = worst.max((a - b).norm());
    }
    Ok(worst)
}
