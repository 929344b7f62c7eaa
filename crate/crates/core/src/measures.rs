//! Finitely atomic measures on ℝ with values in PSD matrices.
//!
//! A measure `μ = Σ δ_{λᵢ} Wᵢ` is stored with strictly increasing locations.
//! Its Laplace transform is `L(μ)(t) = Σ e^{−tλᵢ} Wᵢ` and its Fourier
//! transform `μ̂(z) = Σ e^{izλᵢ} Wᵢ`; both are finite sums, hence entire.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::numcore::{
    check_finite, check_square, eig_hermitian, hermitian_asymmetry, hermitian_part,
    psd_certificate, re, CMatrix, DEFAULT_PSD_TOL, HERMITIAN_RTOL,
};

/// Relative distance under which two atom locations are merged.
pub const MERGE_RTOL: f64 = 1e-12;

/// Circle length `β > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleParameter(f64);

impl CircleParameter {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidBeta(beta))
        }
    }

    pub fn beta(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub lambda: f64,
    pub weight: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicOperatorMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

fn same_location(a: f64, b: f64) -> bool {
    (a - b).abs() <= MERGE_RTOL * a.abs().max(b.abs()).max(1.0)
}

impl AtomicOperatorMeasure {
    /// Validates, sorts and merges the atoms. Weights must be Hermitian PSD
    /// `dim × dim` matrices; exactly zero weights are dropped.
    pub fn new(dim: usize, atoms: Vec<(f64, CMatrix)>) -> Result<Self> {
        let mut clean = Vec::with_capacity(atoms.len());
        for (lambda, w) in atoms {
            if !lambda.is_finite() {
                return Err(Error::NonFinite);
            }
            let d = check_square(&w)?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
            check_finite(&w)?;
            let residual = hermitian_asymmetry(&w);
            if residual > HERMITIAN_RTOL {
                return Err(Error::NotHermitian { residual });
            }
            let w = hermitian_part(&w);
            let cert = psd_certificate(&w, DEFAULT_PSD_TOL)?;
            if !cert.is_psd {
                return Err(Error::NotPsd {
                    min_eig: cert.min_eig,
                });
            }
            clean.push(Atom { lambda, weight: w });
        }
        clean.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let mut merged: Vec<Atom> = Vec::with_capacity(clean.len());
        for atom in clean {
            match merged.last_mut() {
                Some(last) if same_location(last.lambda, atom.lambda) => {
                    last.weight += atom.weight;
                }
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| a.weight.norm() > 0.0);
        Ok(Self {
            dim,
            atoms: merged,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            atoms: Vec::new(),
        }
    }

    pub fn dirac(lambda: f64, weight: CMatrix) -> Result<Self> {
        let d = check_square(&weight)?;
        Self::new(d, vec![(lambda, weight)])
    }

    /// Scalar measure from `(location, mass)` pairs.
    pub fn scalar(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            1,
            atoms
                .iter()
                .map(|&(l, w)| (l, CMatrix::from_element(1, 1, re(w))))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Weight of the atom at `lambda`, if any.
    pub fn weight_at(&self, lambda: f64) -> Option<&CMatrix> {
        self.atoms
            .iter()
            .find(|a| same_location(a.lambda, lambda))
            .map(|a| &a.weight)
    }

    pub fn is_supported_on_half_line(&self) -> bool {
        self.atoms.iter().all(|a| a.lambda >= 0.0)
    }

    /// `Σ f(λᵢ) Wᵢ`.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for a in &self.atoms {
            acc += &a.weight * f(a.lambda);
        }
        acc
    }

    /// `L(μ)(t) = Σ e^{−tλ} W`.
    pub fn laplace(&self, t: f64) -> CMatrix {
        self.integrate(|l| re((-t * l).exp()))
    }

    /// `Σ e^{−zλ} W` for complex `z`.
    pub fn laplace_complex(&self, z: Complex64) -> CMatrix {
        self.integrate(|l| (-z * l).exp())
    }

    /// `μ̂(z) = Σ e^{izλ} W`.
    pub fn fourier(&self, z: Complex64) -> CMatrix {
        self.integrate(|l| (Complex64::i() * z * l).exp())
    }

    /// `μ̂(z)` together with a flag telling whether `0 ≤ Im z ≤ β`.
    pub fn fourier_in_strip(&self, z: Complex64, beta: CircleParameter) -> (CMatrix, bool) {
        let inside = z.im >= 0.0 && z.im <= beta.beta();
        (self.fourier(z), inside)
    }

    pub fn total_mass(&self) -> CMatrix {
        self.integrate(|_| re(1.0))
    }

    /// The measure `e^{s·λ} dμ(λ)`.
    pub fn exp_rescaled(&self, s: f64) -> AtomicOperatorMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                lambda: a.lambda,
                weight: &a.weight * re((s * a.lambda).exp()),
            })
            .filter(|a| a.weight.norm() > 0.0)
            .collect();
        Self {
            dim: self.dim,
            atoms,
        }
    }

    /// Pushforward under `λ ↦ −λ`.
    pub fn reflected(&self) -> AtomicOperatorMeasure {
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                lambda: -a.lambda,
                weight: a.weight.clone(),
            })
            .collect();
        atoms.reverse();
        Self {
            dim: self.dim,
            atoms,
        }
    }

    /// Restriction to `(0, ∞)` plus half of the atom at zero: the inverse of
    /// [`symmetrize_from_plus`] on measures satisfying the reflection relation.
    pub fn plus_part(&self) -> AtomicOperatorMeasure {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| a.lambda >= 0.0)
            .map(|a| Atom {
                lambda: a.lambda,
                weight: if a.lambda == 0.0 {
                    &a.weight * re(0.5)
                } else {
                    a.weight.clone()
                },
            })
            .collect();
        Self {
            dim: self.dim,
            atoms,
        }
    }

    /// `∫ e^{−βλ} dμ(λ)`; always finite for atomic measures.
    pub fn damped_mass(&self, beta: CircleParameter) -> CMatrix {
        self.laplace(beta.beta())
    }

    /// Largest atomwise Frobenius distance to another measure of the same
    /// dimension, with missing atoms counted as zero.
    pub fn distance(&self, other: &AtomicOperatorMeasure) -> f64 {
        let zero = CMatrix::zeros(self.dim, self.dim);
        let mut worst: f64 = 0.0;
        for a in &self.atoms {
            let b = other.weight_at(a.lambda).unwrap_or(&zero);
            worst = worst.max((&a.weight - b).norm());
        }
        for b in &other.atoms {
            if self.weight_at(b.lambda).is_none() {
                worst = worst.max(b.weight.norm());
            }
        }
        worst
    }
}

/// `dμ(λ) = dμ₊(λ) + e^{βλ} dμ₊(−λ)`: an atom `(λ, W)` with `λ > 0` gains a
/// partner `(−λ, e^{−βλ}W)`, an atom at zero doubles.
pub fn symmetrize_from_plus(
    mu_plus: &AtomicOperatorMeasure,
    beta: CircleParameter,
) -> Result<AtomicOperatorMeasure> {
    if let Some(a) = mu_plus.atoms.iter().find(|a| a.lambda < 0.0) {
        return Err(Error::NegativeAtom(a.lambda));
    }
    let b = beta.beta();
    let mut atoms = Vec::with_capacity(2 * mu_plus.len());
    for a in mu_plus.atoms.iter().rev() {
        if a.lambda > 0.0 {
            atoms.push(Atom {
                lambda: -a.lambda,
                weight: &a.weight * re((-b * a.lambda).exp()),
            });
        }
    }
    for a in &mu_plus.atoms {
        let weight = if a.lambda == 0.0 {
            &a.weight * re(2.0)
        } else {
            a.weight.clone()
        };
        atoms.push(Atom {
            lambda: a.lambda,
            weight,
        });
    }
    atoms.retain(|a| a.weight.norm() > 0.0);
    Ok(AtomicOperatorMeasure {
        dim: mu_plus.dim,
        atoms,
    })
}

/// Largest relative violation of `W(−λ) = e^{−βλ} W(λ)` over all atoms.
/// A missing partner counts as a zero weight.
pub fn reflection_residual(mu: &AtomicOperatorMeasure, beta: CircleParameter) -> f64 {
    let b = beta.beta();
    let zero = CMatrix::zeros(mu.dim, mu.dim);
    let mut worst: f64 = 0.0;
    for a in &mu.atoms {
        let expected = &a.weight * re((-b * a.lambda).exp());
        let partner = mu.weight_at(-a.lambda).unwrap_or(&zero);
        let scale = expected.norm().max(partner.norm());
        if scale > 0.0 {
            worst = worst.max((partner - &expected).norm() / scale);
        }
    }
    worst
}

/// Whether `r_*μ = e_{−β}μ` holds atomwise to relative tolerance `tol`.
pub fn check_reflection_relation(mu: &AtomicOperatorMeasure, beta: CircleParameter, tol: f64) -> bool {
    reflection_residual(mu, beta) <= tol
}

/// The cyclic grid `t_k = kβ/N`, `k = 0..N`.
pub fn cyclic_grid(n: usize, beta: CircleParameter) -> Vec<f64> {
    (0..n).map(|k| k as f64 * beta.beta() / n as f64).collect()
}

/// Signed frequency of DFT index `m` for length `n`.
pub fn signed_frequency(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

fn check_samples(samples: &[CMatrix]) -> Result<usize> {
    let n = samples.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "cyclic sample count must be even and at least 2, got {n}"
        )));
    }
    let d = check_square(&samples[0])?;
    for (index, s) in samples.iter().enumerate() {
        let ds = check_square(s)?;
        if ds != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: ds,
            });
        }
        check_finite(s)?;
        if hermitian_asymmetry(s) > HERMITIAN_RTOL {
            return Err(Error::NonHermitianSample { index });
        }
    }
    Ok(d)
}

fn dft_entries(samples: &[CMatrix], inverse: bool) -> Vec<CMatrix> {
    let n = samples.len();
    let d = samples[0].nrows();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut out = vec![CMatrix::zeros(d, d); n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for r in 0..d {
        for c in 0..d {
            for (k, s) in samples.iter().enumerate() {
                buf[k] = s[(r, c)];
            }
            fft.process(&mut buf);
            for (m, v) in buf.iter().enumerate() {
                out[m][(r, c)] = *v;
            }
        }
    }
    out
}

/// `ĉ_m = (1/N) Σ_k e^{−2πimk/N} φ(t_k)` for `m = 0..N` (index `m ≥ N/2`
/// stands for the negative frequency `m − N`, see [`signed_frequency`]).
pub fn bochner_coefficients(samples: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let n = check_samples(samples).map(|_| samples.len())?;
    let scale = re(1.0 / n as f64);
    Ok(dft_entries(samples, false)
        .into_iter()
        .map(|m| m * scale)
        .collect())
}

/// Inverse of [`bochner_coefficients`]: `φ(t_k) = Σ_m e^{2πimk/N} ĉ_m`.
pub fn inverse_bochner(coefficients: &[CMatrix]) -> Vec<CMatrix> {
    if coefficients.is_empty() {
        return Vec::new();
    }
    dft_entries(coefficients, true)
}

/// Positivity certificate for the Bochner coefficients on `Z_N`.
#[derive(Debug, Clone)]
pub struct BochnerCertificate {
    pub coefficients: Vec<CMatrix>,
    pub min_eig: f64,
    /// Signed frequency at which `min_eig` occurs.
    pub worst_frequency: i64,
    pub max_asymmetry: f64,
    pub scale: f64,
    pub tol: f64,
    pub is_positive: bool,
}

/// Certifies that every `ĉ_m` is Hermitian PSD with tolerance relative to
/// `max(1, max_m ‖ĉ_m‖₂)`.
pub fn bochner_certificate(samples: &[CMatrix], tol: f64) -> Result<BochnerCertificate> {
    let coefficients = bochner_coefficients(samples)?;
    let n = coefficients.len();
    let mut min_eig = f64::INFINITY;
    let mut worst = 0usize;
    let mut scale: f64 = 0.0;
    let mut max_asym: f64 = 0.0;
    for (m, c) in coefficients.iter().enumerate() {
        let asym = (c - c.adjoint()).norm();
        max_asym = max_asym.max(asym);
        let spec = eig_hermitian(&hermitian_part(c))?;
        scale = scale.max(spec.spectral_norm());
        let e = spec.min_eigenvalue().unwrap_or(0.0);
        if e < min_eig {
            min_eig = e;
            worst = m;
        }
    }
    let threshold = tol * scale.max(1.0);
    Ok(BochnerCertificate {
        min_eig,
        worst_frequency: signed_frequency(worst, n),
        max_asymmetry: max_asym,
        scale,
        tol,
        is_positive: min_eig >= -threshold && max_asym <= threshold,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{identity, ONE, ZERO};
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const E1: f64 = 0.36787944117144233;

    fn scalar(m: &CMatrix) -> f64 {
        assert!(m[(0, 0)].im.abs() < 1e-14);
        m[(0, 0)].re
    }

    fn beta(b: f64) -> CircleParameter {
        CircleParameter::new(b).unwrap()
    }

    #[test]
    fn circle_parameter_rejects_nonpositive() {
        assert_eq!(CircleParameter::new(0.0), Err(Error::InvalidBeta(0.0)));
        assert!(CircleParameter::new(f64::NAN).is_err());
    }

    #[test]
    fn laplace_examples() {
        let delta0 = AtomicOperatorMeasure::scalar(&[(0.0, 1.0)]).unwrap();
        assert_eq!(scalar(&delta0.laplace(3.7)), 1.0);
        let mu = AtomicOperatorMeasure::scalar(&[(1.0, 1.0), (-1.0, E1)]).unwrap();
        assert!((scalar(&mu.laplace(0.0)) - 1.367879).abs() < 1e-6);
        assert!((scalar(&mu.laplace(1.0)) - 1.367879).abs() < 1e-6);
        assert!((scalar(&mu.laplace(0.0)) - scalar(&mu.laplace(1.0))).abs() < 1e-15);
    }

    #[test]
    fn fourier_examples() {
        let delta0 = AtomicOperatorMeasure::scalar(&[(0.0, 1.0)]).unwrap();
        assert!((delta0.fourier(Complex64::new(0.3, 0.4))[(0, 0)] - ONE).norm() < 1e-15);
        let mu = AtomicOperatorMeasure::scalar(&[(1.0, 1.0), (-1.0, E1)]).unwrap();
        let v = mu.fourier(Complex64::new(0.0, 0.5))[(0, 0)];
        assert!((v.re - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((v.re - 1.213061).abs() < 1e-6);
        let z = Complex64::new(0.3, 0.2);
        let lhs = mu.fourier(Complex64::i() - z);
        let rhs = mu.fourier(z);
        assert!((lhs - rhs).norm() < 1e-12);
        let (_, inside) = mu.fourier_in_strip(Complex64::new(0.0, 2.0), beta(1.0));
        assert!(!inside);
    }

    #[test]
    fn symmetrize_examples() {
        let w = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let mu = symmetrize_from_plus(&AtomicOperatorMeasure::dirac(0.0, w.clone()).unwrap(), beta(1.0)).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.atoms()[0].weight, &w * re(2.0));

        let plus = AtomicOperatorMeasure::scalar(&[(1.0, 1.0)]).unwrap();
        let mu = symmetrize_from_plus(&plus, beta(1.0)).unwrap();
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.atoms()[0].lambda, -1.0);
        assert!((scalar(&mu.atoms()[0].weight) - E1).abs() < 1e-16);
        assert_eq!(scalar(&mu.atoms()[1].weight), 1.0);

        let plus = AtomicOperatorMeasure::dirac(2.0, w.clone()).unwrap();
        let mu = symmetrize_from_plus(&plus, beta(0.5)).unwrap();
        assert!((mu.weight_at(-2.0).unwrap() - &w * re(E1)).norm() < 1e-16);
        assert!(check_reflection_relation(&mu, beta(0.5), 1e-14));

        let bad = AtomicOperatorMeasure::scalar(&[(-1.0, 1.0)]).unwrap();
        assert_eq!(
            symmetrize_from_plus(&bad, beta(1.0)),
            Err(Error::NegativeAtom(-1.0))
        );
    }

    #[test]
    fn reflection_relation_examples() {
        let d0 = AtomicOperatorMeasure::scalar(&[(0.0, 3.0)]).unwrap();
        assert!(check_reflection_relation(&d0, beta(1.0), 1e-12));
        let good = AtomicOperatorMeasure::scalar(&[(1.0, 1.0), (-1.0, E1)]).unwrap();
        assert!(check_reflection_relation(&good, beta(1.0), 1e-12));
        let bad = AtomicOperatorMeasure::scalar(&[(1.0, 1.0), (-1.0, 1.0)]).unwrap();
        assert!(!check_reflection_relation(&bad, beta(1.0), 1e-12));
        let lonely = AtomicOperatorMeasure::scalar(&[(1.0, 1.0)]).unwrap();
        assert!(!check_reflection_relation(&lonely, beta(1.0), 1e-12));
    }

    #[test]
    fn total_mass_examples() {
        let w = identity(2) * re(3.0);
        assert_eq!(AtomicOperatorMeasure::dirac(0.0, w.clone()).unwrap().total_mass(), w);
        let mu = AtomicOperatorMeasure::scalar(&[(1.0, 1.0), (-1.0, E1)]).unwrap();
        assert!((scalar(&mu.total_mass()) - (1.0 + E1)).abs() < 1e-16);
        assert_eq!(AtomicOperatorMeasure::empty(2).total_mass(), CMatrix::zeros(2, 2));
    }

    #[test]
    fn merges_and_drops() {
        let mu = AtomicOperatorMeasure::scalar(&[(1.0, 1.0), (1.0 + 1e-14, 2.0), (2.0, 0.0)]).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(scalar(&mu.atoms()[0].weight), 3.0);
        let neg = AtomicOperatorMeasure::scalar(&[(1.0, -1.0)]);
        assert!(matches!(neg, Err(Error::NotPsd { .. })));
    }

    #[test]
    fn bochner_constant() {
        let samples = vec![CMatrix::from_element(1, 1, re(2.0)); 8];
        let c = bochner_coefficients(&samples).unwrap();
        assert!((scalar(&c[0]) - 2.0).abs() < 1e-15);
        assert!(c[1..].iter().all(|m| m.norm() < 1e-15));
    }

    #[test]
    fn bochner_cosine() {
        let samples: Vec<CMatrix> = (0..8)
            .map(|k| {
                let t = k as f64 / 8.0;
                CMatrix::from_element(1, 1, re((2.0 * std::f64::consts::PI * t).cos()))
            })
            .collect();
        let cert = bochner_certificate(&samples, 1e-12).unwrap();
        let c = &cert.coefficients;
        assert!((c[1][(0, 0)] - re(0.5)).norm() < 1e-15);
        assert!((c[7][(0, 0)] - re(0.5)).norm() < 1e-15);
        for m in [0, 2, 3, 4, 5, 6] {
            assert!(c[m].norm() < 1e-15);
        }
        assert!(cert.is_positive);
    }

    #[test]
    fn bochner_rejects_bad_input() {
        let samples = vec![CMatrix::from_element(1, 1, re(1.0)); 3];
        assert!(matches!(bochner_coefficients(&samples), Err(Error::InvalidInput(_))));
        let mut samples = vec![identity(2); 4];
        samples[2][(0, 1)] = ONE;
        assert_eq!(
            bochner_coefficients(&samples).unwrap_err(),
            Error::NonHermitianSample { index: 2 }
        );
    }

    #[test]
    fn negative_cosine_fails_certificate() {
        let samples: Vec<CMatrix> = (0..8)
            .map(|k| {
                let t = k as f64 / 8.0;
                CMatrix::from_element(1, 1, re(-(2.0 * std::f64::consts::PI * t).cos()))
            })
            .collect();
        let cert = bochner_certificate(&samples, 1e-12).unwrap();
        assert!(!cert.is_positive);
        assert_eq!(cert.worst_frequency.abs(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn laplace_log_convex(seed in any::<u64>(), t1 in -2.0f64..2.0, dt in 0.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = random::plus_measure(&mut rng, 1, 5, 4.0);
            let mu = symmetrize_from_plus(&mu, beta(1.0)).unwrap();
            let t2 = t1 + dt;
            let mid = scalar(&mu.laplace(0.5 * (t1 + t2)));
            let a = scalar(&mu.laplace(t1));
            let b = scalar(&mu.laplace(t2));
            prop_assert!(mid * mid <= a * b * (1.0 + 1e-12));
        }

        #[test]
        fn symmetrized_satisfies_relation(seed in any::<u64>(), d in 1usize..4, bi in 0usize..3) {
            let b = beta([0.5, 1.0, 2.0][bi]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plus = random::plus_measure(&mut rng, d, 5, 5.0);
            let mu = symmetrize_from_plus(&plus, b).unwrap();
            prop_assert!(check_reflection_relation(&mu, b, 1e-14));
            let m0 = mu.laplace(0.0);
            prop_assert!((&m0 - mu.total_mass()).norm() <= 1e-12 * m0.norm().max(1.0));
            prop_assert!((mu.laplace(b.beta()) - &m0).norm() <= 1e-12 * m0.norm().max(1.0));
            prop_assert!((mu.plus_part().distance(&plus)) <= 1e-12 * m0.norm().max(1.0));
        }

        #[test]
        fn fourier_is_positive_definite(seed in any::<u64>(), d in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plus = random::plus_measure(&mut rng, d, 4, 3.0);
            let mu = symmetrize_from_plus(&plus, beta(1.0)).unwrap();
            let grid: Vec<f64> = (0..6).map(|k| 0.37 * k as f64 - 0.4).collect();
            let m = grid.len();
            let mut g = CMatrix::zeros(m * d, m * d);
            for (x, tx) in grid.iter().enumerate() {
                for (y, ty) in grid.iter().enumerate() {
                    let block = mu.fourier(re(tx - ty));
                    g.view_mut((x * d, y * d), (d, d)).copy_from(&block);
                }
            }
            let cert = psd_certificate(&g, 1e-9).unwrap();
            prop_assert!(cert.is_psd);
        }

        #[test]
        fn dft_roundtrip(seed in any::<u64>(), half in 1usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<CMatrix> = (0..2 * half).map(|_| random::hermitian(&mut rng, 2, 1.0)).collect();
            let c = bochner_coefficients(&samples).unwrap();
            let back = inverse_bochner(&c);
            for (a, b) in samples.iter().zip(&back) {
                prop_assert!((a - b).norm() <= 1e-10);
            }
        }
    }
}
