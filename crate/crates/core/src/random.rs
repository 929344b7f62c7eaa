//! Seeded random instances used by property tests, the acceptance suite and
//! the CLI demos. Every generator takes an explicit RNG so runs are
//! reproducible from a single `u64` seed.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::measures::AtomicOperatorMeasure;
use crate::numcore::{
    conj, diag_real, eig_hermitian, hermitian_part, re, AntiUnitaryMap, CMatrix, ScalarMap,
};
use crate::standardsub::ModularPair;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn real_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| re(gaussian(rng)))
}

/// Hermitian matrix `scale · (X + X*)/2` with Gaussian `X`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    let x = complex_matrix(rng, n, n);
    hermitian_part(&x) * re(scale)
}

/// Haar-like unitary: eigenvectors of a random Hermitian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let h = hermitian(rng, n, 1.0);
    eig_hermitian(&h)
        .expect("random Hermitian matrix")
        .eigenvectors()
        .clone()
}

/// PSD matrix `X X*` of the given rank (`X` is `n × rank`).
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let x = complex_matrix(rng, n, rank);
    hermitian_part(&(&x * x.adjoint()))
}

/// Anti-unitary involution `v ↦ W Wᵀ conj(v)` for random unitary `W`.
pub fn antiunitary_involution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AntiUnitaryMap {
    let w = unitary(rng, n);
    AntiUnitaryMap::new(&w * w.transpose()).expect("W Wᵀ is unitary")
}

/// Hermitian `n × n` matrix (n even) with spectrum `{±a_k}`, `a_k ∈ [lo, hi]`,
/// in a random eigenbasis.
pub fn symmetric_spectrum_hermitian<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    lo: f64,
    hi: f64,
) -> CMatrix {
    assert!(n.is_multiple_of(2), "symmetric spectrum needs even dimension");
    let half: Vec<f64> = (0..n / 2).map(|_| rng.gen_range(lo..hi)).collect();
    let mut values = half.clone();
    values.extend(half.iter().map(|a| -a));
    let u = unitary(rng, n);
    hermitian_part(&(&u * diag_real(&values) * u.adjoint()))
}

/// Random `H` with `JHJ = −H`: `H = X − u·conj(X)·conj(u)` for Hermitian `X`,
/// rescaled to spectral radius `radius`.
pub fn odd_generator<R: Rng + ?Sized>(rng: &mut R, j: &AntiUnitaryMap, radius: f64) -> CMatrix {
    let n = j.dim();
    let x = hermitian(rng, n, 1.0);
    let u = j.matrix();
    let h = hermitian_part(&(&x - u * conj(&x) * conj(u)));
    let r = eig_hermitian(&h).expect("Hermitian").spectral_norm();
    if r == 0.0 {
        h
    } else {
        h * re(radius / r)
    }
}

/// Random modular pair `(Δ = e^H, J)` with `JHJ = −H`.
pub fn modular_pair<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> ModularPair {
    let j = antiunitary_involution(rng, n);
    let h = odd_generator(rng, &j, radius);
    let delta = eig_hermitian(&h)
        .and_then(|s| s.apply_function(ScalarMap::ExpScaled(-1.0)))
        .expect("exponential of Hermitian");
    ModularPair::new(hermitian_part(&delta), j).expect("constructed pair is valid")
}

/// Random measure on `[0, ∞)` with `1..=max_atoms` atoms in `[0, lambda_max)`
/// and random PSD weights of random rank.
pub fn plus_measure<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    max_atoms: usize,
    lambda_max: f64,
) -> AtomicOperatorMeasure {
    let k = rng.gen_range(1..=max_atoms);
    let atoms = (0..k)
        .map(|_| {
            let lambda = rng.gen_range(0.0..lambda_max);
            let rank = rng.gen_range(1..=dim);
            (lambda, psd(rng, dim, rank))
        })
        .collect();
    AtomicOperatorMeasure::new(dim, atoms).expect("random PSD weights")
}
