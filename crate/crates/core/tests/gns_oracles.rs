//! GNS dimension of positive definite functions on `Z_N` against a naive DFT.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rpcircle::gnsrep::{gns_construct, SesqPDFunction};
use rpcircle::numcore::{CMatrix, DEFAULT_PSD_TOL};
use rpcircle::random;

/// `φ(k) = Σ_m c_m e^{2πimk/N}`.
fn synthesize(coeffs: &[CMatrix]) -> Vec<CMatrix> {
    let n = coeffs.len();
    let d = coeffs[0].nrows();
    (0..n)
        .map(|k| {
            coeffs.iter().enumerate().fold(CMatrix::zeros(d, d), |acc, (m, c)| {
                let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (m * k) as f64 / n as f64);
                acc + c * w
            })
        })
        .collect()
}

/// Sum over frequencies of the number of eigenvalues of the naive DFT
/// coefficient above `tol · scale`.
fn dft_rank(values: &[CMatrix], tol: f64) -> usize {
    let n = values.len();
    let d = values[0].nrows();
    let coeffs: Vec<CMatrix> = (0..n)
        .map(|m| {
            values.iter().enumerate().fold(CMatrix::zeros(d, d), |acc, (k, v)| {
                let w = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (m * k) as f64 / n as f64);
                acc + v * w
            }) / Complex64::new(n as f64, 0.0)
        })
        .collect();
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    coeffs
        .iter()
        .map(|c| {
            let h = (c + c.adjoint()) * Complex64::new(0.5, 0.0);
            h.symmetric_eigen().eigenvalues.iter().filter(|&&x| x > tol * scale).count()
        })
        .sum()
}

#[test]
fn character_sum_has_dimension_of_support() {
    let n = 8;
    let mut coeffs = vec![CMatrix::zeros(1, 1); n];
    for m in [0, 3, 5] {
        coeffs[m][(0, 0)] = Complex64::new(1.0 + m as f64, 0.0);
    }
    let phi = SesqPDFunction::new(synthesize(&coeffs), DEFAULT_PSD_TOL).unwrap();
    let model = gns_construct(&phi, DEFAULT_PSD_TOL).unwrap();
    assert_eq!(model.dim(), 3);
}

#[test]
fn non_positive_definite_function_is_rejected() {
    let values = vec![CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), CMatrix::from_element(1, 1, Complex64::new(2.0, 0.0))];
    assert!(SesqPDFunction::new(values, DEFAULT_PSD_TOL).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn dimension_matches_dft_rank(seed in any::<u64>(), n in 2usize..=9, d in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<CMatrix> = (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => CMatrix::zeros(d, d),
                _ => {
                    let rank = rng.gen_range(1..=d);
                    random::psd(&mut rng, d, rank)
                }
            })
            .collect();
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            return Ok(());
        }
        let values = synthesize(&coeffs);
        let phi = SesqPDFunction::new(values.clone(), DEFAULT_PSD_TOL).unwrap();
        let model = gns_construct(&phi, DEFAULT_PSD_TOL).unwrap();
        prop_assert_eq!(model.dim(), dft_rank(&values, 1e-8));
        prop_assert!(model.reconstruction_residual(&phi) < 1e-9);
        prop_assert!(model.unitarity_residual() < 1e-9);
        prop_assert!(model.homomorphism_residual() < 1e-9);
    }
}
