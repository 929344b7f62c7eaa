//! Gibbs states of diagonal Hamiltonians against entrywise closed forms.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rpcircle::kms::{kms_ancont_check, kms_residual, psi_value, rp_from_kms, tomita_from_gibbs, GibbsSystem};
use rpcircle::numcore::{diag_real, CMatrix};
use rpcircle::random;

fn boltzmann(energies: &[f64], beta: f64) -> Vec<f64> {
    let w: Vec<f64> = energies.iter().map(|e| (-beta * e).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

/// `ω(B* α_z(A))` with `α_z(A)_{ij} = e^{iz(Eᵢ − Eⱼ)} A_{ij}`.
fn psi_oracle(energies: &[f64], beta: f64, z: Complex64, a: &CMatrix, b: &CMatrix) -> Complex64 {
    let p = boltzmann(energies, beta);
    let n = energies.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            let phase = (Complex64::i() * z * (energies[k] - energies[i])).exp();
            acc += p[i] * b[(k, i)].conj() * phase * a[(k, i)];
        }
    }
    acc
}

#[test]
fn qubit_two_point_function() {
    let sys = GibbsSystem::new(diag_real(&[0.0, 1.0]), 1.0).unwrap();
    let sx = CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(|x| Complex64::new(x, 0.0)));
    let phi = rp_from_kms(&sys, &sx).unwrap();
    let p0 = 1.0 / (1.0 + (-1.0f64).exp());
    let p1 = 1.0 - p0;
    for k in 0..=16 {
        let t = k as f64 / 16.0;
        let expected = p0 * (-t).exp() + p1 * t.exp();
        let got = phi.eval(t).unwrap()[(0, 0)];
        assert!((got.re - expected).abs() < 1e-13, "t = {t}");
        assert!(got.im.abs() < 1e-13);
    }
    let at = phi.eval(1.0 / 64.0).unwrap()[(0, 0)].re;
    assert!((at - 0.992901).abs() < 5e-7);
}

#[test]
fn wrong_temperature_violates_kms() {
    let h = diag_real(&[0.0, 1.0]);
    let rho = diag_real(&boltzmann(&[0.0, 1.0], 2.0));
    let sys = GibbsSystem::with_state(h, 1.0, rho).unwrap();
    let a = CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0)));
    assert!(kms_residual(&sys, &a, &a.adjoint(), 0.3) > 1e-2);
}

#[test]
fn widely_spread_gibbs_state_keeps_modular_data() {
    let h = diag_real(&[-2.71, 0.225, 1.026, 2.225]);
    let sys = GibbsSystem::new(h, 1.763).unwrap();
    let report = tomita_from_gibbs(&sys, 4, 1).unwrap();
    assert!(report.boltzmann_residual < 1e-9);
    assert!(report.j_residual < 1e-9);
    assert!(report.delta_residual < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn psi_matches_closed_form(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let energies: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let beta = rng.gen_range(0.3..2.0);
        let sys = GibbsSystem::new(diag_real(&energies), beta).unwrap();
        let a = random::complex_matrix(&mut rng, n, n);
        let b = random::complex_matrix(&mut rng, n, n);
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..beta));
        let got = psi_value(&sys, z, &a, &b);
        let want = psi_oracle(&energies, beta, z, &a, &b);
        prop_assert!((got - want).norm() <= 1e-11 * want.norm().max(a.norm() * b.norm()));
    }

    #[test]
    fn gibbs_states_satisfy_kms(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random::hermitian(&mut rng, n, 1.0);
        let beta = rng.gen_range(0.3..2.0);
        let sys = GibbsSystem::new(h, beta).unwrap();
        let a = random::complex_matrix(&mut rng, n, n);
        let b = random::complex_matrix(&mut rng, n, n);
        let t = rng.gen_range(-1.0..1.0);
        let scale = a.norm() * b.norm();
        prop_assert!(kms_residual(&sys, &a, &b, t) <= 1e-10 * scale.max(1.0));
        let r = kms_ancont_check(&sys, &a, &b, t);
        prop_assert!(r.shifted <= 1e-10 && r.reflected <= 1e-10);
    }
}
