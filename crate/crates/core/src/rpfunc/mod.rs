//! Reflection positive functions on the circle `T_β`.
//!
//! A [`CircleRPFunction`] is backed by a measure `μ₊` on `[0, ∞)`, by a PSD
//! generator `A`, or by raw samples. The first two give
//! `φ(t) = Σ (e^{−tλ} + e^{−(β−t)λ}) W` resp. `e^{−tA} + e^{−(β−t)A}` and are
//! symmetric (`φ(β−t) = φ(t)`) by construction. Sample-backed functions
//! only answer at their grid points.

mod fit;

pub use fit::{fit_measure, FitMethod, FitOptions, FitResult};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{
    bochner_certificate, cyclic_grid, symmetrize_from_plus, AtomicOperatorMeasure,
    CircleParameter,
};
use crate::numcore::{
    check_finite, check_square, eig_hermitian, hermitian_asymmetry, hermitian_part,
    psd_certificate, re, CMatrix, SpectralDecomposition, DEFAULT_PSD_TOL, HERMITIAN_RTOL,
};

/// Number of interior grid points used by default verification runs.
pub const DEFAULT_GRID_POINTS: usize = 20;
/// Default order of the cyclic subgroup for the Bochner certificate.
pub const DEFAULT_FOURIER_N: usize = 256;
/// Relative tolerance (times `β`) for matching a sample grid point.
pub const GRID_MATCH_RTOL: f64 = 1e-12;
/// Relative gap used to cluster generator eigenvalues into atoms.
pub const CLUSTER_RTOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub enum Backing {
    /// `μ₊`, supported on `[0, ∞)`.
    Measure(AtomicOperatorMeasure),
    Generator {
        a: CMatrix,
        spectrum: SpectralDecomposition,
    },
    Samples {
        grid: Vec<f64>,
        values: Vec<CMatrix>,
    },
}

#[derive(Debug, Clone)]
pub struct CircleRPFunction {
    beta: CircleParameter,
    dim: usize,
    backing: Backing,
}

/// `c_n(λ) = 2βλ(1 − e^{−βλ}) / ((λβ)² + (2πn)²)`, with `c_n(0) = 2·[n = 0]`.
pub fn fourier_coefficient_scalar(lambda: f64, beta: f64, n: i64) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 2.0 } else { 0.0 };
    }
    let two_pi_n = 2.0 * std::f64::consts::PI * n as f64;
    let lb = lambda * beta;
    2.0 * lb * (-(-lb).exp_m1()) / (lb * lb + two_pi_n * two_pi_n)
}

/// `f_λ(t) = e^{−tλ} + e^{−(β−t)λ}`.
pub fn basic_flambda(lambda: f64, beta: f64) -> Result<CircleRPFunction> {
    if lambda.is_nan() || lambda < 0.0 || lambda.is_infinite() {
        return Err(Error::NegativeRate(lambda));
    }
    let mu = AtomicOperatorMeasure::scalar(&[(lambda, 1.0)])?;
    CircleRPFunction::from_measure(mu, beta)
}

/// `m` equally spaced points `jβ/(m+1)`, `j = 1..=m`, inside `(0, β)`.
pub fn uniform_interior_grid(m: usize, beta: f64) -> Vec<f64> {
    (1..=m).map(|j| j as f64 * beta / (m + 1) as f64).collect()
}

impl CircleRPFunction {
    pub fn from_measure(mu_plus: AtomicOperatorMeasure, beta: f64) -> Result<Self> {
        let beta = CircleParameter::new(beta)?;
        if let Some(a) = mu_plus.atoms().iter().find(|a| a.lambda < 0.0) {
            return Err(Error::NegativeAtom(a.lambda));
        }
        Ok(Self {
            beta,
            dim: mu_plus.dim(),
            backing: Backing::Measure(mu_plus),
        })
    }

    /// Generator-backed function `e^{−tA} + e^{−(β−t)A}` for PSD `A`.
    pub fn from_generator(a: CMatrix, beta: f64) -> Result<Self> {
        let beta = CircleParameter::new(beta)?;
        let spectrum = eig_hermitian(&a)?;
        let cert = crate::numcore::certificate_from_spectrum(&spectrum, DEFAULT_PSD_TOL);
        if !cert.is_psd {
            return Err(Error::NotPsd {
                min_eig: cert.min_eig,
            });
        }
        Ok(Self {
            beta,
            dim: a.nrows(),
            backing: Backing::Generator {
                a: hermitian_part(&a),
                spectrum,
            },
        })
    }

    /// Sample-backed function on a strictly increasing grid inside `[0, β]`.
    pub fn from_samples(grid: Vec<f64>, values: Vec<CMatrix>, beta: f64) -> Result<Self> {
        let beta = CircleParameter::new(beta)?;
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if grid.is_empty() {
            return Err(Error::InvalidInput("sample grid is empty".into()));
        }
        for (i, &t) in grid.iter().enumerate() {
            if !t.is_finite() || t < 0.0 || t > beta.beta() || (i > 0 && t <= grid[i - 1]) {
                return Err(Error::GridOutOfRange(t));
            }
        }
        let dim = check_square(&values[0])?;
        for (index, v) in values.iter().enumerate() {
            let d = check_square(v)?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
            check_finite(v)?;
            if hermitian_asymmetry(v) > HERMITIAN_RTOL {
                return Err(Error::NonHermitianSample { index });
            }
        }
        let values = values.iter().map(hermitian_part).collect();
        Ok(Self {
            beta,
            dim,
            backing: Backing::Samples { grid, values },
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta.beta()
    }

    pub fn circle(&self) -> CircleParameter {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn is_sample_backed(&self) -> bool {
        matches!(self.backing, Backing::Samples { .. })
    }

    fn sample_index(grid: &[f64], t: f64, beta: f64) -> Option<usize> {
        let tol = GRID_MATCH_RTOL * beta;
        let pos = grid.partition_point(|&g| g < t - tol);
        (pos < grid.len() && (grid[pos] - t).abs() <= tol).then_some(pos)
    }

    /// `φ(t)` for `0 ≤ t ≤ β`.
    pub fn eval(&self, t: f64) -> Result<CMatrix> {
        let beta = self.beta();
        if !(0.0..=beta).contains(&t) {
            return Err(Error::OutOfRange {
                value: t,
                lo: 0.0,
                hi: beta,
            });
        }
        match &self.backing {
            Backing::Measure(mu) => Ok(mu.integrate(|l| re((-t * l).exp() + (-(beta - t) * l).exp()))),
            Backing::Generator { spectrum, .. } => {
                Ok(spectrum.map(|l| re((-t * l).exp() + (-(beta - t) * l).exp())))
            }
            Backing::Samples { grid, values } => Self::sample_index(grid, t, beta)
                .map(|i| values[i].clone())
                .ok_or(Error::NotOnGrid(t)),
        }
    }

    /// Analytic continuation `Σ (e^{−zλ} + e^{−(β−z)λ}) W` to complex `z`.
    pub fn eval_complex(&self, z: Complex64) -> Result<CMatrix> {
        let beta = self.beta();
        let f = |l: f64| (-z * l).exp() + (-(re(beta) - z) * l).exp();
        match &self.backing {
            Backing::Measure(mu) => Ok(mu.integrate(f)),
            Backing::Generator { spectrum, .. } => Ok(spectrum.map(f)),
            Backing::Samples { .. } => Err(Error::WrongBacking {
                expected: "measure or generator",
            }),
        }
    }

    /// The measure `μ₊`. Generator-backed functions yield the spectral
    /// measure of `A` (clustered eigenvalues, projector weights).
    pub fn plus_measure(&self) -> Result<AtomicOperatorMeasure> {
        match &self.backing {
            Backing::Measure(mu) => Ok(mu.clone()),
            Backing::Generator { spectrum, .. } => spectral_measure(spectrum, true),
            Backing::Samples { .. } => Err(Error::WrongBacking {
                expected: "measure or generator",
            }),
        }
    }

    /// The symmetrized measure `μ` with `L(μ) = φ` on `[0, β]`.
    pub fn measure(&self) -> Result<AtomicOperatorMeasure> {
        symmetrize_from_plus(&self.plus_measure()?, self.beta)
    }

    /// `c_n = Σ c_n(λᵢ) Wᵢ`, the `n`-th Fourier coefficient of `φ` on `T_β`.
    pub fn fourier_coefficient(&self, n: i64) -> Result<CMatrix> {
        let beta = self.beta();
        let mu = self.plus_measure().map_err(|_| Error::WrongBacking {
            expected: "measure",
        })?;
        Ok(mu.integrate(|l| re(fourier_coefficient_scalar(l, beta, n))))
    }

    /// `Σ_{|n| ≤ order} c_n e^{2πint/β}`.
    pub fn fourier_partial_sum(&self, t: f64, order: i64) -> Result<CMatrix> {
        let beta = self.beta();
        let mu = self.plus_measure()?;
        Ok(mu.integrate(|l| {
            let mut acc = fourier_coefficient_scalar(l, beta, 0);
            for n in 1..=order {
                let c = fourier_coefficient_scalar(l, beta, n);
                acc += 2.0 * c * (2.0 * std::f64::consts::PI * n as f64 * t / beta).cos();
            }
            re(acc)
        }))
    }

    /// Block matrix `[φ((tⱼ + tₖ)/2)]` on a strictly increasing grid in `(0, β)`.
    pub fn os_kernel(&self, grid: &[f64]) -> Result<CMatrix> {
        let beta = self.beta();
        for (i, &t) in grid.iter().enumerate() {
            if !(t > 0.0 && t < beta) || (i > 0 && t <= grid[i - 1]) {
                return Err(Error::GridOutOfRange(t));
            }
        }
        let d = self.dim;
        let m = grid.len();
        let mut k = CMatrix::zeros(m * d, m * d);
        for x in 0..m {
            for y in x..m {
                let block = self.eval(0.5 * (grid[x] + grid[y]))?;
                k.view_mut((x * d, y * d), (d, d)).copy_from(&block);
                if x != y {
                    k.view_mut((y * d, x * d), (d, d)).copy_from(&block.adjoint());
                }
            }
        }
        Ok(k)
    }

    /// Largest `‖φ(β−t) − φ(t)‖_F` over grid points where both sides are defined.
    pub fn symmetry_residual(&self, grid: &[f64]) -> f64 {
        let beta = self.beta();
        grid.iter()
            .filter_map(|&t| match (self.eval(t), self.eval(beta - t)) {
                (Ok(a), Ok(b)) => Some((a - b).norm()),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// If the samples sit on the full uniform grid `kβ/M`, `k = 0..=M`, returns `M`.
    pub fn uniform_sample_order(&self) -> Option<usize> {
        let Backing::Samples { grid, .. } = &self.backing else {
            return None;
        };
        let m = grid.len().checked_sub(1)?;
        if m == 0 {
            return None;
        }
        let beta = self.beta();
        let tol = GRID_MATCH_RTOL * beta;
        grid.iter()
            .enumerate()
            .all(|(k, &t)| (t - k as f64 * beta / m as f64).abs() <= tol)
            .then_some(m)
    }

    /// Grid points (sample grid for sample-backed functions).
    pub fn sample_grid(&self) -> Option<&[f64]> {
        match &self.backing {
            Backing::Samples { grid, .. } => Some(grid),
            _ => None,
        }
    }
}

/// Atoms at the clustered eigenvalues of a Hermitian matrix with the spectral
/// projections as weights. With `clamp`, clusters within tolerance of zero
/// are placed exactly at zero.
pub fn spectral_measure(spectrum: &SpectralDecomposition, clamp: bool) -> Result<AtomicOperatorMeasure> {
    let n = spectrum.dim();
    let tol = CLUSTER_RTOL * spectrum.spectral_norm().max(1.0);
    let vals = spectrum.eigenvalues();
    let u = spectrum.eigenvectors();
    let mut atoms = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] <= tol {
            end += 1;
        }
        let cols = u.columns(start, end - start);
        let proj = cols * cols.adjoint();
        let mut center = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        if clamp && center.abs() <= tol {
            center = 0.0;
        }
        atoms.push((center, hermitian_part(&proj)));
        start = end;
    }
    AtomicOperatorMeasure::new(n, atoms)
}

/// Outcome of [`check_reflection_positive`].
#[derive(Debug, Clone)]
pub struct RpReport {
    pub grid_points: usize,
    pub n_fourier: usize,
    pub tol: f64,
    pub kernel_min_eig: f64,
    pub kernel_norm: f64,
    pub kernel_psd: bool,
    pub fourier_min_eig: f64,
    pub fourier_worst_n: i64,
    pub fourier_psd: bool,
    pub symmetry_residual: f64,
    pub symmetric: bool,
    /// `c_n` for `n = 0..n_fourier/2` from the closed form when available,
    /// otherwise the DFT estimates.
    pub coefficients: Vec<CMatrix>,
}

impl RpReport {
    pub fn passed(&self) -> bool {
        self.kernel_psd && self.fourier_psd && self.symmetric
    }
}

/// Certifies OS-kernel positivity on `grid` and positive definiteness on the
/// cyclic subgroup of order `n_fourier`, and checks `φ(β−t) = φ(t)`.
pub fn check_reflection_positive(
    phi: &CircleRPFunction,
    grid: &[f64],
    n_fourier: usize,
    tol: f64,
) -> Result<RpReport> {
    let kernel = phi.os_kernel(grid)?;
    let kcert = psd_certificate(&kernel, tol)?;
    let cyc = cyclic_grid(n_fourier, phi.circle());
    let samples = cyc.iter().map(|&t| phi.eval(t)).collect::<Result<Vec<_>>>()?;
    let fcert = bochner_certificate(&samples, tol)?;
    let mut sym_points: Vec<f64> = grid.to_vec();
    sym_points.extend_from_slice(&cyc);
    let symmetry_residual = phi.symmetry_residual(&sym_points);
    let scale = kcert.norm.max(fcert.scale).max(1.0);
    let coefficients = match phi.plus_measure() {
        Ok(_) => (0..=(n_fourier / 2) as i64)
            .map(|n| phi.fourier_coefficient(n))
            .collect::<Result<Vec<_>>>()?,
        Err(_) => fcert.coefficients[..=n_fourier / 2].to_vec(),
    };
    Ok(RpReport {
        grid_points: grid.len(),
        n_fourier,
        tol,
        kernel_min_eig: kcert.min_eig,
        kernel_norm: kcert.norm,
        kernel_psd: kcert.is_psd,
        fourier_min_eig: fcert.min_eig,
        fourier_worst_n: fcert.worst_frequency,
        fourier_psd: fcert.is_positive,
        symmetry_residual,
        symmetric: symmetry_residual <= tol.max(1e-12) * scale,
        coefficients,
    })
}
