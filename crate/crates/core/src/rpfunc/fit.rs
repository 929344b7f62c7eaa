//! Recovery of `μ₊` from samples of `φ` on a fixed grid of candidate rates.
//!
//! With the design `D_{jl} = e^{−tⱼλₗ} + e^{−(β−tⱼ)λₗ}` the problem is
//! `min Σⱼ ‖φⱼ − Σₗ D_{jl} Wₗ‖_F²` subject to `Wₗ ⪰ 0`. Scalar data use
//! Lawson–Hanson NNLS. Matrix data start from the PSD projection of the
//! unconstrained least-squares solution and, if that does not fit, run
//! accelerated projected gradient (step `1/L`, `L = λ_max(DᵀD)`) followed by
//! a least-squares polish on the detected support.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::AtomicOperatorMeasure;
use crate::numcore::{
    check_square, eig_hermitian, hermitian_asymmetry, hermitian_part, re, svd_real, CMatrix,
    HERMITIAN_RTOL,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iters: usize,
    /// Stop once `residual ≤ rel_tol · ‖φ‖`.
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Nnls,
    LeastSquares,
    ProjectedGradient,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Fitted `μ₊` (zero weights dropped).
    pub measure: AtomicOperatorMeasure,
    /// One weight per candidate rate, in input order.
    pub weights: Vec<(f64, CMatrix)>,
    /// `sqrt(Σⱼ ‖φⱼ − Σₗ D_{jl} Wₗ‖_F²)`.
    pub residual: f64,
    pub relative_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: FitMethod,
}

type RMat = DMatrix<f64>;

fn lstsq(a: &RMat, b: &RMat) -> Result<RMat> {
    let (u, s, v) = svd_real(a)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let k = s.len();
    let utb = u.columns(0, k).transpose() * b;
    let mut scaled = RMat::zeros(k, b.ncols());
    for i in 0..k {
        if s[i] > 1e-14 * smax && s[i] > 0.0 {
            for c in 0..b.ncols() {
                scaled[(i, c)] = utb[(i, c)] / s[i];
            }
        }
    }
    Ok(v.columns(0, k) * scaled)
}

/// Lawson–Hanson active-set NNLS: `min ‖Ax − b‖` with `x ≥ 0`.
fn nnls(a: &RMat, b: &[f64], max_iters: usize) -> Result<(Vec<f64>, usize, bool)> {
    let n = a.ncols();
    let bv = RMat::from_column_slice(b.len(), 1, b);
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let scale = a.norm() * bv.norm();
    let tol = 1e-15 * scale.max(1e-300);
    let mut rejected = vec![false; n];
    let mut iters = 0;
    let solve_passive = |passive: &[bool]| -> Result<Vec<f64>> {
        let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        let sub = a.select_columns(idx.iter());
        let z = lstsq(&sub, &bv)?;
        let mut full = vec![0.0; n];
        for (k, &i) in idx.iter().enumerate() {
            full[i] = z[(k, 0)];
        }
        Ok(full)
    };
    loop {
        let xv = RMat::from_column_slice(n, 1, &x);
        let w = a.transpose() * (&bv - a * &xv);
        let candidate = (0..n)
            .filter(|&i| !passive[i] && !rejected[i] && w[(i, 0)] > tol)
            .max_by(|&i, &j| w[(i, 0)].total_cmp(&w[(j, 0)]));
        let Some(j) = candidate else {
            return Ok((x, iters, true));
        };
        if iters >= max_iters {
            return Ok((x, iters, false));
        }
        passive[j] = true;
        let trial = solve_passive(&passive)?;
        if trial[j] <= 0.0 {
            // column j cannot enter at this point
            passive[j] = false;
            rejected[j] = true;
            continue;
        }
        rejected.iter_mut().for_each(|r| *r = false);
        loop {
            iters += 1;
            let z = solve_passive(&passive)?;
            if (0..n).filter(|&i| passive[i]).all(|i| z[i] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in 0..n {
                if passive[i] && z[i] <= 0.0 {
                    let denom = x[i] - z[i];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for i in 0..n {
                x[i] += alpha * (z[i] - x[i]);
                if passive[i] && x[i] <= 1e-15 * scale.sqrt().max(1e-300) {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if iters >= max_iters {
                return Ok((x, iters, false));
            }
        }
    }
}

fn project_psd(w: &CMatrix) -> Result<CMatrix> {
    let spec = eig_hermitian(&hermitian_part(w))?;
    Ok(hermitian_part(&spec.map(|l| re(l.max(0.0)))))
}

struct Problem {
    design: RMat,
    /// `m × d²` targets, row `j` = `vec(φⱼ)` (row-major).
    targets: CMatrix,
    dim: usize,
    target_norm: f64,
}

impl Problem {
    fn residual(&self, w: &CMatrix) -> f64 {
        (self.design.map(re) * w - &self.targets).norm()
    }

    fn weight(&self, w: &CMatrix, l: usize) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |r, c| w[(l, r * d + c)])
    }

    fn set_weight(&self, w: &mut CMatrix, l: usize, m: &CMatrix) {
        let d = self.dim;
        for r in 0..d {
            for c in 0..d {
                w[(l, r * d + c)] = m[(r, c)];
            }
        }
    }

    fn project(&self, w: &CMatrix) -> Result<CMatrix> {
        let mut out = w.clone();
        for l in 0..w.nrows() {
            let p = project_psd(&self.weight(w, l))?;
            self.set_weight(&mut out, l, &p);
        }
        Ok(out)
    }

    /// Unconstrained least squares restricted to the columns in `support`,
    /// then projected onto the PSD cone.
    fn restricted_ls(&self, support: &[usize]) -> Result<CMatrix> {
        let l = self.design.ncols();
        let sub = self.design.select_columns(support.iter());
        let re_part = lstsq(&sub, &self.targets.map(|z| z.re))?;
        let im_part = lstsq(&sub, &self.targets.map(|z| z.im))?;
        let mut w = CMatrix::zeros(l, self.targets.ncols());
        for (k, &i) in support.iter().enumerate() {
            for c in 0..w.ncols() {
                w[(i, c)] = Complex64::new(re_part[(k, c)], im_part[(k, c)]);
            }
        }
        self.project(&w)
    }
}

/// Fits `μ₊` on the candidate rates `lambda_grid` to samples `(tⱼ, φⱼ)`.
pub fn fit_measure(
    times: &[f64],
    values: &[CMatrix],
    lambda_grid: &[f64],
    beta: f64,
    options: &FitOptions,
) -> Result<FitResult> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidBeta(beta));
    }
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: values.len(),
        });
    }
    if times.len() < 2 {
        return Err(Error::InvalidInput("at least two samples are required".into()));
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidInput("candidate rate grid is empty".into()));
    }
    if let Some(&l) = lambda_grid.iter().find(|l| l.is_nan() || **l < 0.0 || l.is_infinite()) {
        return Err(Error::NegativeRate(l));
    }
    if let Some(&t) = times.iter().find(|t| !(0.0..=beta).contains(*t)) {
        return Err(Error::OutOfRange {
            value: t,
            lo: 0.0,
            hi: beta,
        });
    }
    let d = check_square(&values[0])?;
    for (index, v) in values.iter().enumerate() {
        let dv = check_square(v)?;
        if dv != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: dv,
            });
        }
        if hermitian_asymmetry(v) > HERMITIAN_RTOL {
            return Err(Error::NonHermitianSample { index });
        }
    }
    let m = times.len();
    let nl = lambda_grid.len();
    let design = RMat::from_fn(m, nl, |j, l| {
        let lam = lambda_grid[l];
        (-times[j] * lam).exp() + (-(beta - times[j]) * lam).exp()
    });
    let targets = CMatrix::from_fn(m, d * d, |j, k| {
        let v = hermitian_part(&values[j]);
        v[(k / d, k % d)]
    });
    let target_norm = targets.norm();
    let problem = Problem {
        design,
        targets,
        dim: d,
        target_norm,
    };
    let goal = options.rel_tol * target_norm;

    let (w, iterations, converged, method) = if d == 1 {
        let b: Vec<f64> = (0..m).map(|j| problem.targets[(j, 0)].re).collect();
        let (x, it, ok) = nnls(&problem.design, &b, options.max_iters)?;
        let w = CMatrix::from_fn(nl, 1, |l, _| re(x[l]));
        (w, it, ok, FitMethod::Nnls)
    } else {
        fit_matrix(&problem, options, goal)?
    };

    let residual = problem.residual(&w);
    let weights: Vec<(f64, CMatrix)> = (0..nl)
        .map(|l| (lambda_grid[l], problem.weight(&w, l)))
        .collect();
    let measure = AtomicOperatorMeasure::new(
        d,
        weights
            .iter()
            .filter(|(_, w)| w.norm() > 0.0)
            .cloned()
            .collect(),
    )?;
    Ok(FitResult {
        measure,
        weights,
        residual,
        relative_residual: if problem.target_norm > 0.0 {
            residual / problem.target_norm
        } else {
            residual
        },
        iterations,
        converged,
        method,
    })
}

fn fit_matrix(problem: &Problem, options: &FitOptions, goal: f64) -> Result<(CMatrix, usize, bool, FitMethod)> {
    let nl = problem.design.ncols();
    let all: Vec<usize> = (0..nl).collect();
    let start = problem.restricted_ls(&all)?;
    let start_res = problem.residual(&start);
    if start_res <= goal {
        return Ok((start, 0, true, FitMethod::LeastSquares));
    }

    let dc = problem.design.map(re);
    let gram = problem.design.transpose() * &problem.design;
    let lip = eig_hermitian(&gram.map(re))?.max_eigenvalue().unwrap_or(1.0).max(1e-300);
    let dty = dc.transpose() * &problem.targets;
    let gram_c = gram.map(re);

    let mut x = start.clone();
    let mut y = start;
    let mut tk: f64 = 1.0;
    let mut best = x.clone();
    let mut best_res = start_res;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=options.max_iters {
        iterations = it;
        let grad = &gram_c * &y - &dty;
        let next = problem.project(&(&y - grad * re(1.0 / lip)))?;
        let step = (&next - &x).norm();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        y = &next + (&next - &x) * re((tk - 1.0) / t_next);
        tk = t_next;
        x = next;
        let res = problem.residual(&x);
        if res < best_res {
            best_res = res;
            best = x.clone();
        }
        if res <= goal || step <= 1e-15 * x.norm().max(1.0) {
            converged = true;
            break;
        }
    }

    let wmax = (0..nl).map(|l| problem.weight(&best, l).norm()).fold(0.0, f64::max);
    let support: Vec<usize> = (0..nl)
        .filter(|&l| problem.weight(&best, l).norm() > 1e-9 * wmax)
        .collect();
    if !support.is_empty() {
        let polished = problem.restricted_ls(&support)?;
        let pres = problem.residual(&polished);
        if pres < best_res {
            best = polished;
            best_res = pres;
        }
    }
    if best_res <= goal {
        converged = true;
    }
    Ok((best, iterations, converged, FitMethod::ProjectedGradient))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::diag_real;
    use crate::rpfunc::{basic_flambda, CircleRPFunction};

    fn sample(phi: &CircleRPFunction, m: usize) -> (Vec<f64>, Vec<CMatrix>) {
        let beta = phi.beta();
        let t: Vec<f64> = (0..m).map(|j| j as f64 * beta / (m - 1) as f64).collect();
        let v = t.iter().map(|&s| phi.eval(s).unwrap()).collect();
        (t, v)
    }

    #[test]
    fn recovers_flambda() {
        let f1 = basic_flambda(1.0, 1.0).unwrap();
        let (t, v) = sample(&f1, 30);
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
        let fit = fit_measure(&t, &v, &grid, 1.0, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.method, FitMethod::Nnls);
        for (l, w) in &fit.weights {
            let expect = if *l == 1.0 { 1.0 } else { 0.0 };
            assert!((w[(0, 0)].re - expect).abs() <= 1e-8, "λ={l}: {}", w[(0, 0)]);
        }
        assert!(fit.residual <= 1e-8);
    }

    #[test]
    fn constant_two() {
        let t: Vec<f64> = (0..10).map(|j| j as f64 / 9.0).collect();
        let v = vec![CMatrix::from_element(1, 1, re(2.0)); 10];
        let fit = fit_measure(&t, &v, &[0.0, 1.0], 1.0, &FitOptions::default()).unwrap();
        assert!((fit.weights[0].1[(0, 0)].re - 1.0).abs() < 1e-10);
        assert!(fit.weights[1].1[(0, 0)].re.abs() < 1e-10);
        assert!(fit.residual <= 1e-10);
    }

    #[test]
    fn diagonal_matrix_matches_scalar_fits() {
        let mu = AtomicOperatorMeasure::new(
            2,
            vec![(0.5, diag_real(&[1.0, 0.2])), (3.0, diag_real(&[0.3, 2.0]))],
        )
        .unwrap();
        let phi = CircleRPFunction::from_measure(mu, 1.0).unwrap();
        let (t, v) = sample(&phi, 30);
        let grid = [0.0, 0.5, 1.5, 3.0];
        let fit = fit_measure(&t, &v, &grid, 1.0, &FitOptions::default()).unwrap();
        for k in 0..2 {
            let vk: Vec<CMatrix> = v.iter().map(|m| CMatrix::from_element(1, 1, m[(k, k)])).collect();
            let sfit = fit_measure(&t, &vk, &grid, 1.0, &FitOptions::default()).unwrap();
            for (l, rate) in grid.iter().enumerate() {
                let a = fit.weights[l].1[(k, k)].re;
                let b = sfit.weights[l].1[(0, 0)].re;
                assert!((a - b).abs() <= 1e-6, "entry {k} rate {rate}: {a} vs {b}");
            }
        }
        assert!((fit.weights[1].1[(0, 0)].re - 1.0).abs() <= 1e-6);
        assert!((fit.weights[3].1[(1, 1)].re - 2.0).abs() <= 1e-6);
    }

    #[test]
    fn projected_gradient_path_keeps_psd() {
        let u = CMatrix::from_row_slice(2, 2, &[re(1.0), re(1.0), re(1.0), re(1.0)]);
        let mu = AtomicOperatorMeasure::new(2, vec![(0.0, u.clone()), (2.0, diag_real(&[0.0, 1.0]))]).unwrap();
        let phi = CircleRPFunction::from_measure(mu, 1.0).unwrap();
        let (t, clean) = sample(&phi, 12);
        // a fixed off-model perturbation with an indefinite direction
        let v: Vec<CMatrix> = clean
            .iter()
            .zip(&t)
            .map(|(m, &s)| m + diag_real(&[1e-3 * (7.0 * s).sin(), -1e-3 * (5.0 * s).cos()]))
            .collect();
        let fit = fit_measure(&t, &v, &[0.0, 1.0, 2.0], 1.0, &FitOptions { max_iters: 2000, rel_tol: 1e-10 }).unwrap();
        assert_eq!(fit.method, FitMethod::ProjectedGradient);
        for (_, w) in &fit.weights {
            let e = eig_hermitian(w).unwrap();
            assert!(e.min_eigenvalue().unwrap() >= -1e-12);
        }
        let noise: f64 = v.iter().zip(&clean).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt();
        assert!(fit.residual <= noise, "{} vs {}", fit.residual, noise);
    }

    #[test]
    fn validates_input() {
        let v = vec![CMatrix::from_element(1, 1, re(2.0)); 2];
        assert!(matches!(
            fit_measure(&[0.0], &v[..1], &[0.0], 1.0, &FitOptions::default()),
            Err(Error::InvalidInput(_))
        ));
        assert_eq!(
            fit_measure(&[0.0, 1.0], &v, &[-1.0], 1.0, &FitOptions::default()).unwrap_err(),
            Error::NegativeRate(-1.0)
        );
        assert!(matches!(
            fit_measure(&[0.0, 2.0], &v, &[0.0], 1.0, &FitOptions::default()),
            Err(Error::OutOfRange { .. })
        ));
    }
}
