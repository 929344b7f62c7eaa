//! The five pipelines behind the subcommands.

use num_complex::Complex64;
use serde_json::json;

use rpcircle::kms::{
    self, hermitian_basis, kms_residual, psi_kernel_certificate, rp_from_kms, tomita_from_gibbs, GibbsSystem,
};
use rpcircle::measures::AtomicOperatorMeasure;
use rpcircle::numcore::{eig_hermitian, identity, relative_difference, AntiUnitaryMap, CMatrix};
use rpcircle::realization::{check_j_existence, dilation_residual, euclidean_realize, reconstruct_dual};
use rpcircle::rpfunc::{
    basic_flambda, check_reflection_positive, fit_measure, uniform_interior_grid, CircleRPFunction, FitOptions, RpReport,
};
use rpcircle::standardsub::{
    check_lemma_identities, modular_rep, pair_to_subspace, subspace_to_tomita, ModularPair, StandardSubspace,
    IDENTITY_TOL, PAIR_TOL, SUBSPACE_TOL,
};
use rpcircle::Error;

use crate::args::{CheckFunctionArgs, FitArgs, KmsArgs, RealizeArgs, StandardArgs};
use crate::input::{
    load, measure_to_json, FunctionInput, FunctionSpec, KmsInput, MatrixJson, PairInput, RealizeInput,
    StateSpec, SCHEMA_VERSION,
};
use crate::report::Report;
use crate::samples::{load_samples, parse_lambda_grid};
use crate::{CliError, CliResult, Outcome};

/// Residual bound for exact identities (JHJ = −H, dilation, KMS, Tomita).
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Eigenvalue agreement after a realization round trip.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Relative residual above which a fit is flagged as inexact.
pub const FIT_EXACT_RTOL: f64 = 1e-8;
/// Leading Fourier coefficients copied into reports.
const REPORTED_COEFFICIENTS: usize = 8;
/// Rows in the `φ^{A,A}` CSV.
const CURVE_INTERVALS: usize = 64;

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn check_beta(beta: f64) -> CliResult<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(CliError::Core(Error::InvalidBeta(beta)))
    }
}

fn build_function(input: &FunctionInput) -> CliResult<CircleRPFunction> {
    check_beta(input.beta)?;
    let beta = input.beta;
    let f = match &input.function {
        FunctionSpec::Measure { dim, atoms } => {
            if *dim == 0 {
                return Err(schema("measure dim must be positive"));
            }
            let atoms = atoms
                .iter()
                .enumerate()
                .map(|(k, a)| Ok((a.lambda, a.weight.to_matrix(&format!("atoms[{k}].weight"))?)))
                .collect::<CliResult<Vec<_>>>()?;
            let mu = if atoms.is_empty() {
                AtomicOperatorMeasure::empty(*dim)
            } else {
                AtomicOperatorMeasure::new(*dim, atoms)?
            };
            CircleRPFunction::from_measure(mu, beta)?
        }
        FunctionSpec::Generator { a } => CircleRPFunction::from_generator(a.to_matrix("a")?, beta)?,
        FunctionSpec::Flambda { lambda } => basic_flambda(*lambda, beta)?,
        FunctionSpec::Samples { grid, values } => {
            let values = values
                .iter()
                .enumerate()
                .map(|(k, v)| v.to_matrix(&format!("values[{k}]")))
                .collect::<CliResult<Vec<_>>>()?;
            CircleRPFunction::from_samples(grid.clone(), values, beta)?
        }
    };
    Ok(f)
}

/// Grid, Fourier order and φ evaluation points for a certificate.
struct Plan {
    grid: Vec<f64>,
    n_fourier: usize,
    curve: Vec<f64>,
}

/// Sample-backed functions are only known on their grid: the OS kernel uses
/// the odd-indexed points (midpoints land on the grid) and the Fourier test
/// uses the grid itself.
fn plan_for(phi: &CircleRPFunction, grid_points: usize, n_fourier: usize) -> CliResult<Plan> {
    let beta = phi.beta();
    if let Some(samples) = phi.sample_grid() {
        let m = phi
            .uniform_sample_order()
            .filter(|m| m % 2 == 0)
            .ok_or_else(|| schema("sample grid must be kβ/M, k = 0..=M, with M even"))?;
        return Ok(Plan {
            grid: samples[1..m].iter().step_by(2).copied().collect(),
            n_fourier: m,
            curve: samples.to_vec(),
        });
    }
    if grid_points == 0 {
        return Err(schema("--grid must be positive"));
    }
    if n_fourier < 2 || !n_fourier.is_multiple_of(2) {
        return Err(schema("--fourier must be an even integer >= 2"));
    }
    Ok(Plan {
        grid: uniform_interior_grid(grid_points, beta),
        n_fourier,
        curve: (0..=n_fourier).map(|k| k as f64 * beta / n_fourier as f64).collect(),
    })
}

fn certify(phi: &CircleRPFunction, plan: &Plan, tol: f64) -> CliResult<RpReport> {
    Ok(check_reflection_positive(phi, &plan.grid, plan.n_fourier, tol)?)
}

fn record_certificate(report: &mut Report, prefix: &str, r: &RpReport) {
    let kernel_floor = -r.tol * r.kernel_norm.max(1.0);
    report
        .at_least(&format!("{prefix}os_kernel_psd"), r.kernel_min_eig, kernel_floor)
        .holds(&format!("{prefix}fourier_psd"), r.fourier_psd)
        .holds(&format!("{prefix}reflection_symmetric"), r.symmetric);
}

fn certificate_details(r: &RpReport) -> serde_json::Value {
    json!({
        "grid_points": r.grid_points,
        "n_fourier": r.n_fourier,
        "kernel_min_eig": r.kernel_min_eig,
        "kernel_norm": r.kernel_norm,
        "fourier_min_eig": r.fourier_min_eig,
        "fourier_worst_n": r.fourier_worst_n,
        "symmetry_residual": r.symmetry_residual,
        "leading_coefficients": r.coefficients.iter().take(REPORTED_COEFFICIENTS + 1)
            .map(MatrixJson::from_matrix).collect::<Vec<_>>(),
    })
}

fn csv_string(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    rows(&mut w).expect("writing CSV to memory");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn check_function(args: &CheckFunctionArgs, tol: f64) -> CliResult<Outcome> {
    let input: FunctionInput = load(&args.input)?;
    let phi = build_function(&input)?;
    let plan = plan_for(&phi, args.grid, args.fourier)?;
    let cert = certify(&phi, &plan, tol)?;

    let mut report = Report::new("check-function");
    report
        .param("input", args.input.display().to_string())
        .param("beta", phi.beta())
        .param("dim", phi.dim())
        .param("grid_points", plan.grid.len())
        .param("fourier_order", plan.n_fourier)
        .param("backing", backing_name(&phi))
        .tolerance("psd_rtol", tol);
    record_certificate(&mut report, "", &cert);
    report.detail("certificate", certificate_details(&cert));
    let mut outcome = Outcome::new(report.finish());

    if args.csv.is_some() {
        let d = phi.dim();
        let values = plan.curve.iter().map(|&t| phi.eval(t)).collect::<Result<Vec<_>, _>>()?;
        outcome.csv = Some(csv_string(|w| {
            w.write_record(["series", "x", "row", "col", "re", "im"])?;
            for (t, v) in plan.curve.iter().zip(&values) {
                write_entries(w, "phi", &num(*t), v, d)?;
            }
            for (n, c) in cert.coefficients.iter().enumerate() {
                write_entries(w, "c", &n.to_string(), c, d)?;
            }
            Ok(())
        }));
    }
    Ok(outcome)
}

fn write_entries(w: &mut csv::Writer<Vec<u8>>, series: &str, x: &str, m: &CMatrix, d: usize) -> csv::Result<()> {
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            w.write_record([series, x, &i.to_string(), &j.to_string(), &num(z.re), &num(z.im)])?;
        }
    }
    Ok(())
}

fn backing_name(phi: &CircleRPFunction) -> &'static str {
    use rpcircle::rpfunc::Backing;
    match phi.backing() {
        Backing::Measure(_) => "measure",
        Backing::Generator { .. } => "generator",
        Backing::Samples { .. } => "samples",
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn realize(args: &RealizeArgs, tol: f64) -> CliResult<Outcome> {
    let input: RealizeInput = load(&args.input)?;
    check_beta(args.beta)?;
    let h = input.h.to_matrix("h")?;
    let beta = args.beta;
    let existence = check_j_existence(&h)?;
    let n = h.nrows();
    let spectrum = sorted(eig_hermitian(&h)?.eigenvalues().to_vec());
    let scale = spectrum.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let pairing: Vec<_> = existence
        .pairing
        .iter()
        .map(|p| {
            json!({
                "lambda": p.lambda, "multiplicity": p.multiplicity,
                "partner": p.partner, "partner_multiplicity": p.partner_multiplicity,
            })
        })
        .collect();

    let mut report = Report::new("realize");
    report
        .param("input", args.input.display().to_string())
        .param("beta", beta)
        .param("dim", n)
        .tolerance("psd_rtol", tol)
        .tolerance("residual", RESIDUAL_TOL)
        .tolerance("spectrum", SPECTRUM_TOL)
        .detail("spectrum", &spectrum)
        .detail("pairing", pairing)
        .detail("zero_multiplicity", existence.zero_multiplicity)
        .holds("spectrum_symmetric", existence.exists);

    let mut diagnostics = Vec::new();
    if !existence.exists {
        diagnostics.push(format!("spectrum is not symmetric under negation:\n{existence}"));
        return Ok(with_diagnostics(report.finish(), diagnostics));
    }

    let grid = uniform_interior_grid(20, beta);
    let dilation_grid: Vec<f64> = (0..20).map(|k| k as f64 * beta / 19.0).collect();

    if existence.zero_multiplicity == n {
        // H = 0: the trivial representation, φ ≡ 2·1.
        let phi = CircleRPFunction::from_generator(CMatrix::zeros(n, n), beta)?;
        let dual = reconstruct_dual(&phi)?;
        let cert = check_reflection_positive(&phi, &grid, 256, tol)?;
        record_certificate(&mut report, "phi_", &cert);
        report
            .at_most("spectrum_round_trip", max_abs_diff(&sorted(dual.spectrum()), &spectrum), SPECTRUM_TOL * scale)
            .at_most("dual_dilation", dual.dilation_residual(&phi, &dilation_grid)?, RESIDUAL_TOL * scale)
            .detail("branch", "trivial")
            .detail("phi_plus_measure", measure_to_json(&phi.plus_measure()?))
            .detail("j_conjugation", MatrixJson::from_matrix(&identity(n)))
            .detail("r", MatrixJson::from_matrix(&identity(n)))
            .detail("reconstructed_spectrum", sorted(dual.spectrum()));
        return Ok(Outcome::new(report.finish()));
    }
    if existence.zero_multiplicity > 0 {
        report.holds("no_zero_modes", false).detail("branch", "zero_modes");
        diagnostics.push(format!(
            "generator has a zero mode of multiplicity {}; realization needs a trivial kernel",
            existence.zero_multiplicity
        ));
        return Ok(with_diagnostics(report.finish(), diagnostics));
    }

    let bundle = euclidean_realize(&h, beta)?;
    let dual = reconstruct_dual(&bundle.phi)?;
    let cert = check_reflection_positive(&bundle.phi, &grid, 256, tol)?;
    let reconstructed = sorted(dual.spectrum());
    let (mu_sym, mu_pull) = bundle.measure_identity_residuals()?;
    record_certificate(&mut report, "phi_", &cert);
    report
        .at_most("jhj_plus_h", bundle.j_commutation_residual(), RESIDUAL_TOL * scale)
        .at_most("rhr_plus_h", bundle.r_residual(), RESIDUAL_TOL * scale)
        .at_most("dilation", dilation_residual(&bundle, &dilation_grid)?, RESIDUAL_TOL * scale)
        .at_most("measure_identity", mu_sym.max(mu_pull), RESIDUAL_TOL * scale)
        .at_most("spectrum_round_trip", max_abs_diff(&reconstructed, &spectrum), SPECTRUM_TOL * scale)
        .at_most("dual_dilation", dual.dilation_residual(&bundle.phi, &dilation_grid)?, RESIDUAL_TOL * scale)
        .detail("branch", "euclidean")
        .detail("phi_plus_measure", measure_to_json(&bundle.phi.plus_measure()?))
        .detail("j_conjugation", MatrixJson::from_matrix(bundle.jmap.matrix()))
        .detail("r", MatrixJson::from_matrix(&bundle.r))
        .detail("embedding", MatrixJson::from_matrix(&bundle.j))
        .detail("reconstructed_spectrum", reconstructed)
        .detail("certificate", certificate_details(&cert));
    Ok(Outcome::new(report.finish()))
}

fn with_diagnostics(report: Report, diagnostics: Vec<String>) -> Outcome {
    let mut o = Outcome::new(report);
    o.diagnostics = diagnostics;
    o
}

pub fn standard_roundtrip(args: &StandardArgs, tol: f64) -> CliResult<Outcome> {
    let input: PairInput = load(&args.input)?;
    let delta = input.delta.to_matrix("delta")?;
    let j = AntiUnitaryMap::new(input.j.to_matrix("j")?)?;
    let pair = ModularPair::new(delta, j)?;
    let n = pair.dim();

    let v = pair_to_subspace(&pair)?;
    let tomita = subspace_to_tomita(&v)?;
    let back = pair_to_subspace(&tomita.pair)?;
    let lemma = check_lemma_identities(&v, &pair, args.samples, args.seed)?;
    let delta_rt = relative_difference(tomita.pair.delta(), pair.delta());
    let j_rt = (tomita.pair.j().matrix() - pair.j().matrix()).norm();
    let group_law = [(0.3, -0.7), (1.1, 0.4), (-2.0, 0.25)]
        .iter()
        .flat_map(|&(s, t)| {
            [(false, false), (false, true), (true, false), (true, true)].map(|(a, b)| {
                let lhs = modular_rep(&pair, s, a).compose(&modular_rep(&pair, t, b));
                lhs.distance(&modular_rep(&pair, s + t, a ^ b))
            })
        })
        .fold(0.0, f64::max);
    let real = v.distance(&StandardSubspace::real_points(n));
    let delta_spec = eig_hermitian(pair.delta())?.eigenvalues().to_vec();

    let mut report = Report::new("standard-roundtrip");
    report
        .param("input", args.input.display().to_string())
        .param("dim", n)
        .param("samples", args.samples)
        .param("seed", args.seed)
        .tolerance("psd_rtol", tol)
        .tolerance("pair", PAIR_TOL)
        .tolerance("subspace", SUBSPACE_TOL)
        .tolerance("identity", IDENTITY_TOL)
        .at_most("delta_round_trip", delta_rt, PAIR_TOL)
        .at_most("j_round_trip", j_rt, PAIR_TOL)
        .at_most("subspace_round_trip", v.distance(&back), SUBSPACE_TOL)
        .at_most("lemma_identities", lemma.max_residual(), IDENTITY_TOL)
        .holds("direct_sum", lemma.direct_sum_defect == 0)
        .holds("reality_consistent", lemma.reality_consistent())
        .at_most("modular_group_law", group_law, PAIR_TOL)
        .detail("subspace_dim", v.dim())
        .detail("subspace_is_real_points", real <= SUBSPACE_TOL)
        .detail("subspace_basis", MatrixJson::from_matrix(&v.complex_basis()))
        .detail("delta_spectrum", delta_spec)
        .detail("lemma", lemma.to_string())
        .detail("delta_is_identity", lemma.delta_is_identity);
    Ok(Outcome::new(report.finish()))
}

fn kms_system(input: &KmsInput) -> CliResult<GibbsSystem> {
    check_beta(input.beta)?;
    let h = input.h.to_matrix("h")?;
    let sys = match &input.state {
        None => GibbsSystem::new(h, input.beta)?,
        Some(StateSpec::Gibbs { beta }) => {
            check_beta(*beta)?;
            let rho = GibbsSystem::new(h.clone(), *beta)?.rho().clone();
            GibbsSystem::with_state(h, input.beta, rho)?
        }
        Some(StateSpec::Density { rho }) => GibbsSystem::with_state(h, input.beta, rho.to_matrix("rho")?)?,
    };
    Ok(sys)
}

pub fn kms(args: &KmsArgs, tol: f64) -> CliResult<Outcome> {
    let input: KmsInput = load(&args.input)?;
    let sys = kms_system(&input)?;
    let n = sys.dim();
    let beta = sys.beta();
    let observables = match &input.observables {
        Some(list) if list.is_empty() => return Err(schema("observables must be non-empty")),
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(k, m)| m.to_matrix(&format!("observables[{k}]")))
            .collect::<CliResult<Vec<_>>>()?,
        None => hermitian_basis(n),
    };
    for (k, a) in observables.iter().enumerate() {
        if a.shape() != (n, n) {
            return Err(schema(format!("observables[{k}] must be {n}x{n}")));
        }
    }

    let times: Vec<f64> = (0..10).map(|k| -beta + 2.0 * beta * k as f64 / 9.0).collect();
    let mut kms_max = 0.0f64;
    let mut kms_scale = 1.0f64;
    for a in &observables {
        for b in &observables {
            kms_scale = kms_scale.max(a.norm() * b.norm());
            for &t in &times {
                kms_max = kms_max.max(kms_residual(&sys, a, b, t));
            }
        }
    }

    let mut report = Report::new("kms");
    report
        .param("input", args.input.display().to_string())
        .param("dim", n)
        .param("beta", beta)
        .param("observables", observables.len())
        .param("samples", args.samples)
        .param("seed", args.seed)
        .param("gibbs_state", sys.is_gibbs())
        .tolerance("psd_rtol", tol)
        .tolerance("residual", RESIDUAL_TOL)
        .at_most("kms_condition", kms_max, RESIDUAL_TOL * kms_scale);

    let psi_times: Vec<f64> = (0..5).map(|k| k as f64 * beta / 4.0).collect();
    let psi = psi_kernel_certificate(&sys, &psi_times, tol)?;
    report.at_least("psi_kernel_psd", psi.min_eig, -tol * psi.norm.max(1.0));

    let mut curves = Vec::with_capacity(observables.len());
    let mut certs = Vec::with_capacity(observables.len());
    let mut all_rp = true;
    let mut worst_kernel = f64::INFINITY;
    for a in &observables {
        let phi = rp_from_kms(&sys, a)?;
        let plan = plan_for(&phi, 20, 256)?;
        let cert = certify(&phi, &plan, tol)?;
        all_rp &= cert.passed();
        worst_kernel = worst_kernel.min(cert.kernel_min_eig);
        certs.push(certificate_details(&cert));
        curves.push(phi);
    }
    report.holds("phi_reflection_positive", all_rp).detail("phi_certificates", certs);

    if sys.is_gibbs() {
        let t = tomita_from_gibbs(&sys, args.samples, args.seed)?;
        let d = eig_hermitian(t.pair.delta())?;
        let delta_identity = relative_difference(t.pair.delta(), &identity(n * n)) <= 1e-12;
        let x = CMatrix::from_fn(n, n, |i, j| Complex64::new(1.0 + i as f64, j as f64 - 0.5 * i as f64));
        let j_adjoint = (t.pair.j().apply(&kms::vec(&x)) - kms::vec(&x.adjoint())).norm();
        report
            .at_most("tomita_residuals", t.max_residual(), RESIDUAL_TOL)
            .at_most("boltzmann_ratios", t.boltzmann_residual, RESIDUAL_TOL)
            .at_most("commutant", t.commutant_residual, RESIDUAL_TOL)
            .holds("cyclic_and_separating", t.cyclic_rank == n * n && t.separating_rank == n * n)
            .holds("lemma_identities", t.lemma.passed(1e-9))
            .at_most("j_is_adjoint", j_adjoint, RESIDUAL_TOL)
            .detail("delta_spectrum", d.eigenvalues())
            .detail("delta_is_identity", delta_identity)
            .detail("flow_convention", t.flow_convention)
            .detail("populations", sys.populations())
            .detail("energies", sys.energies());
    } else {
        report.warn("state is not the Gibbs state at beta; Tomita checks skipped");
    }
    let mut outcome = Outcome::new(report.finish());
    if !outcome.report.passed {
        outcome
            .diagnostics
            .push(format!("KMS residual {kms_max:e}, worst φ kernel eigenvalue {worst_kernel:e}"));
    }

    if args.csv.is_some() {
        let grid: Vec<f64> = match curves[0].sample_grid() {
            Some(g) => {
                let step = (g.len() - 1) / CURVE_INTERVALS;
                g.iter().step_by(step.max(1)).copied().collect()
            }
            None => (0..=CURVE_INTERVALS)
                .map(|k| k as f64 * beta / CURVE_INTERVALS as f64)
                .collect(),
        };
        let mut header = vec!["t".to_string()];
        for k in 0..curves.len() {
            header.push(format!("phi{k}_re"));
            header.push(format!("phi{k}_im"));
        }
        let rows = grid
            .iter()
            .map(|&t| {
                let mut row = vec![num(t)];
                for phi in &curves {
                    let z = phi.eval(t)?[(0, 0)];
                    row.push(num(z.re));
                    row.push(num(z.im));
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        outcome.csv = Some(csv_string(|w| {
            w.write_record(&header)?;
            for r in &rows {
                w.write_record(r)?;
            }
            Ok(())
        }));
    }
    Ok(outcome)
}

pub fn fit(args: &FitArgs, tol: f64) -> CliResult<Outcome> {
    check_beta(args.beta)?;
    let samples = load_samples(&args.input)?;
    let lambdas = parse_lambda_grid(&args.lambda_grid)?;
    let result = fit_measure(&samples.times, &samples.values, &lambdas, args.beta, &FitOptions::default())?;
    let atoms = measure_to_json(&result.measure);

    let mut report = Report::new("fit");
    report
        .param("input", args.input.display().to_string())
        .param("beta", args.beta)
        .param("samples", samples.times.len())
        .param("dim", samples.dim())
        .param("lambda_grid", &lambdas)
        .tolerance("psd_rtol", tol)
        .tolerance("exact_fit_rtol", FIT_EXACT_RTOL)
        .holds("converged", result.converged)
        .detail("method", format!("{:?}", result.method))
        .detail("iterations", result.iterations)
        .detail("residual", result.residual)
        .detail("relative_residual", result.relative_residual)
        .detail("atoms", &atoms);
    if result.relative_residual > FIT_EXACT_RTOL {
        report.warn(format!(
            "relative residual {:.3e} exceeds {FIT_EXACT_RTOL:e}: samples are noisy or not on the rate grid",
            result.relative_residual
        ));
    }
    let report = report.finish();
    let mut outcome = Outcome::new(report);
    outcome.diagnostics = outcome.report.warnings.iter().map(|w| format!("warning: {w}")).collect();
    outcome.measure = Some(json!({
        "schema_version": SCHEMA_VERSION,
        "beta": args.beta,
        "function": {"kind": "measure", "dim": samples.dim(), "atoms": atoms},
    }));
    Ok(outcome)
}
