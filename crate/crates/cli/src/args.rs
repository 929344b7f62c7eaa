use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use rpcircle::numcore::DEFAULT_PSD_TOL;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "rpcircle",
    version,
    about = "Certify reflection positivity, euclidean realizations, modular data and KMS conditions",
    after_help = "Exit codes: 0 all checks passed, 1 a certificate failed, 2 input or schema error.\n\
                  The default PSD tolerance can be overridden with the RPCIRCLE_TOL environment variable."
)]
pub struct Cli {
    /// Relative PSD tolerance for positivity certificates.
    #[arg(long, global = true, env = "RPCIRCLE_TOL", default_value_t = DEFAULT_PSD_TOL)]
    pub tol: f64,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Certify that a circle function is reflection positive.
    CheckFunction(CheckFunctionArgs),
    /// Build a euclidean realization of e^{itH} and reconstruct it.
    Realize(RealizeArgs),
    /// Round-trip modular data through its standard subspace.
    StandardRoundtrip(StandardArgs),
    /// Verify KMS, reflection positivity and modular data of a Gibbs state.
    Kms(KmsArgs),
    /// Fit a measure on [0, inf) to sampled function values.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CheckFunctionArgs {
    /// Function description (JSON).
    pub input: PathBuf,
    /// Number of interior points for the OS kernel.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Order of the cyclic subgroup for the Fourier test.
    #[arg(long, default_value_t = 256)]
    pub fourier: usize,
    /// Write (t, φ entries) and c_n rows here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RealizeArgs {
    /// Hermitian generator H (JSON).
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct StandardArgs {
    /// Modular pair (Δ, J) (JSON).
    pub input: PathBuf,
    /// Random samples for the graph-norm identity.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct KmsArgs {
    /// Finite quantum system (JSON).
    pub input: PathBuf,
    /// Random operator pairs for the commutant check.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the φ^{A,A} curves here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Samples: header `t,value` (scalar) or `t,re_i_j,im_i_j,...`.
    pub input: PathBuf,
    /// Candidate rates, `start:stop:step` or a comma-separated list.
    #[arg(long)]
    pub lambda_grid: String,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Write the fitted measure as a check-function input here.
    #[arg(long)]
    pub measure_out: Option<PathBuf>,
}
