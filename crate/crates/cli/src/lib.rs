//! Command-line front end for `rpcircle`.
//!
//! Each subcommand reads a JSON (or CSV) input, runs one verification
//! pipeline of the core library and produces a [`Report`]. Exit codes:
//! `0` all checks passed, `1` a certificate failed, `2` bad input.

use std::path::PathBuf;

use thiserror::Error;

pub mod args;
pub mod commands;
pub mod input;
pub mod report;
pub mod samples;

pub use args::{Cli, Command};
pub use report::Report;

/// Version string embedded in every report.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable overriding the default PSD tolerance.
pub const TOL_ENV: &str = "RPCIRCLE_TOL";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Core(#[from] rpcircle::Error),
}

impl CliError {
    /// Every error is an input problem; certificate failures are reports.
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A finished job: the report plus optional CSV text.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
    /// Extra JSON document (fitted measure) for `fit --measure-out`.
    pub measure: Option<serde_json::Value>,
    /// Text for stderr (pairing tables, warnings).
    pub diagnostics: Vec<String>,
}

impl Outcome {
    pub fn new(report: Report) -> Self {
        Self {
            report,
            csv: None,
            measure: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Runs the parsed command line without touching stdout or the filesystem
/// beyond reading inputs.
pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let tol = cli.tol;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Schema(format!("tolerance must be positive, got {tol}")));
    }
    match &cli.command {
        Command::CheckFunction(a) => commands::check_function(a, tol),
        Command::Realize(a) => commands::realize(a, tol),
        Command::StandardRoundtrip(a) => commands::standard_roundtrip(a, tol),
        Command::Kms(a) => commands::kms(a, tol),
        Command::Fit(a) => commands::fit(a, tol),
    }
}
