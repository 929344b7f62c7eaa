//! JSON input schemas. Matrices are `{"re": [[..]], "im": [[..]]}`, row
//! major, with `im` optional.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use rpcircle::measures::AtomicOperatorMeasure;
use rpcircle::numcore::CMatrix;

use crate::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

fn shape(rows: &[Vec<f64>], what: &str) -> CliResult<(usize, usize)> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(CliError::Schema(format!("{what}: matrix must be non-empty")));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Schema(format!("{what}: ragged rows")));
    }
    Ok((r, c))
}

impl MatrixJson {
    pub fn to_matrix(&self, what: &str) -> CliResult<CMatrix> {
        let (r, c) = shape(&self.re, what)?;
        if let Some(im) = &self.im {
            if shape(im, what)? != (r, c) {
                return Err(CliError::Schema(format!("{what}: re and im shapes differ")));
            }
        }
        let m = CMatrix::from_fn(r, c, |i, j| {
            Complex64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CliError::Schema(format!("{what}: non-finite entry")));
        }
        Ok(m)
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        let im = m.iter().any(|z| z.im != 0.0).then(|| rows(|z| z.im));
        Self { re: rows(|z| z.re), im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub lambda: f64,
    pub weight: MatrixJson,
}

pub fn measure_to_json(mu: &AtomicOperatorMeasure) -> Vec<AtomJson> {
    mu.atoms()
        .iter()
        .map(|a| AtomJson {
            lambda: a.lambda,
            weight: MatrixJson::from_matrix(&a.weight),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `μ₊` given by atoms.
    Measure { dim: usize, atoms: Vec<AtomJson> },
    /// `φ(t) = e^{−tA} + e^{−(β−t)A}`.
    Generator { a: MatrixJson },
    /// Scalar `f_λ`.
    Flambda { lambda: f64 },
    /// Values on the uniform grid `kβ/M`, `k = 0..=M`.
    Samples { grid: Vec<f64>, values: Vec<MatrixJson> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionInput {
    pub schema_version: u32,
    pub beta: f64,
    pub function: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizeInput {
    pub schema_version: u32,
    pub h: MatrixJson,
}

/// `J = u ∘ conj`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairInput {
    pub schema_version: u32,
    pub delta: MatrixJson,
    pub j: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Gibbs state of the same Hamiltonian at another temperature.
    Gibbs { beta: f64 },
    Density { rho: MatrixJson },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KmsInput {
    pub schema_version: u32,
    pub h: MatrixJson,
    pub beta: f64,
    /// Self-adjoint observables; defaults to a Hermitian matrix basis.
    #[serde(default)]
    pub observables: Option<Vec<MatrixJson>>,
    /// State to test; defaults to the Gibbs state at `beta`.
    #[serde(default)]
    pub state: Option<StateSpec>,
}

pub trait Versioned {
    fn schema_version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
        })*
    };
}

versioned!(FunctionInput, RealizeInput, PairInput, KmsInput);

pub fn parse_str<T: DeserializeOwned + Versioned>(text: &str, path: &Path) -> CliResult<T> {
    let value: T = serde_json::from_str(text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if value.schema_version() != SCHEMA_VERSION {
        return Err(CliError::Schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            value.schema_version()
        )));
    }
    Ok(value)
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load<T: DeserializeOwned + Versioned>(path: &Path) -> CliResult<T> {
    parse_str(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64 - 1.0));
        let j = MatrixJson::from_matrix(&m);
        assert_eq!(j.to_matrix("m").unwrap(), m);
        let real = MatrixJson {
            re: vec![vec![1.0, 2.0]],
            im: None,
        };
        assert_eq!(MatrixJson::from_matrix(&real.to_matrix("r").unwrap()), real);
    }

    #[test]
    fn bad_matrices() {
        let ragged = MatrixJson {
            re: vec![vec![1.0], vec![1.0, 2.0]],
            im: None,
        };
        assert!(ragged.to_matrix("m").is_err());
        let empty = MatrixJson { re: vec![], im: None };
        assert!(empty.to_matrix("m").is_err());
        let mismatch = MatrixJson {
            re: vec![vec![1.0]],
            im: Some(vec![vec![1.0, 0.0]]),
        };
        assert!(mismatch.to_matrix("m").is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let p = Path::new("x.json");
        let ok = r#"{"schema_version":1,"beta":1,"function":{"kind":"flambda","lambda":1}}"#;
        assert!(parse_str::<FunctionInput>(ok, p).is_ok());
        let top = r#"{"schema_version":1,"beta":1,"extra":0,"function":{"kind":"flambda","lambda":1}}"#;
        assert!(parse_str::<FunctionInput>(top, p).is_err());
        let inner = r#"{"schema_version":1,"beta":1,"function":{"kind":"flambda","lambda":1,"mu":2}}"#;
        assert!(parse_str::<FunctionInput>(inner, p).is_err());
        let matrix = r#"{"schema_version":1,"h":{"re":[[0]],"imag":[[0]]}}"#;
        assert!(parse_str::<RealizeInput>(matrix, p).is_err());
        let version = r#"{"schema_version":2,"h":{"re":[[0]]}}"#;
        assert!(matches!(parse_str::<RealizeInput>(version, p), Err(CliError::Schema(_))));
    }
}
