use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (relative asymmetry {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("antiunitary map is not an involution (residual {residual:e})")]
    NotInvolutive { residual: f64 },

    #[error("scalar function undefined on eigenvalue {eigenvalue:e}: {reason}")]
    DomainError { eigenvalue: f64, reason: &'static str },

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("circle length must be positive and finite, got {0}")]
    InvalidBeta(f64),

    #[error("measure on [0, inf) has an atom at negative location {0}")]
    NegativeAtom(f64),

    #[error("rate must be nonnegative, got {0}")]
    NegativeRate(f64),

    #[error("sample {index} is not Hermitian")]
    NonHermitianSample { index: usize },

    #[error("argument {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("t = {0} is not a sample point")]
    NotOnGrid(f64),

    #[error("operation requires a {expected}-backed function")]
    WrongBacking { expected: &'static str },

    #[error("grid point {0} outside the open interval (0, beta) or grid not increasing")]
    GridOutOfRange(f64),

    #[error("twisted Gram matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotThetaPositive { min_eig: f64 },

    #[error("operator does not map the null space into itself (residual {residual:e})")]
    NullSpaceNotPreserved { residual: f64 },

    #[error("operator does not leave the positive subspace invariant (residual {residual:e})")]
    NotInvariant { residual: f64 },

    #[error("matrices do not form a unitary representation (residual {residual:e})")]
    NotRepresentation { residual: f64 },

    #[error("spectrum is not symmetric under negation:\n{table}")]
    AsymmetricSpectrum { table: String },

    #[error("generator has a zero mode of multiplicity {multiplicity}")]
    ZeroMode { multiplicity: usize },

    #[error("no anti-unitary involution J with JHJ = -H exists:\n{table}")]
    NoSuchJ { table: String },

    #[error("no unitary involution R with RHR = -H exists:\n{table}")]
    NoSuchR { table: String },

    #[error("modular relation J Delta J = Delta^-1 violated (residual {residual:e})")]
    ModularRelation { residual: f64 },

    #[error("modular operator is not strictly positive (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("fixed space has real dimension {found}, expected {expected}")]
    DegenerateFixSpace { expected: usize, found: usize },

    #[error("real subspace is not standard (realified rank {rank} < {expected})")]
    NotStandard { rank: usize, expected: usize },

    #[error("embedding leaves the fixed space of the reflection (residual {residual:e})")]
    NotFixed { residual: f64 },

    #[error("observable is not self-adjoint (residual {residual:e})")]
    NotSelfAdjoint { residual: f64 },

    #[error("state is not faithful (min eigenvalue {min_eig:e}); vacuum is not separating")]
    NotSeparating { min_eig: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
