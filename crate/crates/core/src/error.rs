use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {bad_row} has {bad_len} entries")]
    NotSquare {
        rows: usize,
        bad_row: usize,
        bad_len: usize,
    },

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("|det| = {det} is not 1, the map is not invertible over the integers")]
    DeterminantNotUnit { det: BigInt },

    #[error(
        "eigenvalue modulus {modulus} lies within {tol} of the unit circle (moduli: {moduli:?})"
    )]
    NearUnitEigenvalue {
        modulus: f64,
        tol: f64,
        moduli: Vec<f64>,
    },

    #[error("det(A^{n} - I) = 0, the map is not hyperbolic")]
    NonHyperbolic { n: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("period {n} has {count} periodic points, over the enumeration budget of {budget}")]
    EnumerationBudget { n: u32, count: BigInt, budget: u64 },

    #[error("invalid rational {0:?}")]
    ParseRational(String),

    #[error("invalid torus point: {0}")]
    InvalidPoint(String),

    #[error("invalid bump: {0}")]
    InvalidBump(String),

    #[error("linear functional has no nonzero coefficient")]
    ZeroFunctional,

    #[error("holder exponent {0} outside (0, 1]")]
    HolderExponent(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("empty point set")]
    EmptyInput,

    #[error("construction needs {needed} periodic orbits, only {available} found with period <= {n_max}")]
    InsufficientOrbits {
        needed: usize,
        available: usize,
        n_max: u32,
    },

    #[error("construction at level {level}: orthant {orthant} holds {count} live orbits, need at least 2")]
    ThinOrthant {
        level: usize,
        orthant: String,
        count: usize,
    },

    #[error("certificate failed exact re-verification: {0}")]
    CertificateRejected(String),

    #[error("bump supports collide: {0}")]
    BumpCollision(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
