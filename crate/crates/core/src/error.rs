use std::path::PathBuf;

use thiserror::Error;

/// A violated [`SystemConfig`](crate::config::SystemConfig) invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("redundant carrier count {n_red} must equal unique word length {n_uw}")]
    RedundantUwMismatch { n_red: usize, n_uw: usize },
    #[error("carrier counts do not add up: n_data {n_data} + n_red {n_red} + zero carriers {n_zero} != n_total {n_total}")]
    CountMismatch {
        n_data: usize,
        n_red: usize,
        n_zero: usize,
        n_total: usize,
    },
    #[error("{set} carrier index {index} out of range [0, {n_total})")]
    IndexOutOfRange {
        set: &'static str,
        index: usize,
        n_total: usize,
    },
    #[error("{set} carrier indices must be strictly ascending (offending index {index})")]
    UnsortedOrDuplicate { set: &'static str, index: usize },
    #[error("carrier {index} is both a zero and a redundant carrier")]
    Overlap { index: usize },
    #[error("redundant carrier list has {got} entries, expected n_red = {expected}")]
    RedundantSetSize { got: usize, expected: usize },
    #[error(
        "n_total must be positive and n_uw must be in 1..n_total (n_total {n_total}, n_uw {n_uw})"
    )]
    Dimensions { n_total: usize, n_uw: usize },
    #[error("{field} = {value} is outside its allowed range")]
    Parameter { field: &'static str, value: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "matrix is singular to working precision (pivot {pivot:e} below threshold {threshold:e})"
    )]
    Singular { pivot: f64, threshold: f64 },

    #[error("zero word check failed: tail magnitude {max_residual:e} exceeds 1e-10")]
    ZeroWord { max_residual: f64 },

    #[error(
        "channel response at carrier {carrier} has magnitude {magnitude:e}, too small to equalize"
    )]
    DeepFade { carrier: usize, magnitude: f64 },

    #[error("noise variance must be positive for the Wiener smoother (got {0}); use a small positive noise floor such as 1e-12")]
    NonPositiveNoise(f64),

    #[error("energy inequality violated: x_u^H x_u = {lhs:e} > {rhs:e} for unique word {uw:?}")]
    InequalityViolation {
        lhs: f64,
        rhs: f64,
        uw: Vec<num_complex::Complex64>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::InvalidArgument(_) => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
