use thiserror::Error;

/// Errors raised by the lattice samplers, metric engine and statistics.
#[derive(Debug, Error)]
pub enum LqgError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A point or circle falls outside the sampled window.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// A kernel or formula evaluated where it diverges.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid with n={n} is too large for the dense sampler (limit {limit}); use the spectral sampler")]
    TooLarge { n: usize, limit: usize },

    #[error("covariance factorization failed; smallest eigenvalue {min_eigenvalue:.6e}")]
    Factorization { min_eigenvalue: f64 },

    #[error("conditioning budget exhausted after {attempts} attempts ({accepted} accepted)")]
    ConditioningExhausted { attempts: usize, accepted: usize },

    #[error("grid specs differ: {0}")]
    SpecMismatch(String),

    #[error("set too large for exhaustive search: {size} points (limit {limit})")]
    SetTooLarge { size: usize, limit: usize },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LqgError>;
