use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{function}: argument {x} outside the domain (requires x > 0 and finite)")]
    Domain { function: &'static str, x: f64 },

    #[error("invalid Dyson index {0}; expected 1 (real), 2 (complex) or 4 (quaternion)")]
    InvalidBeta(u32),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error(
        "Sigma^-1 eigenvalues {a} and {b} are not distinct (relative separation {separation:e} <= {threshold:e})"
    )]
    NotDistinct {
        a: f64,
        b: f64,
        separation: f64,
        threshold: f64,
    },

    #[error("quadrature did not converge: error estimate {achieved:e} exceeds target {target:e}")]
    Quadrature { achieved: f64, target: f64 },

    #[error("residue sums need beta*d/2 to be a positive integer (beta = {beta}, d = {d})")]
    ResidueNotInteger { beta: u32, d: usize },

    #[error("non-finite log increment at step {step}, index {index}")]
    NonFinite { step: usize, index: usize },

    #[error("eigenvalue solver failed: {0}")]
    Eigen(String),

    #[error("{steps} steps exceeds the configured cap of {cap} for stability exponents")]
    StepCap { steps: usize, cap: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),
}
