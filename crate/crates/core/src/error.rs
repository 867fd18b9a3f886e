use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability distribution: {0}")]
    InvalidPmf(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("value outside the domain of the formula: {0}")]
    Domain(String),

    #[error("degenerate correlation: |rho| = 1 leaves the forward sub-case threshold undefined")]
    DegenerateCorrelation,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search budget must be non-zero: {0}")]
    ZeroBudget(String),

    #[error(
        "codebooks too large: m1 = 2^{m1_log2:.2}, m2 = 2^{m2_log2:.2}, m3 = 2^{m3_log2:.2} \
         needs 2^{total_log2:.2} symbols, cap is 2^{cap_log2:.2}"
    )]
    CodebookTooLarge {
        m1_log2: f64,
        m2_log2: f64,
        m3_log2: f64,
        total_log2: f64,
        cap_log2: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
