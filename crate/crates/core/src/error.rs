use thiserror::Error;

/// Errors raised by the library. Mathematical counterexamples are not errors;
/// they are reported through [`crate::verdict::Verdict`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GhostError {
    #[error("invalid local datum: {0}")]
    InvalidContext(String),

    #[error("{0} is not a prime >= 5")]
    BadPrime(i64),

    #[error("valuation of zero requested; use Rat::Infinity explicitly")]
    ZeroValuation,

    #[error("weight {0} is below 2")]
    WeightBelowTwo(i64),

    #[error("weight {k} is not of the form {k_eps} + {step}*j with j >= 0")]
    NotOnDisk { k: i64, k_eps: i64, step: i64 },

    #[error("index {index} outside {lo}..={hi}")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("binomial lower index {r} exceeds {m}")]
    BinomialRange { m: u64, r: u64 },

    #[error("duplicate abscissa {0} in point set")]
    DuplicateAbscissa(u64),

    #[error("point set must contain the origin (0, 0)")]
    MissingOrigin,

    #[error("could not certify {count} slopes within {cap} coefficients")]
    StabilityFailure { count: usize, cap: usize },

    #[error("invalid radius: {0}")]
    InvalidRadius(String),

    #[error("could not parse rational from {0:?}")]
    ParseRational(String),

    #[error("inconsistent multiplicities: {0}")]
    Multiplicity(String),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GhostError>;
