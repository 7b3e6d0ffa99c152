use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("cannot parse `{0}` as a rational (expected `a` or `a/b`)")]
    ParseRational(String),
    #[error("probability must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(String),
    #[error("q must lie in [0, 1), got {0}")]
    QOutOfRange(String),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("derivative order must be 0, 1 or 2, got {0}")]
    BadDerivativeOrder(u8),
    #[error("division by zero")]
    DivisionByZero,
    #[error("interval straddles zero, reciprocal undefined")]
    IntervalStraddlesZero,
    #[error("negative radicand {0} outside error bounds")]
    NegativeRadicand(String),
    #[error("n must be at least {min}, got {n}")]
    NTooSmall { n: usize, min: usize },
    #[error("series constant term is zero, reciprocal undefined")]
    ZeroConstantTerm,
    #[error("composition target {n} exceeds enumeration limit {limit}")]
    CompositionLimit { n: usize, limit: usize },
    #[error("exhaustive enumeration supports n <= {max}, got {n}")]
    BruteForceTooLarge { n: usize, max: usize },
    #[error("sample count must be at least 1")]
    EmptySampleCount,
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("sampling requires the probability denominator to fit in 128 bits")]
    DenominatorTooLarge,
    #[error("p={0} is degenerate for this operation")]
    DegenerateProbability(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
