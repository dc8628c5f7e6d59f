use thiserror::Error;

/// Constraint violated by an ensemble specification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("degree distribution `{which}` is empty")]
    EmptyDistribution { which: &'static str },
    #[error("degree distribution `{which}` contains degree 0")]
    ZeroDegree { which: &'static str },
    #[error("degree distribution `{which}` has a non-positive fraction for degree {degree}")]
    NonPositiveFraction { which: &'static str, degree: u32 },
    #[error("degree distribution `{which}` sums to {sum}, expected 1")]
    FractionSum { which: &'static str, sum: String },
    #[error("{count} x fraction of degree {degree} in `{which}` is not an integer ({value})")]
    NonIntegerNodeCount {
        which: &'static str,
        degree: u32,
        count: u64,
        value: String,
    },
    #[error("edge counts disagree: left side has {left} sockets, right side has {right}")]
    EdgeCountMismatch { left: u64, right: u64 },
    #[error("number of tests m={m} must be smaller than number of items n={n}")]
    TooManyTests { n: u64, m: u64 },
    #[error("r={r} does not divide n*l={edges}")]
    Divisibility { edges: u64, r: u32 },
    #[error("n and m must be positive")]
    EmptyEnsemble,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ensemble: {0}")]
    Validation(#[from] ValidationError),
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("exponent {exponent} exceeds the packed limit {limit}")]
    ExponentOverflow { exponent: u64, limit: u32 },
    #[error("polynomial arity {0} exceeds the supported maximum of 8")]
    ArityTooLarge(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("parts sum to {sum}, expected {total}")]
    PartsSum { total: u64, sum: u64 },
    #[error("{what} requires {required} enumerations, over the limit of {limit}")]
    SizeLimit {
        what: &'static str,
        required: String,
        limit: u64,
    },
    #[error("enumerator table is missing entry ({a}, {j})")]
    IncompleteTable { a: usize, j: usize },
    #[error("table holds {found} enumerators, expected {expected}")]
    WrongAlgorithm {
        expected: &'static str,
        found: &'static str,
    },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("malformed spec file: {0}")]
    SpecFormat(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
