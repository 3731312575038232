use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sequence family: {0}")]
    InvalidFamily(String),

    #[error("level {level} is not valid for family {family}")]
    InvalidLevel { level: u64, family: String },

    #[error("sequence too short: no term with N*a_n < eps among {len} terms")]
    SequenceTooShort { len: usize },

    #[error("N too small for eps, c: D = {d} leaves no level below it")]
    EmptyLevelRange { d: f64 },

    #[error("alpha = {alpha} is within {tol:e} of p/q with q = {q}; Sturmian words need an irrational slope")]
    NearlyRational { alpha: f64, q: u64, tol: f64 },

    #[error("index {index} is outside the precision budget |k| <= {budget}")]
    PrecisionBudget { index: i64, budget: i64 },

    #[error("word range of length {len} is shorter than factor length {n}")]
    RangeTooShort { len: usize, n: usize },

    #[error(
        "word periodic or range too short: {found} distinct factors of length {n}, need {needed}"
    )]
    NotEnoughFactors {
        n: usize,
        found: usize,
        needed: usize,
    },

    #[error("system has no inverse map")]
    NoInverse,

    #[error("sample is empty")]
    EmptySample,

    #[error("{count} points exceed the materialization limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("need at least 3 points in the fit window, found {found}")]
    TooFewPoints { found: usize },

    #[error("count is zero at n = {n}, eps = {eps}; log undefined")]
    ZeroCount { n: u64, eps: f64 },

    #[error("grid invalid: {0}")]
    InvalidGrid(String),

    #[error("count overflow")]
    Overflow,
}
