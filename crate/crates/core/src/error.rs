use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{matrix}: row {row} sums to {sum} (must be 1 within 1e-9)")]
    NotStochastic {
        matrix: &'static str,
        row: usize,
        sum: f64,
    },

    #[error("{matrix}: entry ({row}, {col}) = {value} is not a probability")]
    InvalidEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("positivity violated at (x={x}, y={y}): W = {w}, V = {v}")]
    Positivity { x: usize, y: usize, w: f64, v: f64 },

    #[error("infeasible budget: cheapest input costs {min_cost} > budget {budget}")]
    InfeasibleBudget { min_cost: f64, budget: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("symbol {symbol} at position {position} is outside alphabet of size {alphabet}")]
    SymbolOutOfRange {
        symbol: usize,
        position: usize,
        alphabet: usize,
    },

    #[error("empty sequence")]
    EmptySequence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target exponent {requested} exceeds the best exponent {best} by {gap}")]
    ExponentAboveBest {
        requested: f64,
        best: f64,
        gap: f64,
    },

    #[error("exact error computation needs a binary output alphabet, got {0} letters")]
    NonBinaryOutput(usize),

    #[error("distribution is not a type with denominator {n}")]
    NotAType { n: usize },

    #[error("rate {rate} exceeds mutual information {mutual_information}")]
    RateAboveMutualInformation { rate: f64, mutual_information: f64 },

    #[error("codebook of {size} codewords exceeds the limit of {limit}")]
    CodebookOverflow { size: f64, limit: u64 },

    #[error("no convergence: Frank-Wolfe gap {gap:e} after {iterations} iterations")]
    NonConvergence { gap: f64, iterations: usize },

    #[error("likelihood-ratio support too large ({atoms} atoms)")]
    SupportTooLarge { atoms: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
