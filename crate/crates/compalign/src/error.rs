use thiserror::Error;

/// Errors produced by store parsing, cost queries, and alignment construction.
#[derive(Debug, Error)]
pub enum Error {
    /// A store or sequence file line that does not conform to the format.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Two patterns in one store share a pattern id.
    #[error("duplicate pattern id `{0}`")]
    DuplicateId(String),

    /// A token that violates the symbol invariants.
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    /// A pattern that violates the pattern invariants.
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    /// Bit costs are undefined when the symbol table is empty.
    #[error("symbol cost is undefined on an empty symbol table")]
    UndefinedCost,

    /// Exhaustive matching refuses inputs beyond its size bound.
    #[error("exhaustive matching refused: {driving} x {target} cells exceeds {limit}")]
    OracleBound {
        driving: usize,
        target: usize,
        limit: usize,
    },

    /// A merge whose hits would cross the existing column order, land on
    /// unequal tokens, or unify a pattern position with itself.
    #[error("merge rejected: {0}")]
    MergeRejected(String),

    /// A precondition violation on an operation argument.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
