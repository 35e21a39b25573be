use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid format: {0}")]
    Format(String),

    #[error("invalid dyadic literal `{0}`")]
    Literal(String),

    #[error("{value} is not representable in F({fmt})")]
    NotRepresentable { value: String, fmt: String },

    #[error("modulus {0} is neither zero nor a power of two")]
    NotPowerOfTwo(String),

    #[error("{0} is undefined for zero")]
    ZeroArgument(&'static str),

    #[error("unknown rounding mode `{0}` (expected one of rd, ru, rz, rne, rna, ro)")]
    UnknownMode(String),

    #[error("unknown condition `{0}`")]
    UnknownCondition(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("condition {0} needs the computed sum x as extra input")]
    MissingExtra(&'static str),

    #[error("sweep needs {pairs} operand pairs, over the budget of {budget}; use a smaller format or raise the budget")]
    BudgetExceeded { pairs: u128, budget: u128 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
