//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("set distance is undefined for an empty set")]
    EmptySet,

    #[error("index {index} out of range for space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid metric table: {0}")]
    InvalidMetric(String),

    #[error("free cells {a} and {b} are not connected")]
    DisconnectedGrid { a: String, b: String },

    #[error("invalid grid configuration: {0}")]
    InvalidGrid(String),

    #[error("observation {y0} at t=0 is inconsistent with the model")]
    InfeasibleObservation { y0: usize },

    #[error("{what} exceeded the capacity budget: reached {reached}, budget {budget}. {hint}")]
    Capacity {
        what: String,
        reached: usize,
        budget: usize,
        hint: String,
    },

    #[error("model schema error in `{field}`: {detail}")]
    Schema { field: String, detail: String },

    #[error("model failed validation with {count} violation(s); first: {first}")]
    InvalidModel { count: usize, first: String },

    #[error("model has no step costs; the additive reduction requires them")]
    MissingStepCosts,

    #[error("value not representable in the requested scalar type: {0}")]
    ScalarConversion(f64),

    #[error("policy file does not match the model ({0})")]
    PolicyMismatch(String),

    #[error("policy has no action for a reachable state at t={t}: {encoding}")]
    PolicyIncomplete { t: usize, encoding: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
