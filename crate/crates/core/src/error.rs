use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty selection: no valid slot to reduce over")]
    EmptySelection,

    #[error("label {label} out of range for {segments} segments")]
    LabelOutOfRange { label: usize, segments: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("cannot split fronts: {valid} valid individuals for a population of {n}")]
    InfeasibleSplit { valid: usize, n: usize },

    #[error("niche selection stalled with {missing} slots unfilled")]
    InfeasibleSelection { missing: usize },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("decision vector outside the problem domain: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
