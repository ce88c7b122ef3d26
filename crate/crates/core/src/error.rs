use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped by the stage that produces them; [`Error::class`]
/// maps each one onto the coarse categories used for CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("integration failed at k = {k}: {reason}")]
    Integration { k: f64, reason: String },
    #[error("phase branch error: {0}")]
    Branch(String),
    #[error("argument {value} outside sampled range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },
    #[error("principal-value accuracy error: {0}")]
    Accuracy(String),
    #[error("gamma function pole at z = {0}")]
    Pole(String),
    #[error("integrand tail has not decayed: {0}")]
    Tail(String),
    #[error("divergent integral: {0}")]
    Convergence(String),
    #[error("box discretization under-resolved: {0}")]
    Resolution(String),
    #[error("missed box level: {0}")]
    MissedLevel(String),
    #[error("L -> infinity extrapolation failed: {0}")]
    Extrapolation(String),
    #[error("partial-wave truncation error: {0}")]
    Truncation(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("S-operator not unitary: worst deviation {worst:.3e} at k = {worst_k} (tolerance {tol:.1e})")]
    Unitarity {
        worst: f64,
        worst_k: f64,
        tol: f64,
        per_k: Vec<(f64, f64)>,
    },
    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("validation mismatch: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, used for process exit codes and the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Validation,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config { .. } | Error::Format(_) | Error::Grid(_) | Error::Io(_) => {
                ErrorClass::Config
            }
            Error::Unitarity { .. } | Error::Validation(_) => ErrorClass::Validation,
            _ => ErrorClass::Numerical,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
