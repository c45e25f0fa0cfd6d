use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input parameter failed validation.
    #[error("invalid `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    /// A special function was handed a non-finite argument.
    #[error("{function}: argument {arg} is outside the supported domain")]
    Domain { function: &'static str, arg: Complex64 },

    /// Adaptive quadrature exhausted its node budget.
    #[error(
        "quadrature did not converge within {nodes} nodes (last {last}, previous {previous}, \
         relative change {relative_change:.3e})"
    )]
    Quadrature {
        nodes: usize,
        last: Complex64,
        previous: Complex64,
        relative_change: f64,
    },

    #[error("spectral amplitude vanishes on the whole grid; cannot normalize")]
    Normalization,

    /// A caller violated a documented precondition.
    #[error("precondition violated: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("fit failed after {iterations} iterations: {reason}")]
    Fit {
        iterations: usize,
        reason: String,
        trace: Vec<[f64; 2]>,
    },

    /// Context attached by range studies and sweeps.
    #[error("at {label} = {value}: {source}")]
    At {
        label: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn at(self, label: &'static str, value: f64) -> Self {
        Error::At {
            label,
            value,
            source: Box::new(self),
        }
    }

    /// Innermost error, with any `At` context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Validation { .. } | Error::Contract(_) | Error::Format(_) | Error::Json(_) | Error::Csv(_)
        )
    }
}
