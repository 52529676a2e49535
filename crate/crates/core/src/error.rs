use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at t = {point}: {detail}")]
    NonFinite { point: String, detail: String },

    #[error("derivative order {order} is not supported (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error(
        "no admissible theta0 in [{lo}, {hi}]: best candidate {best} reaches only {value:e} (tolerance {tol:e})"
    )]
    ThetaSearch {
        lo: f64,
        hi: f64,
        best: f64,
        value: f64,
        tol: f64,
    },

    #[error("precision of {required} bits required, ceiling is {ceiling} bits")]
    PrecisionExceeded { required: u32, ceiling: u32 },

    #[error("precision mismatch: expected {expected} bits, found {found} bits")]
    PrecisionMismatch { expected: u32, found: u32 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// True for the failures a caller can fix by changing its inputs.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::UnsupportedOrder { .. }
        )
    }

    /// True for numeric breakdowns (overflow, precision, missing theta0).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::ThetaSearch { .. }
                | Error::PrecisionExceeded { .. }
                | Error::PrecisionMismatch { .. }
                | Error::Construction(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
