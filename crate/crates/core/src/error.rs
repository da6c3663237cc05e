use thiserror::Error;

/// Errors produced while building scenarios, integrating, simulating or
/// reading and writing sweep artifacts.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },

    #[error(
        "quadrature on [{lower}, {upper}] did not reach tolerance {tolerance:e} \
         (estimated error {estimate:e} after {intervals} intervals)"
    )]
    QuadratureDiverged {
        lower: f64,
        upper: f64,
        tolerance: f64,
        estimate: f64,
        intervals: usize,
    },

    #[error("only {observed} deliveries observed, at least {required} needed")]
    InsufficientDeliveries { observed: u64, required: u64 },

    #[error("invalid sweep grid: {0}")]
    Grid(String),

    #[error("malformed csv: {0}")]
    MalformedCsv(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
