use thiserror::Error;

/// Error type shared across the library.
///
/// `DataError` covers malformed inputs and calendar/coverage gaps (CLI exit
/// code 1); `NumericalError` covers failures of the numerical machinery
/// (CLI exit code 2).
#[derive(Debug, Error)]
pub enum Error {
    #[error("calendar gap: {0}")]
    CalendarGap(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("no common dates between {0} and {1}")]
    NoCommonDates(String, String),

    #[error("parameter domain error: {0}")]
    ParamDomain(String),

    #[error("numerical overflow in {0}")]
    Overflow(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("model selection failed for series {0}: all candidate fits failed")]
    SelectionFailed(String),

    #[error("statistic undefined: {0}")]
    StatisticUndefined(String),

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("rank deficiency: collinear columns {0:?}")]
    RankDeficient(Vec<String>),

    #[error("missing covariates: {0:?}")]
    MissingCovariates(Vec<String>),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            detail: detail.into(),
        }
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Overflow(_)
            | Error::FitFailed(_)
            | Error::SelectionFailed(_)
            | Error::StatisticUndefined(_)
            | Error::RankDeficient(_) => 2,
            _ => 1,
        }
    }
}
