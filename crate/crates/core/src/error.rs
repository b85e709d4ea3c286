use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library. The CLI maps all of these to exit status 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid alphabet: scheduling dimension must be at least 1")]
    InvalidAlphabet,

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: String,
        expected: String,
        actual: String,
    },

    #[error("non-finite entry in {0}")]
    NonFiniteEntry(String),

    #[error("word {word} is too short: length {len}, need at least 2")]
    WordTooShort { word: String, len: usize },

    #[error("horizon exceeded: need words of length {needed}, table horizon is {horizon}")]
    HorizonExceeded { needed: usize, horizon: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("systems are not isomorphic: relation residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotIsomorphic { residual: f64, tol: f64 },

    #[error("missing variable {0} in assignment")]
    MissingVariable(String),

    #[error("trajectory too short: final time t = {t} must exceed equation order n = {n}")]
    TrajectoryTooShort { t: usize, n: usize },

    #[error("equation checking requires scalar output, system has p = {0}")]
    OutputDimNotScalar(usize),

    #[error("leading output coefficient Q_0 is the zero polynomial")]
    ZeroLeadingCoefficient,

    #[error("cannot parse {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle failed while probing word {word}: {source}")]
    Oracle {
        word: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Variant name, used as a stable tag in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::InvalidAlphabet => "InvalidAlphabet",
            Error::Overflow(_) => "Overflow",
            Error::InvalidWord(_) => "InvalidWord",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFiniteEntry(_) => "NonFiniteEntry",
            Error::WordTooShort { .. } => "WordTooShort",
            Error::HorizonExceeded { .. } => "HorizonExceeded",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NotIsomorphic { .. } => "NotIsomorphic",
            Error::MissingVariable(_) => "MissingVariable",
            Error::TrajectoryTooShort { .. } => "TrajectoryTooShort",
            Error::OutputDimNotScalar(_) => "OutputDimNotScalar",
            Error::ZeroLeadingCoefficient => "ZeroLeadingCoefficient",
            Error::Parse { .. } => "Parse",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Oracle { .. } => "Oracle",
        }
    }

    pub(crate) fn dims(what: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
