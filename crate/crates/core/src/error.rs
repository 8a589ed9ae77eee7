use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {index:?} is on or outside the cage boundary")]
    PointOutsideCage { index: Option<usize> },

    #[error("degenerate cage: vertices {0} and {1} coincide")]
    DegenerateCage(usize, usize),

    #[error("parameter {index} = {value} outside [{lower}, {upper}]")]
    ParamsOutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical blowup at step {step}")]
    NumericalBlowup { step: usize },

    #[error("trajectory is missing channel `{0}`")]
    MissingChannel(String),

    #[error("horizon mismatch: {0} vs {1} steps")]
    HorizonMismatch(usize, usize),

    #[error("no unvisited dimension left to select")]
    EmptyCandidate,

    #[error("invalid config at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("rollout of variation {variation} failed: {source}")]
    Rollout {
        variation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::PointOutsideCage { .. } => "PointOutsideCage",
            Error::DegenerateCage(..) => "DegenerateCage",
            Error::ParamsOutOfBounds { .. } => "ParamsOutOfBounds",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NumericalBlowup { .. } => "NumericalBlowup",
            Error::MissingChannel(_) => "MissingChannel",
            Error::HorizonMismatch(..) => "HorizonMismatch",
            Error::EmptyCandidate => "EmptyCandidate",
            Error::Config { .. } => "ConfigError",
            Error::Rollout { source, .. } => source.kind(),
            Error::Io { .. } => "IoError",
        }
    }

    /// True if the root cause is a simulator blowup.
    pub fn is_blowup(&self) -> bool {
        match self {
            Error::NumericalBlowup { .. } => true,
            Error::Rollout { source, .. } => source.is_blowup(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
