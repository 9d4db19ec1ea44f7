use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid UAV deployment: {0}")]
    InvalidDeployment(String),

    #[error("invalid array: {0}")]
    InvalidArray(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("unknown cell {0}")]
    UnknownCell(usize),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("missing beamformer for tx {tx}, rx {rx}, cell {cell}")]
    MissingBeamformer { tx: usize, rx: usize, cell: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by user-supplied configuration rather than the run itself.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Parse { .. }
                | Error::InvalidParameter(_)
                | Error::InvalidGrid(_)
                | Error::InvalidDeployment(_)
                | Error::InvalidArray(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
