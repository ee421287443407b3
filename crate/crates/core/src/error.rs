use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid design parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate: all-zero coefficients")]
    DegenerateQuartic,

    #[error("continuum of solutions at ({x}, {y}, {z})")]
    ContinuumOfSolutions { x: f64, y: f64, z: f64 },

    #[error("non-finite coefficient in polynomial")]
    NonFinite,

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("aspect count unstable up to resolution {max_resolution}")]
    AspectCountUnstable { max_resolution: usize },

    #[error("untraceable curve: {0}")]
    UntraceableCurve(String),

    #[error("tracing inconsistency: {0}")]
    TracingInconsistency(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io { path: path.into(), source }
    }

    /// Innermost error, stripping stage attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
