use std::path::PathBuf;

/// Errors raised while loading, running or reporting scenarios.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] l1ilc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("trajectory violates the acceleration bounds on axis {axis} by {excess:.3e}")]
    InfeasibleTrajectory { axis: usize, excess: f64 },
    #[error("learning state was produced for model `{found}` but this scenario uses `{expected}`")]
    FingerprintMismatch { expected: String, found: String },
    #[error("repetition {rep}, iteration {iteration}: {source}")]
    Iteration {
        rep: usize,
        iteration: usize,
        #[source]
        source: l1ilc_core::Error,
    },
    #[error("results cannot be compared: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
