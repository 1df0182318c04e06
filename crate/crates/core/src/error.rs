use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("singular point at t = {t}")]
    SingularPoint { t: f64 },
    #[error("series anchor t1 = {t1} is too close to sqrt(alpha)")]
    AnchorAtAlpha { t1: f64 },
    #[error("t = {t} outside series trust radius {radius} around {t1}")]
    OutOfTrustRadius { t: f64, t1: f64, radius: f64 },
    #[error("irregular contact: u' = {up} matches neither admissible slope (0 or {admissible})")]
    IrregularContact { up: f64, admissible: f64 },
    #[error("step size underflow at x = {x} (t = {t})")]
    StepUnderflow { x: f64, t: f64 },
    #[error("step budget of {0} exhausted")]
    StepBudget(usize),
    #[error("no bracket found: {log}")]
    BracketNotFound { log: String },
    #[error("shot from t1 = {t1} could not be classified: {reason}")]
    ClassificationAmbiguous { t1: f64, reason: String },
    #[error("profile validation failed: {0}")]
    Validation(String),
    #[error("operation needs a free-boundary profile")]
    NotFreeBoundary,
    #[error("empty region: {0}")]
    EmptyRegion(&'static str),
    #[error("nothing to plot")]
    EmptyPlot,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
