use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({0}, {1}) is shared by {2} faces, expected 2")]
    NonManifoldEdge(usize, usize, usize),
    #[error("face {0} is degenerate (min angle below 1e-4 rad or zero area)")]
    DegenerateFace(usize),
    #[error("face {0} references vertex {1}, mesh has {2} vertices")]
    FaceIndex(usize, usize, usize),
    #[error("space is disconnected: {} components, sizes {:?}", .0.len(), .0.iter().map(|c| c.len()).collect::<Vec<_>>())]
    Disconnected(Vec<Vec<usize>>),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigensolver did not converge after {iterations} iterations, worst residual {worst:e}")]
    NoConvergence { iterations: usize, worst: f64, residuals: Vec<f64> },
    #[error("matrix is not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
