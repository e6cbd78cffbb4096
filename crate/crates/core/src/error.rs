use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid constraint #{index}: {reason}")]
    InvalidConstraint { index: usize, reason: String },

    #[error("region is empty or its projection did not converge: {0}")]
    EmptyRegion(String),

    #[error("projection did not converge after {sweeps} sweeps (last displacement {displacement:e}, violation {violation:e})")]
    ProjectionFailed {
        sweeps: usize,
        displacement: f64,
        violation: f64,
    },

    #[error("point is not feasible (constraint violation {violation:e})")]
    Infeasible { violation: f64 },

    #[error("invalid vertex #{index}: {reason}")]
    InvalidVertex { index: usize, reason: String },

    #[error("invalid weight #{index}: {reason}")]
    InvalidWeight { index: usize, reason: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("vertex index {index} out of range for {count} vertices")]
    VertexOutOfRange { index: usize, count: usize },

    #[error("no feasible grid node inside the search bounds")]
    NoFeasibleGridNode,

    #[error("instance generation failed after {0} attempts")]
    GenerationFailed(usize),

    #[error("region cannot be serialized: {0}")]
    NotSerializable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
