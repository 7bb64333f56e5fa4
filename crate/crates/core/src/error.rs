use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular system: shifted matrix is not invertible along the right-hand side")]
    Singular,

    /// The gradient has a component in the null space of the curvature
    /// matrix, so `‖g‖²_{C⁻¹}` is undefined.
    #[error("curvature matrix is singular along the gradient (relative null-space component {0:.3e})")]
    SingularAlongGradient(f64),

    #[error("symmetric eigensolver did not converge")]
    EigenNonConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("curvature model carries no smoothness excess L_C")]
    NoExcess,

    #[error("optimal value f* is required but unknown")]
    MissingFStar,

    /// Δ ≤ 0: the iterate already lies in its localization set.
    #[error("degenerate projection: gap {0:.3e} is not positive")]
    Degenerate(f64),

    #[error("square-root argument {0:.3e} is negative: the curvature map is not valid for this objective")]
    ArgumentNegative(f64),

    #[error("zero gradient at a non-optimal point (gap {0:.3e}); f* is probably wrong")]
    ZeroGradient(f64),

    #[error("iterate history was not recorded")]
    MissingHistory,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
