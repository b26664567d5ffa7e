use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("letter count mismatch: expected {expected}, found {found}")]
    LetterCountMismatch { expected: usize, found: usize },

    #[error("component count mismatch: {left} vs {right}")]
    ComponentCountMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("similarity matrix is singular or ill-conditioned")]
    SingularSimilarity,

    #[error("center must be scalar (block size 1), got block size {0}")]
    NonScalarCenter(usize),

    #[error("point is not nilpotent about the center with rank <= {kappa_max}")]
    NotNilpotent { kappa_max: usize },

    #[error("lifted tensor size {size} exceeds the cap of {cap}")]
    LiftCapExceeded { size: usize, cap: usize },

    #[error("differential maps {inputs} components to {outputs}; it must be square")]
    NotSquare { inputs: usize, outputs: usize },

    #[error("differential is singular")]
    SingularDifferential,

    #[error("map does not vanish at the center")]
    CenterResidualNonzero,

    #[error("iteration budget of {budget} steps exceeded without an exact zero")]
    IterationBudgetExceeded { budget: usize },

    #[error("chord operator is not nilpotent within {bound} powers")]
    NotNilpotentOperator { bound: usize },

    #[error("no contraction radius found above {floor:e}")]
    NoContractionFound { floor: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },

    #[error("iterate left the certified ball: distance {distance:e} > beta {beta:e}")]
    DomainEscape { distance: f64, beta: f64 },

    #[error("solution blew up at t = {t} (norm {norm:e})")]
    BlowupDetected { t: f64, norm: f64 },

    #[error("KKT Jacobian is singular")]
    SingularKktJacobian,

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
