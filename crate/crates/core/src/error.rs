use thiserror::Error;

/// Location-tagged diagnostic from the metric-spec parser.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("unknown catalog metric `{0}`")]
    UnknownMetric(String),

    #[error("invalid parameters for `{name}`: {reason}")]
    InvalidParams { name: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("evaluation domain error: {0}")]
    Domain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point {0:?} lies outside the domain box")]
    OutsideDomain(Vec<f64>),

    #[error("empty domain box")]
    EmptyDomain,

    #[error("rejection cap exceeded: only {found} of {wanted} points passed the positive-definiteness check")]
    RejectionCap { found: usize, wanted: usize },

    #[error("metric matrix is singular or not positive definite")]
    SingularMetric,

    #[error("degenerate plane: Gram determinant {0:e}")]
    DegeneratePlane(f64),

    #[error("vectors are not orthonormal (residual {0:e})")]
    NotOrthonormal(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("geodesic distance solver did not converge (miss {0:e})")]
    NoConvergence(f64),

    #[error("plane is curvature-independent at this resolution (denominator {0:e})")]
    CurvatureIndependent(f64),

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("invalid shape-operator set: {0}")]
    ShapeOperators(String),

    #[error("ambiguous spectrum clustering: {0}")]
    AmbiguousSpectrum(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
