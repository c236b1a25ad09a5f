use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("function `{name}` takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("variable index {index} exceeds dimension {dim}")]
    VariableIndex { index: usize, dim: usize },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("singular Jacobian at {point:?}")]
    SingularJacobian { point: Vec<f64> },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("unsupported dimension: {0}")]
    Dimension(String),

    #[error("invalid metric: {0}")]
    Metric(String),

    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("{path}:{line}:{column}: {message}")]
    File {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid polytope: {0}")]
    Polytope(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
