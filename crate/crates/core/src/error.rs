use thiserror::Error;

/// Errors raised by mesh construction, discretization and the adaptive driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported spatial dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),

    #[error("unknown prism id {0}")]
    InvalidPrismId(usize),

    #[error("unknown triangle index {0}")]
    InvalidTriangle(usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("hanging-node constraint chain at {0}: master value is itself constrained")]
    ConstraintChain(String),

    #[error("basis index {index} out of range (local dimension {dim})")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(usize),

    #[error("unsupported element degrees (l = {l}, k = {k})")]
    UnsupportedElement { l: usize, k: usize },

    #[error("singular degree-of-freedom matrix on element with base {0}")]
    SingularDofMatrix(String),

    #[error("non-finite data value on element {element}")]
    NonFiniteData { element: usize },

    #[error("conjugate gradients stagnated after {iterations} iterations (relative residual {residual:.3e})")]
    Stagnation {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("unknown problem id {0:?}")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("adaptive step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
