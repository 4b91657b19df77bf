use thiserror::Error;

/// Errors raised while building grids, masks, toughness fields and drives.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("grid spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("invalid extent: {0}")]
    InvalidExtent(String),
    #[error("no node is tagged as part of the Dirichlet boundary")]
    EmptyGamma,
    #[error("active region is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("negative toughness {value} at node {node}")]
    NegativeToughness { node: usize, value: f64 },
    #[error("toughness vanishes at node {node} outside the initial debonded set")]
    VanishingToughness { node: usize },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("invalid boundary drive: {0}")]
    InvalidDrive(String),
}

/// Failures of the constrained Dirichlet solve.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    /// Boundary node with positive datum that the set cannot reach.
    #[error("empty admissible class: boundary node {node} carries datum {value} but is not reached by the set")]
    EmptyAdmissibleClass { node: usize, value: f64 },
    #[error("conjugate gradient hit the iteration cap ({iterations}) with relative residual {residual:e}")]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Failures of the Alt-Caffarelli minimisation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcError {
    #[error("negative boundary datum {value} at boundary node {node}")]
    NegativeBoundaryDatum { node: usize, value: f64 },
    #[error("inner Dirichlet solve failed: {0}")]
    InnerSolveDivergence(SolveError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl From<SolveError> for AcError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Domain(d) => AcError::Domain(d),
            other => AcError::InnerSolveDivergence(other),
        }
    }
}

/// Failures of the time-stepping driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("initial state: {0}")]
    Init(SolveError),
    #[error("step {step}: {source}")]
    Step { step: usize, source: AcError },
    #[error("power evaluation at step {step}: {source}")]
    Power { step: usize, source: SolveError },
    #[error("at least one time step is required")]
    NoSteps,
    #[error("step {0} requested but the previous step is missing")]
    OutOfOrder(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Failures of the closed-form one-dimensional engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OneDimError {
    #[error("unsupported drive class: {0}")]
    UnsupportedDriveClass(String),
    #[error("non-monotone input: {0}")]
    NonMonotone(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Configuration and serialization errors.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("malformed {format} data: {message}")]
    Format {
        format: &'static str,
        message: String,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
}
