use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} references vertex {vertex}, but the mesh has {count} vertices")]
    InvalidIndex {
        element: usize,
        vertex: usize,
        count: usize,
    },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-manifold mesh: {0}")]
    NonManifold(String),
    #[error("mesh assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("neighbourhood overlap: {0}; refine the mesh by quadrisection until the 3-neighbourhoods of extraordinary features are disjoint")]
    NeighbourhoodOverlap(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parameter {value} outside knot range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("illegal knot multiplicity: {0}")]
    IllegalMultiplicity(String),
    #[error("knot vector has no C0 breakpoint")]
    NoExtraordinaryPoint,
    #[error("knot vector has {0} C0 breakpoints, expected exactly one")]
    MultipleExtraordinaryPoints(usize),
    #[error("boundary not regular: {0}")]
    BoundaryNotRegular(String),
    #[error("singular Jacobian in element {element} (det = {det:e})")]
    SingularJacobian { element: usize, det: f64 },
    #[error("global basis index clash: {0}")]
    IndexClash(String),
    #[error("unsupported joint: {0}")]
    UnsupportedJointValence(String),
    #[error("the Dirichlet boundary is empty")]
    EmptyDirichletBoundary,
    #[error("basis is not globally C1; refusing H2 assembly")]
    BasisNotC1,
    #[error("solver breakdown: non-positive pivot {pivot:e} at row {row} (matrix is not positive definite)")]
    SolverBreakdown { row: usize, pivot: f64 },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
