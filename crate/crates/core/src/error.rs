use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("period matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("imaginary part of the period matrix is not positive definite (min eigenvalue {0:.3e})")]
    ImaginaryPartNotPositiveDefinite(f64),
    #[error("period matrix must be square and nonempty")]
    NotSquare,
    #[error("target error {target:.3e} needs radius {needed} > cap {cap}")]
    RadiusCapExceeded { target: f64, needed: usize, cap: usize },
    #[error("point lies within {ratio:.3e} of the theta divisor")]
    DivisorProximity { ratio: f64 },
    #[error("coefficient undefined at n = {0:?}")]
    PoleHit(Vec<i64>),
    #[error("spectral point lies on the pole divisor")]
    SpectralPole,
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty window")]
    EmptyWindow,
    #[error("exact fields require tolerance 0, got {0}")]
    InexactTolerance(f64),
    #[error("nullspace has dimension {got}, expected {expected}")]
    UnexpectedNullspaceDimension { expected: usize, got: usize },
    #[error("only {got} of {wanted} admissible spectral points after {tries} draws")]
    SamplingExhausted { wanted: usize, got: usize, tries: usize },
    #[error("Newton iteration converged from no seed")]
    NewtonDivergence,
    #[error("found {got} distinct intersection points, expected {expected}")]
    TooFewIntersections { expected: usize, got: usize },
    #[error("linear solve is singular (condition ratio {0:.3e})")]
    SingularSolve(f64),
    #[error("collocation residual {residual:.3e} exceeds {tol:.3e} at n = {n:?}")]
    ResidualTooLarge { n: Vec<i64>, residual: f64, tol: f64 },
    #[error("collocation system has rank {rank} < {unknowns} at n = {n:?}")]
    AmbiguousSolution { n: Vec<i64>, rank: usize, unknowns: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
