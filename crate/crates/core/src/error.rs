use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid arc set: {0}")]
    InvalidArcSet(String),

    #[error("boundary sets live on different curves and cannot be compared")]
    IncomparableSets,

    #[error("distance to an empty boundary set is undefined")]
    EmptySet,

    #[error("endpoint perturbation rejected at interval {interval}: {reason}")]
    PerturbationCollision { interval: usize, reason: String },

    #[error(
        "h_target {h_target} too coarse for {feature} {index} of length {length}; \
         maximum admissible h_target is {max_admissible}"
    )]
    MeshTooCoarse {
        h_target: f64,
        feature: &'static str,
        index: usize,
        length: f64,
        max_admissible: f64,
    },

    #[error("meshing failed: {0}")]
    Meshing(String),

    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),

    #[error("matrix is not positive definite (pivot {pivot}): {context}")]
    NotPositiveDefinite { pivot: usize, context: &'static str },

    #[error("{context}: relative residual {relative:e} exceeds {tolerance:e}")]
    Residual { context: &'static str, relative: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("problem has no Dirichlet vertices")]
    NoDirichlet,

    #[error("requested {k} eigenpairs but the pencil has dimension {dim}")]
    TooManyEigenpairs { k: usize, dim: usize },

    #[error("Rayleigh quotient undefined: vector has zero Steklov trace")]
    ZeroTrace,

    #[error("point ({0}, {1}) lies outside the mesh")]
    OutsideMesh(f64, f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("study precondition violated: {0}")]
    Study(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
