use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not invertible over the ring")]
    NotInvertible,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("transcription check failed: {0}")]
    Transcription(String),

    #[error("twist matrix does not commute with the image of {0}")]
    CentralizerFailure(String),

    #[error("relator {0} does not evaluate to the identity")]
    RelationFailure(String),

    #[error("form is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("form has inertia ({p},{q},{z}); expected signature (n,1) and no kernel")]
    BadSignature { p: usize, q: usize, z: usize },

    #[error("vector is not a point of complex hyperbolic space (<Z,Z> = {0:e})")]
    NotNegative(f64),

    #[error("vector is not null (|<Q,Q>| = {0:e})")]
    NotNull(f64),

    #[error("point lies at the pole of the base point")]
    AtBasePoint,

    #[error("horoballs share a base point")]
    IdenticalBasePoints,

    #[error("point is not on the horosphere (level offset {0:e})")]
    NotOnHorosphere(f64),

    #[error("matrix does not preserve the form (relative residual {0:e})")]
    NotFormPreserving(f64),

    #[error("determinant has modulus {0}, expected 1")]
    BadDeterminant(f64),

    #[error("no null eigenvector with unit-modulus eigenvalue")]
    NoFixedNullVector,

    #[error("cusp generators do not share a fixed boundary point")]
    NoCommonFixedPoint,

    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
