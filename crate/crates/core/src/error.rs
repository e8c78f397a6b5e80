use thiserror::Error;

/// Errors produced across the fusion toolkit.
#[derive(Debug, Error)]
pub enum FusionError {
    #[error("matrix is not unitary: max |(U^dagger U - I)_kl| = {max_deviation:.3e}")]
    NotUnitary { max_deviation: f64 },

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("degenerate Haar sample after {attempts} attempts")]
    DegenerateSample { attempts: usize },

    #[error("outcome ({i},{j}) has zero probability")]
    ZeroProbabilityOutcome { i: u8, j: u8 },

    #[error("determinant {0} outside [0, 1/4]")]
    OutOfRange(f64),

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("{requested} qubits requested, the dense oracle is capped at {cap}")]
    TooManyQubits { requested: usize, cap: usize },

    #[error("projection annihilates the state")]
    ZeroOverlap,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FusionError>;
