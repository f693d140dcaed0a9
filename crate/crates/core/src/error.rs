use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("side length must be even and at least 2, got {0}")]
    InvalidSide(usize),

    #[error("boundary query {side:?} is undefined on a lattice that is periodic along that axis")]
    PeriodicBoundaryQuery { side: crate::lattice::Side },

    #[error("configuration has {got} outcomes but the graph has {expected} sites")]
    ConfigSize { expected: usize, got: usize },

    #[error("invalid chain parameters: {0}")]
    ChainParams(String),

    #[error("self-loop on domain {0}: an intra-domain edge survived contraction")]
    SelfLoop(usize),

    #[error("crossing query has an empty boundary set")]
    EmptyBoundary,

    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),

    #[error("invalid p-grid: {0}")]
    Grid(String),

    #[error("grid does not bracket threshold")]
    NoBracket,

    #[error("need at least {needed} {what}, got {got}")]
    TooFewPoints {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("degenerate least-squares design matrix")]
    Degenerate,

    #[error("fragment invalid: {0}")]
    Fragment(String),

    #[error("fragment needs {0} qubits, above the dense-oracle budget of 20")]
    QubitBudget(usize),

    #[error("state vector is zero")]
    ZeroState,

    #[error("fragment cannot discriminate")]
    CannotDiscriminate,

    #[error("weight-convention oracle is inconsistent: {0}")]
    Inconsistent(String),

    #[error("records span several side lengths")]
    MixedSides,

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
