use thiserror::Error;

/// Errors shared across the simulator, the protocols and the analysis tools.
#[derive(Debug, Error)]
pub enum Error {
    #[error("agent id {id} out of range for a population of {n}")]
    IdOutOfRange { id: u32, n: u32 },

    #[error("pair ({0}, {1}) is not an edge of the interaction graph")]
    NonAdjacentEdge(u32, u32),

    #[error("endpoints must be distinct agents (got {0} twice)")]
    SameAgent(u32),

    #[error("invalid interaction graph: {0}")]
    InvalidGraph(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("clear is only defined on leader states")]
    NotALeader,

    #[error("value {value} does not fit in a {bits}-bit label")]
    LabelOutOfRange { value: u32, bits: u8 },

    #[error("census is empty")]
    EmptyCensus,

    #[error("exploration cap of {cap} configurations exceeded")]
    CapExceeded { cap: usize },

    #[error("experiment spec invalid: {0}")]
    SpecInvalid(String),

    #[error("malformed canonical state bytes: {0}")]
    MalformedState(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
