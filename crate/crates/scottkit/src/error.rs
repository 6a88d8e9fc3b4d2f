use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("universe size {size} exceeds oracle bound {bound}")]
    OracleBound { size: usize, bound: usize },
    #[error("depth overflow: {0}")]
    DepthOverflow(String),
    #[error("depth {0} refused for exhaustive automorphism search (max {1})")]
    DepthRefused(usize, usize),
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("family is not block-structured: {0}")]
    NotBlockStructured(String),
    #[error("presentation is not an INF presentation")]
    BinRejected,
    #[error("no root: no color-1 leaf witnesses the empty address")]
    NoRoot,
    #[error("recovered node set is not prefix-closed")]
    InvariantNotATree,
    #[error("base colors are not injective finite values")]
    MalformedBaseColors,
    #[error("count exceeds the 64-bit bound")]
    Overflow,
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
}

impl Error {
    pub fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }
}
