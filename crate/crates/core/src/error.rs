use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported moment order {order} (supported orders: {supported})")]
    UnsupportedOrder {
        order: usize,
        supported: &'static str,
    },

    #[error("infinite product diverges: |q| = {q} >= 1")]
    Divergence { q: f64 },

    #[error(
        "depth {depth} exceeds the enumeration ceiling of {max}; \
         use the binomial form for constant error rates"
    )]
    TooDeep { depth: usize, max: usize },

    #[error("branch {branch} has nonpositive scale {scale}")]
    NonPositiveScale { branch: usize, scale: f64 },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("insufficient samples: {n} < {min}")]
    InsufficientSamples { n: u64, min: u64 },

    #[error("invalid range: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
