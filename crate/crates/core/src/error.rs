use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("field order {p}^{e} exceeds the supported cap of 128")]
    FieldTooLarge { p: u32, e: u32 },
    #[error("no modulus is listed for GF({p}^{e})")]
    NoModulus { p: u32, e: u32 },
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("modulus for GF({p}^{e}) is reducible")]
    ReducibleModulus { p: u32, e: u32 },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("inversion of zero")]
    InverseOfZero,
    #[error("entry {value} is not an element of GF({q})")]
    InvalidElement { value: u32, q: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix has rank {rank}, expected full row rank {rows}")]
    RankDeficient { rank: usize, rows: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("enumeration of {size} items exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("codes longer than {max} columns are not supported")]
    TooManyColumns { max: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unknown tag {0:?}")]
    UnknownTag(String),
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
