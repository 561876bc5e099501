use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty period")]
    EmptyPeriod,
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolRange { symbol: usize, size: usize },
    #[error("not a k-height: {0}")]
    NotKHeight(String),
    #[error("invalid frog arrangement: {0}")]
    Arrangement(String),
    #[error("reducible word")]
    Reducible,
    #[error("chain not uniquely ergodic")]
    NotErgodic,
    #[error("too large: {states} states exceeds cap {cap}")]
    TooLarge { states: usize, cap: usize },
    #[error("matrix inversion failed")]
    Singular,
    #[error("negative band width")]
    NegativeBand,
    #[error("odd length {0}")]
    OddLength(usize),
    #[error("rho must be non-negative")]
    NegativeRho,
    #[error("{0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
