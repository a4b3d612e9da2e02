use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hypothesis design: {0}")]
    InvalidSpec(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("table does not conform to the design: {0}")]
    Mismatch(String),

    #[error("table space has {count} tables, above the enumeration budget of {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("point is not in the parameter space: {0}")]
    OffSimplex(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
