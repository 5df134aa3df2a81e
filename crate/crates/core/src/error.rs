use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("subsystem index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("moment of subsystem {subsystem} is undefined: zero density")]
    UndefinedMoment { subsystem: usize },

    #[error("{what} integrates to {sum}, expected 1")]
    NotNormalized { what: String, sum: f64 },

    #[error("negative value in {0}")]
    Negative(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value produced at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("CFL condition violated: dt * v_max = {courant} > dx = {dx}")]
    Cfl { courant: f64, dx: f64 },

    #[error("cell {cell} is empty: mean velocity undefined")]
    EmptyCell { cell: usize },

    #[error("arena: {0}")]
    Arena(String),
}
