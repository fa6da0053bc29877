use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {value} outside the domain [0, 1]")]
    OutsideUnitInterval { value: f64 },

    #[error("power-series division by a denominator with zero constant term")]
    IllPosedDivision,

    #[error("horizon {t_max} lies below the first support point {first}")]
    EmptySupport { t_max: usize, first: usize },

    #[error("invalid mass function: {0}")]
    InvalidPmf(String),

    #[error("criterion not applicable: {0}")]
    CriterionInapplicable(String),

    #[error("cannot step from terminal state {0}")]
    TerminalState(i64),
}
