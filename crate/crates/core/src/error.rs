use alloc::string::String;
use core::fmt;

use crate::lp::LpError;

/// One of the two measuring parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    /// Alice, settings `x`, outcomes `a`.
    A,
    /// Bob, settings `y`, outcomes `b`.
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::A => f.write_str("A"),
            Party::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid distribution ({what}): {reason}")]
    InvalidDistribution { what: String, reason: String },

    #[error("invalid game table: {0}")]
    InvalidGame(String),

    #[error("unknown game `{name}`; available: {available}")]
    UnknownGame { name: String, available: String },

    #[error(
        "strategy space has {required} deterministic pairs, above the enumeration cap {cap}; \
         raise the cap (--enum-cap) to proceed"
    )]
    Capacity { required: u128, cap: u128 },

    #[error("settings of party {party} are not consistent with its marginal (max deviation {deviation:e})")]
    MarginalMismatch { party: Party, deviation: f64 },

    #[error("joint setting distribution is not the product of the marginals (max deviation {deviation:e})")]
    CorrelatedSettings { deviation: f64 },

    #[error("relative knowledge is undefined when the reference min-entropy is zero")]
    UndefinedRatio,

    #[error("setting {setting} of party {party} has zero probability")]
    ZeroMarginal { party: Party, setting: usize },

    #[error("knowledge budget xi_{party} = {value} is outside [0, 1]")]
    BudgetRange { party: Party, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("solver failure: {0}")]
    Solver(#[from] LpError),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    /// True for numerical/solver failures as opposed to rejected inputs.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Solver(_) | Error::Internal(_))
    }
}
