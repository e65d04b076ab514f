//! Local-hidden-variable bounds of two-party nonlocal games when an
//! adversary holds partial knowledge of the measurement settings.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and multi-threaded drivers live in the `bell-asym` companion crate.
//!
//! Layout:
//! - [`game`]: coefficient tables, built-in games, party swap.
//! - [`lhv`]: deterministic strategies, boxes, the classical bound.
//! - [`adversary`]: min-entropy accounting and adversary-prepared strategies.
//! - [`lp`]: a small revised simplex with column generation.
//! - [`solver`]: the knowledge-dependent bound and its search oracle.
//! - [`asymmetry`]: asymmetry indicators and budget sweeps.
#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod asymmetry;
mod error;
pub mod game;
pub mod lhv;
pub mod lp;
pub mod solver;
mod stochastic;

pub use adversary::{
    conditional_min_entropy, effective_box, evaluate_eve_value, min_entropy, relative_knowledge,
    simulate, ConditionalSettings, EveStrategy, KnowledgeBudget, SimulationReport,
};
pub use asymmetry::{
    check_symmetry, delta_one_param, delta_two_param, sweep_curve, CurvePoint, SweepConfig,
    SweepMode, SymmetryReport,
};
pub use error::{Error, Party};
pub use game::{
    algebraic_max, builtin_game, builtin_metadata, transpose_game, GameMetadata, GameTable,
    BUILTIN_GAMES,
};
pub use lhv::{
    check_no_signaling, classical_bound, enumerate_strategies, evaluate_box_value, BellBox,
    ClassicalBound, DeterministicStrategy, NoSignalingReport, ResponseFunction,
};
pub use lp::{
    lp_solve, ColumnSource, Constraint, DenseColumns, LpError, LpOptions, LpSolution, Sense,
};
pub use solver::{
    build_expanded_alphabet, closed_form_full_knowledge, coordinate_ascent_oracle,
    solve_adversarial_bound, BoundResult, Diagnostics, ExpandedAlphabet, KnowledgeSide,
    OracleOptions, SolverOptions, TwoLevelDistribution,
};
pub use stochastic::StochasticMatrix;

/// Absolute tolerance for normalization of a single probability vector.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Absolute tolerance for aggregated consistency conditions.
pub const CONSISTENCY_TOL: f64 = 1e-9;
