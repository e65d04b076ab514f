//! The knowledge-dependent local bound.
//!
//! Eve's strategy space is discretized into atoms `(response, setting row)`
//! per party; a linear program then picks joint weights over atom pairs so
//! that the referee still sees product settings and each party's
//! conditional min-entropy stays above `(1 - xi) H`.
//!
//! Any setting row can be written as a mixture of rows that are uniform on
//! its level sets, with the same mean and at least the same average
//! min-entropy (Jensen on `-log2`). Flat rows are part of every height grid,
//! so the LP optimum is the exact bound for every budget and does not depend
//! on the number of heights.

mod alphabet;
mod bound;
mod closed_form;
mod oracle;

pub use alphabet::{build_expanded_alphabet, ExpandedAlphabet, TwoLevelDistribution};
pub use bound::{
    solve_adversarial_bound, BoundResult, Diagnostics, SolverOptions, DEFAULT_HEIGHTS,
};
pub use closed_form::{closed_form_full_knowledge, KnowledgeSide};
pub use oracle::{coordinate_ascent_oracle, OracleOptions};
