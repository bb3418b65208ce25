//! Enumeration budgets shared by the decision procedures.
//!
//! Several procedures enumerate combinatorial spaces (literal selections,
//! finite-support patterns, stationary strategy pairs).  Budgets bound that
//! work up front: when an input would exceed a limit the procedure returns
//! [`crate::error::Error::BudgetExceeded`] instead of running away.

/// Limits for the enumerating procedures.  `Default` gives the documented
/// defaults; the CLI lets users override them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    /// Max number of literal-selection systems solved per query (used by
    /// satisfiability by enumeration, max-closure checking, and
    /// equivalence checking).
    pub selection_limit: u64,
    /// Max number of finite-support patterns enumerated by the dual
    /// operator-system solver.
    pub pattern_limit: u64,
    /// Max number of pure stationary strategy pairs evaluated by the game
    /// value computation.
    pub pair_limit: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { selection_limit: 1_000_000, pattern_limit: 65_536, pair_limit: 100_000 }
    }
}

impl Budgets {
    /// Uniform budget, useful for a single override knob.
    pub fn uniform(limit: u64) -> Self {
        Budgets { selection_limit: limit, pattern_limit: limit, pair_limit: limit }
    }
}
