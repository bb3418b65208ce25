//! Exact-arithmetic decision procedures for disjunctive linear constraints
//! over the rationals whose solution sets are closed under componentwise
//! maximum.
//!
//! The crate provides, all over exact rational arithmetic (optionally
//! extended by an infinitesimal and by positive infinity):
//!
//! * [`lp`] — Fourier–Motzkin feasibility, projection and implication for
//!   systems mixing strict and non-strict inequalities, with verifiable
//!   infeasibility certificates.
//! * [`formula`] — clause formulas (disjunctions of linear inequalities),
//!   parsing, printing, and the syntactic/semantic classifiers.
//! * [`horn_solver`] — a polynomial solver for the restricted clause class
//!   plus a brute-force baseline for arbitrary clause formulas.
//! * [`tropical`] — fixed-point style systems `x < o(x)` / `y >= o(y)` of
//!   max/min/average operators, their duality laws, constraint instances
//!   over a small atom vocabulary, and satisfiability arbitrarily close to
//!   zero from above.
//! * [`games`] — turn-based stochastic mean-payoff games: exact limiting
//!   average values by strategy enumeration and exact discounted values.
//! * [`ppcompile`] — compilation of Horn clauses into existentially
//!   quantified conjunctions over two finite relation vocabularies, with an
//!   exact equivalence checker.
//! * [`gen`] — seeded random instance generators for test populations.
//!
//! Budgets ([`Budgets`]) bound every enumerative search; exceeding one
//! yields [`Error::BudgetExceeded`] rather than a silent wrong answer.

pub mod budget;
pub mod error;
pub mod formula;
pub mod games;
pub mod gen;
pub mod horn_solver;
pub mod lp;
pub mod numeric;
pub mod ppcompile;
pub mod tropical;

pub use budget::Budgets;
pub use error::{Error, Result};
pub use formula::{Clause, Formula, InputRel, Literal};
pub use lp::{Certificate, LinRow, LinSystem, LpResult, Rel};
pub use numeric::{EpsNum, Ext, ExtVal, Rational};
