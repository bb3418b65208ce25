//! Deciding restricted Horn formulas in polynomial time, plus the
//! exponential selection oracle used to cross-check it.
//!
//! `solve_restricted` maintains the conjunction Ψ of unit clauses and
//! repeatedly removes, from longer clauses, any all-nonnegative literal
//! that is infeasible together with Ψ; removed literals can never help
//! satisfy their clause.  When no removal is possible the formula is
//! satisfiable, and a witness is the componentwise maximum of one solution
//! of Ψ ∧ φ per surviving all-nonnegative literal φ — each such literal is
//! monotone, and Ψ's literals (negatives confined to one column) are
//! preserved under componentwise max, so the max satisfies everything.
//!
//! `brute_force_sat` instead picks one literal per clause and solves each
//! conjunction exactly; it works on any clausal formula within budget.

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::formula::{restricted_horn_shape, Formula, Literal};
use crate::lp::{fm_feasible, LinSystem, LpResult};
use crate::numeric::{EpsNum, Rational};

/// Outcome of a satisfiability query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    /// Satisfiable with an exact rational witness.
    Sat(Vec<Rational>),
    /// Unsatisfiable; the trace explains how the contradiction arose.
    Unsat(UnsatTrace),
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            SolveResult::Sat(w) => Some(w),
            SolveResult::Unsat(_) => None,
        }
    }
}

/// A literal removed because it cannot hold together with the unit set Ψ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    /// Index of the clause the literal was removed from.
    pub clause: usize,
    pub literal: Literal,
}

/// One member of the final contradictory unit set Ψ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalUnit {
    pub clause: usize,
    /// `None` marks a clause emptied by removals (unsatisfiable on its own).
    pub literal: Option<Literal>,
}

/// Removal history plus the unit set that became contradictory.
/// `brute_force_sat` returns an empty trace on Unsat.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnsatTrace {
    pub removals: Vec<Removal>,
    pub final_units: Vec<FinalUnit>,
}

/// Extracts the rational parts of an all-rational feasibility witness.
/// Systems whose bounds are rational always admit such a witness.
fn rational_parts(witness: &[EpsNum]) -> Result<Vec<Rational>> {
    witness
        .iter()
        .map(|w| {
            if w.eps.is_zero() {
                Ok(w.std.clone())
            } else {
                Err(Error::InternalInconsistency(format!(
                    "expected a rational witness, got eps component {w}"
                )))
            }
        })
        .collect()
}

fn units_snapshot(clauses: &[Vec<Literal>]) -> Vec<FinalUnit> {
    clauses
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() <= 1)
        .map(|(i, c)| FinalUnit { clause: i, literal: c.first().cloned() })
        .collect()
}

/// Decides a restricted Horn formula in polynomial time, producing a
/// rational witness or a removal trace ending in a contradictory unit set.
pub fn solve_restricted(phi: &Formula) -> Result<SolveResult> {
    restricted_horn_shape(phi)?;
    let n = phi.num_vars();
    let mut clauses: Vec<Vec<Literal>> = phi.clauses.iter().map(|c| c.literals.clone()).collect();
    let mut removals: Vec<Removal> = Vec::new();

    let psi_system = |clauses: &[Vec<Literal>]| -> LinSystem {
        let mut sys = LinSystem::new(n);
        for clause in clauses.iter().filter(|c| c.len() == 1) {
            sys.push(clause[0].to_lin_row(n));
        }
        sys
    };

    loop {
        if clauses.iter().any(|c| c.is_empty()) {
            return Ok(SolveResult::Unsat(UnsatTrace {
                removals,
                final_units: units_snapshot(&clauses),
            }));
        }
        let psi = psi_system(&clauses);
        if !fm_feasible(&psi)?.is_feasible() {
            return Ok(SolveResult::Unsat(UnsatTrace {
                removals,
                final_units: units_snapshot(&clauses),
            }));
        }
        // One full pass: test every all-nonnegative literal of every longer
        // clause against Ψ; apply the removals only after the pass.
        let mut doomed: Vec<(usize, usize)> = Vec::new();
        for (ci, clause) in clauses.iter().enumerate() {
            if clause.len() <= 1 {
                continue;
            }
            for (li, lit) in clause.iter().enumerate() {
                if !lit.all_coeffs_nonneg() {
                    continue; // the clause's one negative-coefficient literal
                }
                let mut sys = psi.clone();
                sys.push(lit.to_lin_row(n));
                if !fm_feasible(&sys)?.is_feasible() {
                    doomed.push((ci, li));
                }
            }
        }
        if doomed.is_empty() {
            break;
        }
        for &(ci, li) in doomed.iter().rev() {
            let lit = clauses[ci].remove(li);
            removals.push(Removal { clause: ci, literal: lit });
        }
        // Reversed removal order within the pass restores scan order.
        let pass_start = removals.len() - doomed.len();
        removals[pass_start..].reverse();
    }

    // Witness: componentwise max of one solution of Ψ ∧ φ per surviving
    // all-nonnegative literal φ; just Ψ if none survive.
    let psi = psi_system(&clauses);
    let mut best: Option<Vec<Rational>> = None;
    for clause in &clauses {
        for lit in clause {
            if !lit.all_coeffs_nonneg() {
                continue;
            }
            let mut sys = psi.clone();
            sys.push(lit.to_lin_row(n));
            let LpResult::Feasible(w) = fm_feasible(&sys)? else {
                return Err(Error::InternalInconsistency(
                    "literal passed the removal loop but Ψ ∧ φ is infeasible".into(),
                ));
            };
            let s_phi = rational_parts(&w)?;
            best = Some(match best {
                None => s_phi,
                Some(acc) => acc
                    .into_iter()
                    .zip(s_phi)
                    .map(|(a, b)| a.max(b))
                    .collect(),
            });
        }
    }
    let witness = match best {
        Some(w) => w,
        None => {
            let LpResult::Feasible(w) = fm_feasible(&psi)? else {
                return Err(Error::InternalInconsistency(
                    "unit set Ψ became infeasible after the removal loop".into(),
                ));
            };
            rational_parts(&w)?
        }
    };
    debug_assert!(phi.eval(&witness).unwrap_or(false), "constructed witness must satisfy the formula");
    Ok(SolveResult::Sat(witness))
}

/// Satisfiability by exhaustive literal selection: one literal per clause,
/// each conjunction decided exactly.  Works on arbitrary clausal formulas;
/// the number of selections must stay within `budgets.selection_limit`.
pub fn brute_force_sat(phi: &Formula, budgets: &Budgets) -> Result<SolveResult> {
    let n = phi.num_vars();
    if phi.clauses.iter().any(|c| c.is_empty()) {
        return Ok(SolveResult::Unsat(UnsatTrace::default()));
    }
    let mut selections: u128 = 1;
    for c in &phi.clauses {
        selections = selections.saturating_mul(c.literals.len() as u128);
    }
    if selections > budgets.selection_limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "literal selections in satisfiability search".into(),
            needed: selections,
            limit: budgets.selection_limit as u128,
        });
    }
    let mut counter = vec![0usize; phi.clauses.len()];
    loop {
        let mut sys = LinSystem::new(n);
        for (ci, &li) in counter.iter().enumerate() {
            sys.push(phi.clauses[ci].literals[li].to_lin_row(n));
        }
        if let LpResult::Feasible(w) = fm_feasible(&sys)? {
            return Ok(SolveResult::Sat(rational_parts(&w)?));
        }
        let mut i = counter.len();
        loop {
            if i == 0 {
                return Ok(SolveResult::Unsat(UnsatTrace::default()));
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < phi.clauses[i].literals.len() {
                break;
            }
            counter[i] = 0;
        }
    }
}

/// Exact check that `x` satisfies every clause of `phi`.
pub fn verify_witness(phi: &Formula, x: &[Rational]) -> Result<bool> {
    phi.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Clause, InputRel};
    use proptest::prelude::*;

    fn r(p: i64) -> Rational {
        Rational::from_int(p)
    }

    #[test]
    fn removal_then_sat_with_frozen_witness() {
        // (x1 >= 1 | x2 >= 1) ∧ (x1 <= 0): the first literal conflicts
        // with the unit x1 <= 0 and is removed; the clause becomes the
        // unit x2 >= 1.
        let phi = Formula::parse("x1 >= 1 | x2 >= 1\nx1 <= 0\n").unwrap();
        let result = solve_restricted(&phi).unwrap();
        let SolveResult::Sat(w) = &result else { panic!("expected Sat, got {result:?}") };
        assert_eq!(w, &vec![r(-1), r(2)]);
        assert!(verify_witness(&phi, w).unwrap());
        let oracle = brute_force_sat(&phi, &Budgets::default()).unwrap();
        assert!(oracle.is_sat());
    }

    #[test]
    fn removal_trace_is_recorded() {
        let phi = Formula::parse("x1 >= 1 | x2 >= 1\nx1 <= 0\nx2 <= 0\n").unwrap();
        let result = solve_restricted(&phi).unwrap();
        let SolveResult::Unsat(trace) = result else { panic!("expected Unsat") };
        // Both disjuncts die against Ψ = {x1<=0, x2<=0}; clause 0 empties.
        assert_eq!(trace.removals.len(), 2);
        assert_eq!(trace.removals[0].clause, 0);
        assert_eq!(trace.removals[0].literal.coeff(0), r(1));
        assert_eq!(trace.removals[1].literal.coeff(1), r(1));
        assert!(trace.final_units.iter().any(|u| u.clause == 0 && u.literal.is_none()));
        assert!(!brute_force_sat(&phi, &Budgets::default()).unwrap().is_sat());
    }

    #[test]
    fn empty_formula_is_sat_with_zero_vector() {
        let phi = Formula::parse("").unwrap();
        assert_eq!(solve_restricted(&phi).unwrap(), SolveResult::Sat(vec![]));
        let phi2 = Formula::with_default_names(2, vec![]);
        assert_eq!(solve_restricted(&phi2).unwrap(), SolveResult::Sat(vec![r(0), r(0)]));
    }

    #[test]
    fn non_restricted_input_is_rejected() {
        let phi = Formula::parse("x1 < x2 | x1 < x3\n").unwrap();
        assert!(matches!(solve_restricted(&phi), Err(Error::NotRestrictedHorn(_))));
        let non_horn = Formula::parse("x1 - x2 >= 0 | x2 - x1 > 0\n").unwrap();
        assert!(matches!(solve_restricted(&non_horn), Err(Error::NotHorn(_))));
    }

    #[test]
    fn brute_force_on_positive_cycle_is_unsat() {
        // Pairwise "one successor exceeds me by 1" on a 3-cycle: every
        // selection orients a positive-weight cycle.
        let text = "x2 - x1 >= 1 | x3 - x1 >= 1\nx3 - x2 >= 1 | x1 - x2 >= 1\nx1 - x3 >= 1 | x2 - x3 >= 1\n";
        let phi = Formula::parse(text).unwrap();
        assert!(!brute_force_sat(&phi, &Budgets::default()).unwrap().is_sat());
    }

    #[test]
    fn brute_force_first_feasible_selection_wins() {
        let phi = Formula::parse("x1 >= 0 | x1 >= 5\n").unwrap();
        let result = brute_force_sat(&phi, &Budgets::default()).unwrap();
        assert_eq!(result, SolveResult::Sat(vec![r(1)]));
    }

    #[test]
    fn brute_force_strict_cycle_unsat() {
        let phi = Formula::parse("y - x > 0\nx - y > 0\n").unwrap();
        assert!(!brute_force_sat(&phi, &Budgets::default()).unwrap().is_sat());
    }

    #[test]
    fn brute_force_budget_is_enforced() {
        let clause: Vec<Clause> = (0..21)
            .map(|_| {
                Clause::new(vec![
                    Literal::new(vec![(0, r(1))], InputRel::Geq, r(0)),
                    Literal::new(vec![(0, r(1))], InputRel::Geq, r(1)),
                ])
            })
            .collect();
        let phi = Formula::with_default_names(1, clause);
        let tight = Budgets { selection_limit: 1 << 20, ..Budgets::default() };
        assert!(matches!(brute_force_sat(&phi, &tight), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn verify_witness_on_max_atoms_clause() {
        // x1 + 3 <= max(x2, x3); parse order is (x2, x1, x3).
        let phi = Formula::parse("x2 - x1 >= 3 | x3 - x1 >= 3\n").unwrap();
        assert!(verify_witness(&phi, &[r(3), r(0), r(0)]).unwrap());
        assert!(!verify_witness(&phi, &[r(2), r(0), r(2)]).unwrap());
        assert!(verify_witness(&Formula::parse("").unwrap(), &[]).unwrap());
    }

    #[test]
    fn strict_units_are_honored() {
        let phi = Formula::parse("x1 > 0\nx1 < 1\n").unwrap();
        let SolveResult::Sat(w) = solve_restricted(&phi).unwrap() else { panic!() };
        assert!(w[0].is_positive() && w[0] < r(1));
        let contradiction = Formula::parse("x1 > 0\nx1 <= 0\n").unwrap();
        assert!(!solve_restricted(&contradiction).unwrap().is_sat());
    }

    // Random restricted Horn clauses: at most one literal with a negative
    // coefficient, and that literal's negatives confined to column k.
    prop_compose! {
        fn arb_restricted_clause(n: usize)(
            k in 0..n,
            has_neg in proptest::bool::ANY,
            lits in proptest::collection::vec(
                (proptest::collection::vec(0i64..=2, n), -3i64..=3, proptest::bool::ANY),
                1..=3,
            ),
        ) -> Clause {
            let literals = lits
                .into_iter()
                .enumerate()
                .map(|(i, (mut coeffs, bound, strict))| {
                    if i == 0 && has_neg {
                        coeffs[k] = -coeffs[k] - 1;
                    }
                    let rel = if strict { InputRel::Gt } else { InputRel::Geq };
                    Literal::new(
                        coeffs.iter().enumerate().map(|(v, &c)| (v, Rational::from_int(c))),
                        rel,
                        Rational::from_int(bound),
                    )
                })
                .collect();
            Clause::new(literals)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn agrees_with_brute_force(
            clauses in proptest::collection::vec(arb_restricted_clause(3), 1..=4),
        ) {
            let phi = Formula::with_default_names(3, clauses);
            prop_assume!(crate::formula::is_restricted_horn(&phi));
            let fast = solve_restricted(&phi).unwrap();
            let slow = brute_force_sat(&phi, &Budgets::default()).unwrap();
            prop_assert_eq!(fast.is_sat(), slow.is_sat());
            if let SolveResult::Sat(w) = &fast {
                prop_assert!(verify_witness(&phi, w).unwrap());
            }
            if let SolveResult::Sat(w) = &slow {
                prop_assert!(verify_witness(&phi, w).unwrap());
            }
        }
    }
}
