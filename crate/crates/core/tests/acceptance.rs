//! Acceptance suite: one test per shipping criterion, each printing a
//! single summary line.  Populations are seeded, so every run checks the
//! same instances; time limits are asserted where a criterion carries one.

use std::time::Instant;

use tropisolve_core::formula::{
    is_max_closed_semantic, is_restricted_horn, is_tropically_convex_syntactic,
    restricted_horn_shape,
};
use tropisolve_core::games::{build_game, discounted_values, limiting_average_values};
use tropisolve_core::gen;
use tropisolve_core::horn_solver::{brute_force_sat, solve_restricted, verify_witness};
use tropisolve_core::ppcompile::{compile_gamma0, equivalence_check, pp_to_horn};
use tropisolve_core::tropical::{
    atom_formula, sat_in_zero_plus, solve_csp, solve_dual, solve_primal, verify_dual_certificate,
    verify_primal_witness, CspOutcome,
};
use tropisolve_core::{Budgets, Clause, Formula, InputRel, Literal, Rational};

fn rat(n: i64) -> Rational {
    Rational::from_int(n)
}

/// Seed shared by the two exactly-one-law criteria so they test the same
/// population of 500 operator systems.
const OPS_SEED: u64 = 0xace0_0001;
const OPS_COUNT: usize = 500;

#[test]
fn strict_primal_and_nonstrict_dual_are_exactly_one_on_500_systems() {
    let budgets = Budgets::default();
    let start = Instant::now();
    let mut r = gen::rng(OPS_SEED);
    for i in 0..OPS_COUNT {
        let o = gen::random_operator_system(&mut r, 4);
        let primal = solve_primal(&o, true, &budgets).expect("decides");
        let dual = solve_dual(&o, false, &budgets).expect("decides");
        assert!(
            primal.is_some() ^ dual.is_some(),
            "system {i}: strict primal and nonstrict dual must be exactly one"
        );
        if let Some(w) = &primal {
            assert!(verify_primal_witness(&o, w, true).expect("dimension matches"), "system {i}");
        }
        if let Some(c) = &dual {
            assert!(
                verify_dual_certificate(&o, c, false).expect("dimension matches"),
                "system {i}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:.1?}, limit 60s");
    println!(
        "PASS: strict-primal / nonstrict-dual exactly-one law on {OPS_COUNT}/{OPS_COUNT} \
         seeded systems in {elapsed:.1?}"
    );
}

#[test]
fn nonstrict_primal_and_strict_dual_are_exactly_one_on_500_systems() {
    let budgets = Budgets::default();
    let start = Instant::now();
    let mut r = gen::rng(OPS_SEED);
    for i in 0..OPS_COUNT {
        let o = gen::random_operator_system(&mut r, 4);
        let primal = solve_primal(&o, false, &budgets).expect("decides");
        let dual = solve_dual(&o, true, &budgets).expect("decides");
        assert!(
            primal.is_some() ^ dual.is_some(),
            "system {i}: nonstrict primal and strict dual must be exactly one"
        );
        if let Some(w) = &primal {
            assert!(verify_primal_witness(&o, w, false).expect("dimension matches"), "system {i}");
        }
        if let Some(c) = &dual {
            assert!(verify_dual_certificate(&o, c, true).expect("dimension matches"), "system {i}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:.1?}, limit 60s");
    println!(
        "PASS: nonstrict-primal / strict-dual exactly-one law on {OPS_COUNT}/{OPS_COUNT} \
         seeded systems in {elapsed:.1?}"
    );
}

#[test]
fn game_values_match_solver_verdicts_and_discounted_values_approach_them() {
    let budgets = Budgets::default();
    let start = Instant::now();
    let count = 200;
    let beta = Rational::new(999, 1000).expect("nonzero denominator");
    let tolerance = Rational::new(1, 10).expect("nonzero denominator");
    let mut within = 0usize;
    let mut r = gen::rng(0xace0_0002);
    for i in 0..count {
        let o = gen::random_operator_system(&mut r, 3);
        let game = build_game(&o).expect("rational offsets");
        let nu = limiting_average_values(&game, &budgets).expect("values");
        let primal_sat = solve_primal(&o, true, &budgets).expect("decides").is_some();
        let dual_sat = solve_dual(&o, false, &budgets).expect("decides").is_some();
        let all_positive = nu.iter().all(|v| v > &rat(0));
        let some_nonpositive = nu.iter().any(|v| v <= &rat(0));
        assert_eq!(all_positive, primal_sat, "system {i}: sign law for the strict primal");
        assert_eq!(some_nonpositive, dual_sat, "system {i}: sign law for the nonstrict dual");
        let disc = discounted_values(&game, &beta, &budgets).expect("values");
        if nu.iter().zip(&disc).all(|(a, b)| (a - b).abs() <= tolerance) {
            within += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        within * 100 >= count * 95,
        "discounted values within 1/10 of the limiting average on only {within}/{count} systems"
    );
    println!(
        "PASS: sign laws on {count}/{count} systems; discounted values within 1/10 on \
         {within}/{count} in {elapsed:.1?}"
    );
}

#[test]
fn restricted_solver_agrees_with_exhaustive_search_on_500_formulas() {
    let budgets = Budgets::default();
    let start = Instant::now();
    let count = 500;
    let mut r = gen::rng(0xace0_0003);
    for i in 0..count {
        let f = gen::random_restricted_horn(&mut r, 5, 6, 3, 3);
        let fast = solve_restricted(&f).expect("decides");
        let slow = brute_force_sat(&f, &budgets).expect("decides");
        assert_eq!(fast.is_sat(), slow.is_sat(), "formula {i}: solvers disagree on {f}");
        if let Some(w) = fast.witness() {
            assert!(verify_witness(&f, w).expect("dimension matches"), "formula {i}: {f}");
        }
        if let Some(w) = slow.witness() {
            assert!(verify_witness(&f, w).expect("dimension matches"), "formula {i}: {f}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:.1?}, limit 30s");
    println!(
        "PASS: restricted solver vs exhaustive search agreement on {count}/{count} \
         formulas in {elapsed:.1?}"
    );
}

#[test]
fn atom_csp_solver_agrees_with_exhaustive_search_on_300_instances() {
    let budgets = Budgets::default();
    let start = Instant::now();
    let count = 300;
    let shifts = [rat(-7), Rational::new(1, 3).expect("nonzero denominator"), rat(10)];
    let mut sat_count = 0usize;
    let mut r = gen::rng(0xace0_0004);
    for i in 0..count {
        let inst = gen::random_csp_instance(&mut r, 5, 6);
        let direct = brute_force_sat(&atom_formula(&inst), &budgets).expect("decides");
        match solve_csp(&inst, &budgets).expect("decides") {
            CspOutcome::Sat(w) => {
                assert!(direct.is_sat(), "instance {i}: spurious witness");
                assert!(inst.eval(&w).expect("dimension matches"), "instance {i}");
                for c in &shifts {
                    let moved: Vec<Rational> = w.iter().map(|v| v + c).collect();
                    assert!(
                        inst.eval(&moved).expect("dimension matches"),
                        "instance {i}: witness not translation-invariant under {c}"
                    );
                }
                sat_count += 1;
            }
            CspOutcome::Unsat(cert) => {
                assert!(!direct.is_sat(), "instance {i}: missed satisfiable instance");
                let named = tropisolve_core::tropical::csp_to_operator_system(&inst);
                assert!(
                    verify_dual_certificate(&named.system, &cert, true)
                        .expect("dimension matches"),
                    "instance {i}: certificate fails verification"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "PASS: atom-CSP solver agreement on {count}/{count} instances \
         ({sat_count} satisfiable), witnesses translation-invariant, in {elapsed:.1?}"
    );
}

#[test]
fn compilation_round_trips_and_atom_counts_grow_affinely() {
    let budgets = Budgets::default();
    let start = Instant::now();
    let count = 100;
    let mut r = gen::rng(0xace0_0005);
    for i in 0..count {
        let n = 1 + i % 3;
        let clause = gen::random_horn_clause(&mut r, n, 3, 8);
        let f = Formula::with_default_names(n, vec![clause]);
        let pp = compile_gamma0(&f.clauses[0], &f.var_names).expect("compiles");
        let (h, ex) = pp_to_horn(&pp).expect("converts back");
        assert!(
            equivalence_check(&f, 0, &h, ex, &budgets).expect("comparable"),
            "clause {i}: round-trip changed the solution set of {f}"
        );
    }

    // Disjunctions `x2 - x1 >= c | x3 - x1 >= c` with c = 2^b + 3:
    // the compiled atom count is 7 at b = 1 and exactly b + 7 from b = 2 on
    // (shared doubling chain of length b plus two three-atom sums and one
    // join), so it is bounded by 7 + 1·b throughout.
    const A: u64 = 7;
    const B: u64 = 1;
    let mut counts = Vec::new();
    for b in 1..=24u32 {
        let c = rat((1i64 << b) + 3);
        let clause = Clause::new(vec![
            Literal::new(vec![(1, rat(1)), (0, rat(-1))], InputRel::Geq, c.clone()),
            Literal::new(vec![(2, rat(1)), (0, rat(-1))], InputRel::Geq, c),
        ]);
        let f = Formula::with_default_names(3, vec![clause]);
        let pp = compile_gamma0(&f.clauses[0], &f.var_names).expect("compiles");
        let count = pp.atom_count() as u64;
        assert!(
            count <= A + B * u64::from(b),
            "b = {b}: atom count {count} exceeds {A} + {B}·b"
        );
        counts.push(count);
    }
    for (i, pair) in counts.windows(2).enumerate() {
        let b = i + 1;
        if b >= 2 {
            assert_eq!(
                pair[1] - pair[0],
                B,
                "atom count difference between b = {b} and b = {} is not constant",
                b + 1
            );
        }
    }

    let elapsed = start.elapsed();
    println!(
        "PASS: {count}/{count} compilation round-trips; threshold-family atom counts \
         \u{2264} {A} + {B}\u{b7}b with constant growth, in {elapsed:.1?}"
    );
}

#[test]
fn small_positive_parameter_decisions_are_correct_on_100_crafted_instances() {
    let budgets = Budgets::default();
    let start = Instant::now();
    let per_side = 50;
    let mut r = gen::rng(0xace0_0006);
    for i in 0..per_side {
        let (phi, t_var) = gen::zero_plus_instance(&mut r, true);
        let w = sat_in_zero_plus(&phi, t_var, &budgets)
            .expect("decides")
            .unwrap_or_else(|| panic!("solvable instance {i} was rejected: {phi}"));
        let point = w.point(&w.sample());
        assert!(
            verify_witness(&phi, &point).expect("dimension matches"),
            "instance {i}: instantiating at half the threshold fails evaluation"
        );
    }
    let mut r = gen::rng(0xace0_0007);
    for i in 0..per_side {
        let (phi, t_var) = gen::zero_plus_instance(&mut r, false);
        assert!(
            sat_in_zero_plus(&phi, t_var, &budgets).expect("decides").is_none(),
            "unsolvable instance {i} was accepted: {phi}"
        );
    }
    let elapsed = start.elapsed();
    println!(
        "PASS: small-positive-parameter decisions on {}/{} crafted instances \
         (half-threshold samples verified) in {elapsed:.1?}",
        2 * per_side,
        2 * per_side
    );
}

#[test]
fn horn_shape_implies_max_closure_and_the_example_relations_classify_as_stated() {
    let budgets = Budgets::default();
    let start = Instant::now();
    let count = 100;
    let mut r = gen::rng(0xace0_0008);
    for i in 0..count {
        let n = 1 + i % 4;
        let clauses: Vec<Clause> =
            (0..1 + i % 3).map(|_| gen::random_horn_clause(&mut r, n, 3, 3)).collect();
        let f = Formula::with_default_names(n, clauses);
        assert!(
            is_max_closed_semantic(&f, &budgets).expect("within budget"),
            "formula {i}: Horn shape but not max-closed? {f}"
        );
    }

    let bounded_diff = Formula::parse("x2 - x1 >= 3 | x3 - x1 >= 3\n").expect("parses");
    assert!(is_max_closed_semantic(&bounded_diff, &budgets).expect("within budget"));
    assert!(is_tropically_convex_syntactic(&bounded_diff));

    let weighted_sum = Formula::parse("-x1 + x2 + x3 >= 0\n").expect("parses");
    assert!(is_max_closed_semantic(&weighted_sum, &budgets).expect("within budget"));
    assert!(!is_tropically_convex_syntactic(&weighted_sum));

    let two_strict = Formula::parse("x1 < x2 | x1 < x3\n").expect("parses");
    assert!(restricted_horn_shape(&two_strict).is_err(), "two negative literals");
    assert!(!is_restricted_horn(&two_strict));
    let horn = two_strict
        .clauses
        .iter()
        .all(|c| !tropisolve_core::formula::horn_columns(c, two_strict.num_vars()).is_empty());
    assert!(horn, "each clause confines negatives to one column");

    let elapsed = start.elapsed();
    println!(
        "PASS: max-closure of {count}/{count} random Horn formulas and the three \
         reference relations classify as stated, in {elapsed:.1?}"
    );
}
