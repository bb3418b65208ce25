//! Deterministic, seeded generators for random solver inputs.
//!
//! Every generator takes an explicit ChaCha8 RNG so that test populations
//! are reproducible from a single seed across platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Clause, Formula, InputRel, Literal};
use crate::numeric::{EpsNum, Rational};
use crate::tropical::{Atom, CspInstance, OpArg, Operator, OperatorSystem};

/// A ChaCha8 RNG from a 64-bit seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rat(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    Rational::from_int(rng.gen_range(lo..=hi))
}

/// A random operator system with `1..=max_dim` components.  Arguments have
/// arity at most three, integer offsets in `[-3, 3]`, and averaging weights
/// in `[1, 3]`.
pub fn random_operator_system(rng: &mut ChaCha8Rng, max_dim: usize) -> OperatorSystem {
    let n = rng.gen_range(1..=max_dim);
    let mut ops = Vec::with_capacity(n);
    for _ in 0..n {
        let arity = rng.gen_range(1..=3usize);
        let op = match rng.gen_range(0..3u8) {
            0 => Operator::Max(random_args(rng, n, arity)),
            1 => Operator::Min(random_args(rng, n, arity)),
            _ => {
                let args = (0..arity)
                    .map(|_| (rat(rng, 1, 3), rng.gen_range(0..n)))
                    .collect();
                Operator::Avg { args, offset: rat(rng, -3, 3) }
            }
        };
        ops.push(op);
    }
    OperatorSystem::new(ops).expect("generated system is well-formed")
}

fn random_args(rng: &mut ChaCha8Rng, n: usize, arity: usize) -> Vec<OpArg> {
    (0..arity)
        .map(|_| OpArg::new(rng.gen_range(0..n), EpsNum::from_rational(rat(rng, -3, 3))))
        .collect()
}

fn random_rel(rng: &mut ChaCha8Rng, strict_prob: f64) -> InputRel {
    if rng.gen_bool(strict_prob) {
        InputRel::Gt
    } else {
        InputRel::Geq
    }
}

/// A literal with nonnegative coefficients over `n` variables (about
/// `density` of them nonzero, magnitudes `1..=mag`).
fn nonneg_literal(rng: &mut ChaCha8Rng, n: usize, mag: i64) -> Literal {
    let mut terms = Vec::new();
    for j in 0..n {
        if rng.gen_bool(0.5) {
            let c = rng.gen_range(1..=mag);
            terms.push((j, Rational::from_int(c)));
        }
    }
    Literal::new(terms, random_rel(rng, 0.2), rat(rng, -mag, mag))
}

/// A random restricted Horn formula: per clause at most one literal carries
/// negative coefficients, and those sit in a single column.
pub fn random_restricted_horn(
    rng: &mut ChaCha8Rng,
    max_vars: usize,
    max_clauses: usize,
    max_literals: usize,
    mag: i64,
) -> Formula {
    let n = rng.gen_range(1..=max_vars);
    let num_clauses = rng.gen_range(1..=max_clauses);
    let mut clauses = Vec::with_capacity(num_clauses);
    for _ in 0..num_clauses {
        let lit_count = rng.gen_range(1..=max_literals);
        let neg_slot = if rng.gen_bool(0.85) {
            Some(rng.gen_range(0..lit_count))
        } else {
            None
        };
        let k = rng.gen_range(0..n);
        let mut lits = Vec::with_capacity(lit_count);
        for li in 0..lit_count {
            let mut lit = nonneg_literal(rng, n, mag);
            if neg_slot == Some(li) {
                let mut terms: Vec<(usize, Rational)> = lit
                    .coeffs()
                    .iter()
                    .filter(|&(&j, _)| j != k)
                    .map(|(&j, c)| (j, c.clone()))
                    .collect();
                terms.push((k, Rational::from_int(rng.gen_range(-mag..=-1))));
                let rel = match lit.rel {
                    crate::lp::Rel::Gt => InputRel::Gt,
                    crate::lp::Rel::Geq => InputRel::Geq,
                };
                lit = Literal::new(terms, rel, lit.bound.clone());
            }
            lits.push(lit);
        }
        clauses.push(Clause::new(lits));
    }
    Formula::with_default_names(n, clauses)
}

/// A random Horn clause over `n` variables: negative coefficients appear
/// only in one shared column, any number of literals may carry one.
pub fn random_horn_clause(rng: &mut ChaCha8Rng, n: usize, max_literals: usize, mag: i64) -> Clause {
    let k = rng.gen_range(0..n);
    let lit_count = rng.gen_range(1..=max_literals);
    let mut lits = Vec::with_capacity(lit_count);
    for _ in 0..lit_count {
        let mut terms = Vec::new();
        for j in 0..n {
            if j == k {
                let c = rng.gen_range(-mag..=0);
                if c != 0 {
                    terms.push((j, Rational::from_int(c)));
                }
            } else if rng.gen_bool(0.5) {
                terms.push((j, Rational::from_int(rng.gen_range(1..=mag))));
            }
        }
        lits.push(Literal::new(terms, random_rel(rng, 0.25), rat(rng, -mag, mag)));
    }
    Clause::new(lits)
}

/// A random tropically convex Horn clause: every literal's coefficients sum
/// to zero, with the negative weight a power of two times an odd factor
/// that divides the whole literal (so the translation-invariant compiler
/// accepts it).
pub fn random_tropical_clause(rng: &mut ChaCha8Rng, n: usize, max_literals: usize) -> Clause {
    let k = rng.gen_range(0..n);
    let lit_count = rng.gen_range(1..=max_literals);
    let mut lits = Vec::with_capacity(lit_count);
    for _ in 0..lit_count {
        let odd = [1i64, 1, 3][rng.gen_range(0..3usize)];
        let c = rng.gen_range(-2..=2i64);
        if n == 1 {
            // A single variable forces the weights to cancel entirely.
            lits.push(Literal::new(vec![], random_rel(rng, 0.2), Rational::from_int(c)));
            continue;
        }
        let q = rng.gen_range(0..=2u32);
        let beta = 1i64 << q;
        let mut weights = vec![0i64; n];
        for _ in 0..beta {
            let mut j = rng.gen_range(0..n);
            if j == k {
                j = (j + 1) % n;
            }
            weights[j] += 1;
        }
        let mut terms = vec![(k, Rational::from_int(-beta * odd))];
        for (j, w) in weights.iter().enumerate() {
            if *w != 0 {
                terms.push((j, Rational::from_int(w * odd)));
            }
        }
        lits.push(Literal::new(
            terms,
            random_rel(rng, 0.2),
            Rational::from_int(c * odd),
        ));
    }
    Clause::new(lits)
}

/// A random constraint instance over the atom vocabulary
/// `LT`, `T+1`, `T-1`, `S3`, `M0` with `1..=max_vars` variables.
pub fn random_csp_instance(rng: &mut ChaCha8Rng, max_vars: usize, max_atoms: usize) -> CspInstance {
    let n = rng.gen_range(1..=max_vars);
    let var_names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let atom_count = rng.gen_range(1..=max_atoms);
    let mut atoms = Vec::with_capacity(atom_count);
    for _ in 0..atom_count {
        let pick = |rng: &mut ChaCha8Rng| rng.gen_range(0..n);
        let atom = match rng.gen_range(0..5u8) {
            0 => Atom::Lt(pick(rng), pick(rng)),
            1 => Atom::TPlus(pick(rng), pick(rng)),
            2 => Atom::TMinus(pick(rng), pick(rng)),
            3 => Atom::S3(pick(rng), pick(rng), pick(rng)),
            _ => Atom::M0(pick(rng), pick(rng), pick(rng)),
        };
        atoms.push(atom);
    }
    CspInstance { var_names, atoms }
}

/// A formula over `n` ordinary variables plus a trailing parameter variable
/// whose satisfiability for all sufficiently small positive parameter
/// values is known by construction.  Returns the formula and the parameter
/// variable's index.
pub fn zero_plus_instance(rng: &mut ChaCha8Rng, solvable: bool) -> (Formula, usize) {
    let n = rng.gen_range(1..=3usize);
    let t = n;
    let mut clauses = Vec::new();
    for i in 0..n {
        // Pin x_i = q_i * t for a random positive rational slope.
        let q = Rational::new(rng.gen_range(1..=3), rng.gen_range(1..=2)).unwrap();
        clauses.push(Clause::new(vec![Literal::new(
            vec![(i, Rational::from_int(1)), (t, -&q)],
            InputRel::Geq,
            Rational::zero(),
        )]));
        clauses.push(Clause::new(vec![Literal::new(
            vec![(i, Rational::from_int(-1)), (t, q)],
            InputRel::Geq,
            Rational::zero(),
        )]));
    }
    // A cap on the parameter keeps the instance bounded without affecting
    // small parameter values.
    let cap = rat(rng, 1, 3);
    clauses.push(Clause::new(vec![Literal::new(
        vec![(t, Rational::from_int(-1))],
        InputRel::Geq,
        -&cap,
    )]));
    // A redundant disjunction for branch coverage.
    clauses.push(Clause::new(vec![
        Literal::new(vec![(0, Rational::from_int(1))], InputRel::Geq, rat(rng, -3, -1)),
        Literal::new(vec![(t, Rational::from_int(-1))], InputRel::Gt, -&cap - Rational::from_int(1)),
    ]));
    if !solvable {
        if rng.gen_bool(0.5) {
            // Demand the parameter stay away from zero.
            clauses.push(Clause::new(vec![Literal::new(
                vec![(t, Rational::from_int(1))],
                InputRel::Geq,
                Rational::new(1, rng.gen_range(1..=4)).unwrap(),
            )]));
        } else {
            // x_0 >= 1 contradicts the pin x_0 = q_0 * t for small t.
            clauses.push(Clause::new(vec![Literal::new(
                vec![(0, Rational::from_int(1))],
                InputRel::Geq,
                Rational::from_int(1),
            )]));
        }
    }
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.push("t".to_string());
    (Formula { var_names: names, clauses }, t)
}
