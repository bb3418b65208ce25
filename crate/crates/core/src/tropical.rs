//! Operator systems, the primal/dual feasibility duality, and the CSP over
//! the translation-invariant atom basis {LT, T+1, T-1, S3, M0}.
//!
//! An operator system assigns each coordinate a max-, min-, or
//! weighted-average self-map.  The primal problem asks for x with
//! x ≺ ō(x) over ℚⁿ; the dual for y with y ≽ ō(y) over (ℚ∪{+∞})ⁿ minus
//! the all-+∞ vector, with +∞ > +∞ stipulated for the strict reading.
//! Exactly one of {primal strict, dual non-strict} and exactly one of
//! {primal non-strict, dual strict} is satisfiable; `check_duality`
//! asserts both.
//!
//! The CSP pipeline turns atoms into a single-operator-per-variable system
//! (splitting variables constrained several times and rewriting `<` with a
//! −ε offset), answers SAT by literal-selection search on the atom
//! formula, and answers UNSAT with a dual certificate over V = ℚ+ℚε found
//! by `solve_dual` — satisfiability for all small ε > 0 coincides with
//! satisfiability at the formal ε (see `sat_in_zero_plus`).

use std::collections::HashMap;
use std::fmt;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::formula::{Clause, Formula, InputRel, Literal};
use crate::horn_solver::{brute_force_sat, SolveResult};
use crate::lp::{fm_feasible, LinRow, LinSystem, LpResult, Rel};
use crate::numeric::{EpsNum, Ext, Rational};

/// Extended value with an ε-aware finite part.
pub type ExtEps = Ext<EpsNum>;

/// One max/min argument: the referenced variable plus an additive offset.
/// Offsets are ε-aware so strict constraints can be rewritten as `− ε`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpArg {
    pub var: usize,
    pub offset: EpsNum,
}

impl OpArg {
    pub fn new(var: usize, offset: EpsNum) -> Self {
        OpArg { var, offset }
    }

    pub fn plain(var: usize) -> Self {
        OpArg { var, offset: EpsNum::zero() }
    }
}

/// A coordinate self-map: max or min of offset arguments, or a weighted
/// average `(Σ αᵢ·x_{jᵢ})/(Σ αᵢ) + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operator {
    Max(Vec<OpArg>),
    Min(Vec<OpArg>),
    Avg { args: Vec<(Rational, usize)>, offset: Rational },
}

impl Operator {
    fn arg_vars(&self) -> Vec<usize> {
        match self {
            Operator::Max(args) | Operator::Min(args) => args.iter().map(|a| a.var).collect(),
            Operator::Avg { args, .. } => args.iter().map(|&(_, v)| v).collect(),
        }
    }
}

/// One operator per coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSystem {
    pub ops: Vec<Operator>,
}

impl OperatorSystem {
    /// Validates arities, weight signs, and variable indices.
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        let n = ops.len();
        for (i, op) in ops.iter().enumerate() {
            let args_empty = match op {
                Operator::Max(a) | Operator::Min(a) => a.is_empty(),
                Operator::Avg { args, .. } => args.is_empty(),
            };
            if args_empty {
                return Err(Error::InvalidInput(format!("operator {} has no arguments", i + 1)));
            }
            if let Operator::Avg { args, .. } = op {
                if args.iter().any(|(w, _)| !w.is_positive()) {
                    return Err(Error::InvalidInput(format!(
                        "operator {} has a non-positive average weight",
                        i + 1
                    )));
                }
            }
            if let Some(&v) = op.arg_vars().iter().find(|&&v| v >= n) {
                return Err(Error::InvalidInput(format!(
                    "operator {} references variable index {} out of {}",
                    i + 1,
                    v,
                    n
                )));
            }
        }
        Ok(OperatorSystem { ops })
    }

    pub fn dim(&self) -> usize {
        self.ops.len()
    }

    /// True when every offset is plain rational (no ε parts).
    pub fn is_rational(&self) -> bool {
        self.ops.iter().all(|op| match op {
            Operator::Max(args) | Operator::Min(args) => args.iter().all(|a| a.offset.is_rational()),
            Operator::Avg { .. } => true,
        })
    }
}

/// Evaluates one operator at an extended point.  +∞ absorbs through max,
/// average, and addition; min simply ignores +∞ arguments unless all are.
pub fn eval_operator(op: &Operator, x: &[ExtEps]) -> ExtEps {
    let arg_val = |a: &OpArg| -> ExtEps {
        x[a.var].add_ext(&Ext::Finite(a.offset.clone()))
    };
    match op {
        Operator::Max(args) => args.iter().map(arg_val).max().expect("nonempty args"),
        Operator::Min(args) => args.iter().map(arg_val).min().expect("nonempty args"),
        Operator::Avg { args, offset } => {
            let mut total = Rational::zero();
            for (w, _) in args {
                total += w;
            }
            let inv = total.recip().expect("positive weight sum");
            let mut acc = EpsNum::from_rational(offset.clone());
            for (w, v) in args {
                match &x[*v] {
                    Ext::PosInf => return Ext::PosInf,
                    Ext::Finite(val) => acc = acc + val.scale(&(w * &inv)),
                }
            }
            Ext::Finite(acc)
        }
    }
}

fn rel_for(strict: bool) -> Rel {
    if strict {
        Rel::Gt
    } else {
        Rel::Geq
    }
}

/// Row for `x_i ≺ x_j + k`, i.e. `x_j − x_i ≻ −k`.
fn primal_arg_row(n: usize, i: usize, arg: &OpArg, strict: bool) -> LinRow {
    let mut coeffs = vec![Rational::zero(); n];
    coeffs[arg.var] = &coeffs[arg.var] + &Rational::one();
    coeffs[i] = &coeffs[i] - &Rational::one();
    LinRow::new(coeffs, rel_for(strict), -arg.offset.clone())
}

/// Row for `y_i ≽ y_j + k`, i.e. `y_i − y_j ≻ k`.
fn dual_arg_row(n: usize, i: usize, arg: &OpArg, strict: bool) -> LinRow {
    let mut coeffs = vec![Rational::zero(); n];
    coeffs[i] = &coeffs[i] + &Rational::one();
    coeffs[arg.var] = &coeffs[arg.var] - &Rational::one();
    LinRow::new(coeffs, rel_for(strict), arg.offset.clone())
}

/// Row for `x_i ≺ (Σ α_l x_{j_l})/W + k`: `Σ α_l x_{j_l} − W·x_i ≻ −W·k`.
fn primal_avg_row(n: usize, i: usize, args: &[(Rational, usize)], offset: &Rational, strict: bool) -> LinRow {
    let mut coeffs = vec![Rational::zero(); n];
    let mut total = Rational::zero();
    for (w, v) in args {
        coeffs[*v] = &coeffs[*v] + w;
        total += w;
    }
    coeffs[i] = &coeffs[i] - &total;
    let bound = -(&total * offset);
    LinRow::new(coeffs, rel_for(strict), EpsNum::from_rational(bound))
}

/// Row for `y_i ≽ (Σ α_l y_{j_l})/W + k`: `W·y_i − Σ α_l y_{j_l} ≻ W·k`.
fn dual_avg_row(n: usize, i: usize, args: &[(Rational, usize)], offset: &Rational, strict: bool) -> LinRow {
    let mut coeffs = vec![Rational::zero(); n];
    let mut total = Rational::zero();
    for (w, v) in args {
        coeffs[*v] = &coeffs[*v] - w;
        total += w;
    }
    coeffs[i] = &coeffs[i] + &total;
    let bound = &total * offset;
    LinRow::new(coeffs, rel_for(strict), EpsNum::from_rational(bound))
}

/// Converts a feasible V-witness of `rows` into a rational point: when ε
/// parts are present, picks the concrete value t₀/2 where t₀ is the
/// largest parameter every row tolerates, and returns ā + (t₀/2)·b̄.
fn concretize_witness(rows: &LinSystem, witness: &[EpsNum]) -> Vec<Rational> {
    let a: Vec<Rational> = witness.iter().map(|w| w.std.clone()).collect();
    let b: Vec<Rational> = witness.iter().map(|w| w.eps.clone()).collect();
    if b.iter().all(Rational::is_zero) && rows.rows.iter().all(|r| r.bound.eps.is_zero()) {
        return a;
    }
    let mut t0 = Rational::one();
    for row in &rows.rows {
        // Row value at parameter t: (a·c − c_std) + t·(b·c − c_eps) ≻ 0.
        let mut a_part = -row.bound.std.clone();
        let mut b_part = -row.bound.eps.clone();
        for (j, c) in row.coeffs.iter().enumerate() {
            a_part += &(c * &a[j]);
            b_part += &(c * &b[j]);
        }
        if b_part.is_negative() {
            // Tolerates t up to a_part / (−b_part); a_part > 0 is implied
            // by validity of the V-witness.
            let cap = a_part.checked_div(&-b_part).expect("nonzero divisor");
            t0 = t0.min(cap);
        }
    }
    let t = t0.scale_half();
    a.into_iter().zip(b).map(|(av, bv)| av + (&bv * &t)).collect()
}

/// Searches for x ∈ ℚⁿ with `x ≺ ō(x)` (strict or not) by enumerating
/// which max-argument realizes each Max component.
pub fn solve_primal(o: &OperatorSystem, strict: bool, budgets: &Budgets) -> Result<Option<Vec<Rational>>> {
    let n = o.dim();
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let mut fixed: Vec<LinRow> = Vec::new();
    let mut choices: Vec<Vec<LinRow>> = Vec::new();
    for (i, op) in o.ops.iter().enumerate() {
        match op {
            Operator::Max(args) => {
                choices.push(args.iter().map(|a| primal_arg_row(n, i, a, strict)).collect());
            }
            Operator::Min(args) => {
                fixed.extend(args.iter().map(|a| primal_arg_row(n, i, a, strict)));
            }
            Operator::Avg { args, offset } => fixed.push(primal_avg_row(n, i, args, offset, strict)),
        }
    }
    let mut count: u128 = 1;
    for c in &choices {
        count = count.saturating_mul(c.len() as u128);
    }
    if count > budgets.selection_limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "max-argument selections in primal search".into(),
            needed: count,
            limit: budgets.selection_limit as u128,
        });
    }
    let mut counter = vec![0usize; choices.len()];
    loop {
        let mut sys = LinSystem::new(n);
        for row in &fixed {
            sys.push(row.clone());
        }
        for (ci, &pick) in counter.iter().enumerate() {
            sys.push(choices[ci][pick].clone());
        }
        if let LpResult::Feasible(w) = fm_feasible(&sys)? {
            return Ok(Some(concretize_witness(&sys, &w)));
        }
        let mut i = counter.len();
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < choices[i].len() {
                break;
            }
            counter[i] = 0;
        }
    }
}

/// A dual solution: finite components are ε-aware rationals, the rest +∞;
/// at least one component is finite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub y: Vec<ExtEps>,
}

impl DualCertificate {
    pub fn finite_support(&self) -> Vec<usize> {
        self.y
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for DualCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.y.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Searches for y with `y ≽ ō(y)` over the extended domain by enumerating
/// the nonempty sets of finite coordinates in ascending mask order.
///
/// Components outside the finite set hold automatically (+∞ dominates, and
/// the strict reading stipulates +∞ > +∞).  Inside the set, a Max or Avg
/// argument pointing outside makes the pattern impossible, while Min turns
/// into a disjunction over its inside arguments.
pub fn solve_dual(o: &OperatorSystem, strict: bool, budgets: &Budgets) -> Result<Option<DualCertificate>> {
    let n = o.dim();
    if n == 0 {
        return Ok(None);
    }
    let patterns = (1u128 << n) - 1;
    if patterns > budgets.pattern_limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "finite-support patterns in dual search".into(),
            needed: patterns,
            limit: budgets.pattern_limit as u128,
        });
    }
    'pattern: for mask in 1u64..(1u64 << n) {
        let in_f = |v: usize| mask >> v & 1 == 1;
        let mut fixed: Vec<LinRow> = Vec::new();
        let mut choices: Vec<Vec<LinRow>> = Vec::new();
        for (i, op) in o.ops.iter().enumerate() {
            if !in_f(i) {
                continue;
            }
            match op {
                Operator::Max(args) => {
                    if args.iter().any(|a| !in_f(a.var)) {
                        continue 'pattern; // y_i ≥ +∞ impossible
                    }
                    fixed.extend(args.iter().map(|a| dual_arg_row(n, i, a, strict)));
                }
                Operator::Min(args) => {
                    let inside: Vec<LinRow> = args
                        .iter()
                        .filter(|a| in_f(a.var))
                        .map(|a| dual_arg_row(n, i, a, strict))
                        .collect();
                    if inside.is_empty() {
                        continue 'pattern; // min over +∞ only
                    }
                    choices.push(inside);
                }
                Operator::Avg { args, offset } => {
                    if args.iter().any(|&(_, v)| !in_f(v)) {
                        continue 'pattern;
                    }
                    fixed.push(dual_avg_row(n, i, args, offset, strict));
                }
            }
        }
        let mut count: u128 = 1;
        for c in &choices {
            count = count.saturating_mul(c.len() as u128);
        }
        if count > budgets.selection_limit as u128 {
            return Err(Error::BudgetExceeded {
                what: "min-argument selections in dual search".into(),
                needed: count,
                limit: budgets.selection_limit as u128,
            });
        }
        let mut counter = vec![0usize; choices.len()];
        loop {
            let mut sys = LinSystem::new(n);
            for row in &fixed {
                sys.push(row.clone());
            }
            for (ci, &pick) in counter.iter().enumerate() {
                sys.push(choices[ci][pick].clone());
            }
            if let LpResult::Feasible(w) = fm_feasible(&sys)? {
                let y = (0..n)
                    .map(|v| if in_f(v) { Ext::Finite(w[v].clone()) } else { Ext::PosInf })
                    .collect();
                return Ok(Some(DualCertificate { y }));
            }
            let mut i = counter.len();
            let mut rolled_over = true;
            while i > 0 {
                i -= 1;
                counter[i] += 1;
                if counter[i] < choices[i].len() {
                    rolled_over = false;
                    break;
                }
                counter[i] = 0;
            }
            if rolled_over {
                break;
            }
        }
    }
    Ok(None)
}

/// Checks `y ≽ ō(y)` componentwise (with +∞ > +∞ under the strict
/// reading) and the not-all-+∞ side condition.
pub fn verify_dual_certificate(o: &OperatorSystem, cert: &DualCertificate, strict: bool) -> Result<bool> {
    if cert.y.len() != o.dim() {
        return Err(Error::DimensionMismatch(format!(
            "certificate has {} components, system has {}",
            cert.y.len(),
            o.dim()
        )));
    }
    if cert.y.iter().all(|v| !v.is_finite()) {
        return Ok(false);
    }
    for (i, op) in o.ops.iter().enumerate() {
        let val = eval_operator(op, &cert.y);
        let ok = if strict { cert.y[i].strict_gt(&val) } else { cert.y[i] >= val };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks `x ≺ ō(x)` componentwise for a rational point.
pub fn verify_primal_witness(o: &OperatorSystem, x: &[Rational], strict: bool) -> Result<bool> {
    if x.len() != o.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} components, system has {}",
            x.len(),
            o.dim()
        )));
    }
    let ext: Vec<ExtEps> = x
        .iter()
        .map(|v| Ext::Finite(EpsNum::from_rational(v.clone())))
        .collect();
    for (i, op) in o.ops.iter().enumerate() {
        let val = eval_operator(op, &ext);
        let ok = if strict { val.strict_gt(&ext[i]) } else { val >= ext[i] };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Results of running all four primal/dual solvers on one system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityReport {
    pub primal_strict: Option<Vec<Rational>>,
    pub dual_nonstrict: Option<DualCertificate>,
    pub primal_nonstrict: Option<Vec<Rational>>,
    pub dual_strict: Option<DualCertificate>,
}

/// Runs all four solvers and asserts both exactly-one laws:
/// primal-strict XOR dual-non-strict, and primal-non-strict XOR
/// dual-strict.  A violation is an internal-consistency error, never
/// ignored.
pub fn check_duality(o: &OperatorSystem, budgets: &Budgets) -> Result<DualityReport> {
    let report = DualityReport {
        primal_strict: solve_primal(o, true, budgets)?,
        dual_nonstrict: solve_dual(o, false, budgets)?,
        primal_nonstrict: solve_primal(o, false, budgets)?,
        dual_strict: solve_dual(o, true, budgets)?,
    };
    if report.primal_strict.is_some() == report.dual_nonstrict.is_some() {
        return Err(Error::InternalInconsistency(
            "strict primal and non-strict dual are not mutually exclusive-exhaustive".into(),
        ));
    }
    if report.primal_nonstrict.is_some() == report.dual_strict.is_some() {
        return Err(Error::InternalInconsistency(
            "non-strict primal and strict dual are not mutually exclusive-exhaustive".into(),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// The atom CSP
// ---------------------------------------------------------------------------

/// Atoms of the translation-invariant basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    /// x < y
    Lt(usize, usize),
    /// x ≤ y + 1
    TPlus(usize, usize),
    /// x ≤ y − 1
    TMinus(usize, usize),
    /// x ≤ (y + z)/2
    S3(usize, usize, usize),
    /// x ≤ max(y, z)
    M0(usize, usize, usize),
}

/// A conjunction of atoms over named variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CspInstance {
    pub var_names: Vec<String>,
    pub atoms: Vec<Atom>,
}

impl CspInstance {
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    /// Parses the one-atom-per-line format `LT(x,y)`, `T+1(x,y)`,
    /// `T-1(x,y)`, `S3(x,y,z)`, `M0(x,y,z)`; `#` comments allowed.
    pub fn parse(text: &str) -> Result<CspInstance> {
        let mut vars: HashMap<String, usize> = HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut atoms = Vec::new();
        for (li, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str, col: usize| Error::Parse { line: li + 1, col, msg: msg.into() };
            let open = line.find('(').ok_or_else(|| err("expected `(` after atom name", line.len()))?;
            if !line.ends_with(')') {
                return Err(err("expected closing `)`", line.len()));
            }
            let head = line[..open].trim();
            let body = &line[open + 1..line.len() - 1];
            let mut ids: Vec<usize> = Vec::new();
            for part in body.split(',') {
                let name = part.trim();
                if name.is_empty()
                    || !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
                {
                    return Err(err("expected variable name", open + 2));
                }
                let id = match vars.get(name) {
                    Some(&i) => i,
                    None => {
                        let i = names.len();
                        names.push(name.to_string());
                        vars.insert(name.to_string(), i);
                        i
                    }
                };
                ids.push(id);
            }
            let atom = match (head, ids.len()) {
                ("LT", 2) => Atom::Lt(ids[0], ids[1]),
                ("T+1", 2) => Atom::TPlus(ids[0], ids[1]),
                ("T-1", 2) => Atom::TMinus(ids[0], ids[1]),
                ("S3", 3) => Atom::S3(ids[0], ids[1], ids[2]),
                ("M0", 3) => Atom::M0(ids[0], ids[1], ids[2]),
                _ => return Err(err("unknown atom or wrong arity", 1)),
            };
            atoms.push(atom);
        }
        Ok(CspInstance { var_names: names, atoms })
    }

    /// Exact evaluation of every atom at a rational point.
    pub fn eval(&self, x: &[Rational]) -> Result<bool> {
        if x.len() != self.num_vars() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, instance has {} variables",
                x.len(),
                self.num_vars()
            )));
        }
        Ok(self.atoms.iter().all(|a| match *a {
            Atom::Lt(p, q) => x[p] < x[q],
            Atom::TPlus(p, q) => x[p] <= &x[q] + &Rational::one(),
            Atom::TMinus(p, q) => &x[p] + &Rational::one() <= x[q],
            Atom::S3(p, q, r) => &x[p] + &x[p] <= &x[q] + &x[r],
            Atom::M0(p, q, r) => x[p] <= x[q] || x[p] <= x[r],
        }))
    }
}

impl fmt::Display for CspInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = |v: usize| self.var_names[v].as_str();
        for atom in &self.atoms {
            match *atom {
                Atom::Lt(p, q) => writeln!(f, "LT({},{})", n(p), n(q))?,
                Atom::TPlus(p, q) => writeln!(f, "T+1({},{})", n(p), n(q))?,
                Atom::TMinus(p, q) => writeln!(f, "T-1({},{})", n(p), n(q))?,
                Atom::S3(p, q, r) => writeln!(f, "S3({},{},{})", n(p), n(q), n(r))?,
                Atom::M0(p, q, r) => writeln!(f, "M0({},{},{})", n(p), n(q), n(r))?,
            }
        }
        Ok(())
    }
}

/// The atoms as a clausal formula (LT strict, M0 a 2-literal clause).
pub fn atom_formula(inst: &CspInstance) -> Formula {
    let one = Rational::one;
    let lit = |terms: Vec<(usize, Rational)>, rel: InputRel, bound: Rational| Literal::new(terms, rel, bound);
    let clauses = inst
        .atoms
        .iter()
        .map(|a| match *a {
            Atom::Lt(p, q) => Clause::new(vec![lit(vec![(q, one()), (p, -one())], InputRel::Gt, Rational::zero())]),
            Atom::TPlus(p, q) => {
                Clause::new(vec![lit(vec![(q, one()), (p, -one())], InputRel::Geq, Rational::from_int(-1))])
            }
            Atom::TMinus(p, q) => {
                Clause::new(vec![lit(vec![(q, one()), (p, -one())], InputRel::Geq, one())])
            }
            Atom::S3(p, q, r) => Clause::new(vec![lit(
                vec![(q, one()), (r, one()), (p, Rational::from_int(-2))],
                InputRel::Geq,
                Rational::zero(),
            )]),
            Atom::M0(p, q, r) => Clause::new(vec![
                lit(vec![(q, one()), (p, -one())], InputRel::Geq, Rational::zero()),
                lit(vec![(r, one()), (p, -one())], InputRel::Geq, Rational::zero()),
            ]),
        })
        .collect();
    Formula { var_names: inst.var_names.clone(), clauses }
}

/// An operator system together with display names; CSP translation adds
/// fresh copy variables `x.1, x.2, …` beyond the original ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedOperatorSystem {
    pub system: OperatorSystem,
    pub var_names: Vec<String>,
    /// Number of leading components that are original CSP variables.
    pub original_vars: usize,
}

/// Rewrites atoms as `x ≤ op` constraints, one operator per component:
/// `LT` gets a −ε offset, variables constrained several times are split
/// into fresh copies tied by a Min, and unconstrained variables get the
/// vacuous `x ≤ max(x + 1)`.
pub fn csp_to_operator_system(inst: &CspInstance) -> NamedOperatorSystem {
    let n = inst.num_vars();
    let minus_eps = || -EpsNum::eps_unit();
    let one = || EpsNum::from_rational(Rational::one());
    let minus_one = || EpsNum::from_rational(Rational::from_int(-1));
    // Per left-hand variable, the operators constraining it, in atom order.
    let mut constraints: Vec<Vec<Operator>> = vec![Vec::new(); n];
    for atom in &inst.atoms {
        let (lhs, op) = match *atom {
            Atom::Lt(p, q) => (p, Operator::Max(vec![OpArg::new(q, minus_eps())])),
            Atom::TPlus(p, q) => (p, Operator::Max(vec![OpArg::new(q, one())])),
            Atom::TMinus(p, q) => (p, Operator::Max(vec![OpArg::new(q, minus_one())])),
            Atom::S3(p, q, r) => (
                p,
                Operator::Avg {
                    args: vec![(Rational::one(), q), (Rational::one(), r)],
                    offset: Rational::zero(),
                },
            ),
            Atom::M0(p, q, r) => (p, Operator::Max(vec![OpArg::plain(q), OpArg::plain(r)])),
        };
        constraints[lhs].push(op);
    }
    let mut ops: Vec<Option<Operator>> = vec![None; n];
    let mut names: Vec<String> = inst.var_names.clone();
    let mut extra: Vec<Operator> = Vec::new();
    for (v, cons) in constraints.into_iter().enumerate() {
        match cons.len() {
            0 => ops[v] = Some(Operator::Max(vec![OpArg::new(v, one())])),
            1 => ops[v] = Some(cons.into_iter().next().expect("one constraint")),
            _ => {
                let mut copies = Vec::new();
                for (k, op) in cons.into_iter().enumerate() {
                    let idx = n + extra.len();
                    names.push(format!("{}.{}", inst.var_names[v], k + 1));
                    extra.push(op);
                    copies.push(OpArg::plain(idx));
                }
                ops[v] = Some(Operator::Min(copies));
            }
        }
    }
    let mut all: Vec<Operator> = ops.into_iter().map(|o| o.expect("assigned")).collect();
    all.extend(extra);
    let system = OperatorSystem::new(all).expect("translation produces a valid system");
    NamedOperatorSystem { system, var_names: names, original_vars: n }
}

/// Outcome of the atom-CSP decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CspOutcome {
    Sat(Vec<Rational>),
    /// Dual certificate for the ε-rewritten operator system (including the
    /// copy variables appended by the translation).
    Unsat(DualCertificate),
}

impl CspOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, CspOutcome::Sat(_))
    }
}

/// Decides an atom CSP, returning a rational witness or a dual certificate
/// over V for the ε-rewritten system.  Both routes are always executed and
/// must disagree in the exclusive-or sense; anything else is reported as
/// an internal inconsistency.
pub fn solve_csp(inst: &CspInstance, budgets: &Budgets) -> Result<CspOutcome> {
    let phi = atom_formula(inst);
    let primal = brute_force_sat(&phi, budgets)?;
    let named = csp_to_operator_system(inst);
    let dual = solve_dual(&named.system, true, budgets)?;
    match (primal, dual) {
        (SolveResult::Sat(w), None) => {
            if !inst.eval(&w)? {
                return Err(Error::InternalInconsistency(
                    "witness from the selection search fails direct atom evaluation".into(),
                ));
            }
            Ok(CspOutcome::Sat(w))
        }
        (SolveResult::Unsat(_), Some(cert)) => {
            if !verify_dual_certificate(&named.system, &cert, true)? {
                return Err(Error::InternalInconsistency(
                    "dual certificate fails verification".into(),
                ));
            }
            Ok(CspOutcome::Unsat(cert))
        }
        (SolveResult::Sat(_), Some(_)) => Err(Error::InternalInconsistency(
            "both a witness and a dual certificate were found".into(),
        )),
        (SolveResult::Unsat(_), None) => Err(Error::InternalInconsistency(
            "neither a witness nor a dual certificate was found".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Satisfiability for all small positive parameters
// ---------------------------------------------------------------------------

/// Witness that a parameterized formula holds for every parameter value
/// t ∈ (0, t₀]: the solution moves affinely, x(t) = a + t·b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroPlusWitness {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
    /// Every t in (0, threshold] works; `sample` picks threshold/2.
    pub threshold: Rational,
    pub t_var: usize,
}

impl ZeroPlusWitness {
    /// A concrete parameter value with margin to spare.
    pub fn sample(&self) -> Rational {
        self.threshold.scale_half()
    }

    /// The full variable assignment at parameter value `t` (the parameter
    /// coordinate itself carries `t`).
    pub fn point(&self, t: &Rational) -> Vec<Rational> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(av, bv)| av + &(bv * t))
            .collect()
    }
}

/// Decides whether `phi` is satisfiable for all sufficiently small
/// positive values of its distinguished parameter variable, by deciding it
/// at the formal infinitesimal: each variable splits into a standard and
/// an ε part, and a literal holds iff its standard part exceeds the bound
/// or ties it with the ε part breaking the tie.
pub fn sat_in_zero_plus(phi: &Formula, t_var: usize, budgets: &Budgets) -> Result<Option<ZeroPlusWitness>> {
    let n = phi.num_vars();
    if t_var >= n {
        return Err(Error::InvalidInput(format!(
            "parameter variable index {t_var} out of range for {n} variables"
        )));
    }
    // Doubled space: a_v at v, b_v at n+v.
    let dim = 2 * n;
    let mut fixed = LinSystem::new(dim);
    let pin = |var: usize, value: i64| -> [LinRow; 2] {
        let mut up = vec![Rational::zero(); dim];
        up[var] = Rational::one();
        let mut down = vec![Rational::zero(); dim];
        down[var] = Rational::from_int(-1);
        [
            LinRow::new(up, Rel::Geq, EpsNum::from_rational(Rational::from_int(value))),
            LinRow::new(down, Rel::Geq, EpsNum::from_rational(Rational::from_int(-value))),
        ]
    };
    for row in pin(t_var, 0) {
        fixed.push(row); // a_t = 0
    }
    for row in pin(n + t_var, 1) {
        fixed.push(row); // b_t = 1
    }

    // Branch packets per literal: either std > bound, or std = bound with
    // the ε part respecting the literal's own relation.
    #[derive(Clone)]
    struct Branch {
        rows: Vec<LinRow>,
        clause: usize,
        literal: usize,
        tie: bool,
    }
    let mut options: Vec<Vec<Branch>> = Vec::new();
    for (ci, clause) in phi.clauses.iter().enumerate() {
        let mut branches = Vec::new();
        for (li, lit) in clause.literals.iter().enumerate() {
            let mut std_coeffs = vec![Rational::zero(); dim];
            let mut eps_coeffs = vec![Rational::zero(); dim];
            for (&v, c) in lit.coeffs() {
                std_coeffs[v] = c.clone();
                eps_coeffs[n + v] = c.clone();
            }
            let bound = EpsNum::from_rational(lit.bound.clone());
            branches.push(Branch {
                rows: vec![LinRow::new(std_coeffs.clone(), Rel::Gt, bound.clone())],
                clause: ci,
                literal: li,
                tie: false,
            });
            let eq_up = LinRow::new(std_coeffs.clone(), Rel::Geq, bound.clone());
            let eq_down = LinRow::new(
                std_coeffs.iter().map(|c| -c).collect(),
                Rel::Geq,
                -bound.clone(),
            );
            let eps_row = LinRow::new(eps_coeffs, lit.rel, EpsNum::zero());
            branches.push(Branch { rows: vec![eq_up, eq_down, eps_row], clause: ci, literal: li, tie: true });
        }
        if branches.is_empty() {
            return Ok(None); // an empty clause cannot be satisfied
        }
        options.push(branches);
    }
    let mut count: u128 = 1;
    for o in &options {
        count = count.saturating_mul(o.len() as u128);
    }
    if count > budgets.selection_limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "branch selections in small-parameter search".into(),
            needed: count,
            limit: budgets.selection_limit as u128,
        });
    }
    let mut counter = vec![0usize; options.len()];
    loop {
        let mut sys = fixed.clone();
        let mut picked: Vec<&Branch> = Vec::new();
        for (ci, &pick) in counter.iter().enumerate() {
            let branch = &options[ci][pick];
            for row in &branch.rows {
                sys.push(row.clone());
            }
            picked.push(branch);
        }
        if let LpResult::Feasible(w) = fm_feasible(&sys)? {
            let vals: Vec<Rational> = w
                .iter()
                .map(|v| {
                    debug_assert!(v.eps.is_zero(), "doubled system is purely rational");
                    v.std.clone()
                })
                .collect();
            let a = vals[..n].to_vec();
            let b = vals[n..].to_vec();
            // Largest t tolerated by every selected literal: the literal
            // value is A + t·B with A ≻ 0 (or A = 0 tie); only branches
            // with decreasing value (B < 0) cap t.
            let mut threshold = Rational::one();
            for branch in &picked {
                if branch.tie {
                    continue; // value t·B with B ≽ 0: no cap
                }
                let lit = &phi.clauses[branch.clause].literals[branch.literal];
                let mut a_part = -lit.bound.clone();
                let mut b_part = Rational::zero();
                for (&v, c) in lit.coeffs() {
                    a_part += &(c * &a[v]);
                    b_part += &(c * &b[v]);
                }
                if b_part.is_negative() {
                    let cap = a_part.checked_div(&-b_part).expect("nonzero divisor");
                    threshold = threshold.min(cap);
                }
            }
            let witness = ZeroPlusWitness { a, b, threshold, t_var };
            debug_assert!(phi.eval(&witness.point(&witness.sample())).unwrap_or(false));
            return Ok(Some(witness));
        }
        let mut i = counter.len();
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < options[i].len() {
                break;
            }
            counter[i] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Operator-system text format
// ---------------------------------------------------------------------------

impl NamedOperatorSystem {
    /// Parses the one-component-per-line format:
    /// `x1 := max(x2 + 1, x3 - 2)`, `x2 := min(x1, x3 + 1/2)`,
    /// `x3 := avg(2: x1, 1: x2) + 1/3`; ε offsets as `+ eps`/`- eps`
    /// or scaled `3/2*eps`.
    pub fn parse(text: &str) -> Result<NamedOperatorSystem> {
        struct Pending {
            kind: u8, // 0 = max, 1 = min, 2 = avg
            max_args: Vec<(String, EpsNum)>,
            avg_args: Vec<(Rational, String)>,
            avg_offset: Rational,
            line: usize,
        }
        let mut pendings: Vec<(String, Pending)> = Vec::new();
        for (li, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: li + 1, col: 1, msg: msg.into() };
            let (lhs, rhs) = line.split_once(":=").ok_or_else(|| err("expected `:=`"))?;
            let lhs = lhs.trim().to_string();
            if lhs.is_empty() {
                return Err(err("missing component name"));
            }
            let rhs = rhs.trim();
            let (kind, rest) = if let Some(r) = rhs.strip_prefix("max") {
                (0u8, r)
            } else if let Some(r) = rhs.strip_prefix("min") {
                (1u8, r)
            } else if let Some(r) = rhs.strip_prefix("avg") {
                (2u8, r)
            } else {
                return Err(err("expected max(...), min(...), or avg(...)"));
            };
            let rest = rest.trim_start();
            let Some(body_and_tail) = rest.strip_prefix('(') else {
                return Err(err("expected `(`"));
            };
            let Some(close) = body_and_tail.find(')') else {
                return Err(err("expected `)`"));
            };
            let body = &body_and_tail[..close];
            let tail = body_and_tail[close + 1..].trim();
            let mut pending = Pending {
                kind,
                max_args: Vec::new(),
                avg_args: Vec::new(),
                avg_offset: Rational::zero(),
                line: li + 1,
            };
            for part in body.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    return Err(err("empty argument"));
                }
                if kind == 2 {
                    let (w, v) = part.split_once(':').ok_or_else(|| err("expected `weight: var`"))?;
                    let weight: Rational =
                        w.trim().parse().map_err(|_| err("invalid weight"))?;
                    pending.avg_args.push((weight, v.trim().to_string()));
                } else {
                    let (name, offset) = parse_offset_expr(part).map_err(|msg| err(&msg))?;
                    pending.max_args.push((name, offset));
                }
            }
            if kind == 2 {
                if !tail.is_empty() {
                    let offset = parse_signed_offset(tail).map_err(|msg| err(&msg))?;
                    if !offset.eps.is_zero() {
                        return Err(err("average offsets must be rational (no eps)"));
                    }
                    pending.avg_offset = offset.std;
                }
            } else if !tail.is_empty() {
                return Err(err("unexpected text after `)`"));
            }
            pendings.push((lhs, pending));
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, (name, p)) in pendings.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Parse {
                    line: p.line,
                    col: 1,
                    msg: format!("component `{name}` defined twice"),
                });
            }
        }
        let resolve = |name: &str, line: usize| -> Result<usize> {
            index.get(name).copied().ok_or_else(|| Error::Parse {
                line,
                col: 1,
                msg: format!("variable `{name}` has no component definition"),
            })
        };
        let mut ops = Vec::new();
        let mut names = Vec::new();
        for (name, p) in &pendings {
            names.push(name.clone());
            let op = match p.kind {
                2 => {
                    let mut args = Vec::new();
                    for (w, v) in &p.avg_args {
                        args.push((w.clone(), resolve(v, p.line)?));
                    }
                    Operator::Avg { args, offset: p.avg_offset.clone() }
                }
                k => {
                    let mut args = Vec::new();
                    for (v, off) in &p.max_args {
                        args.push(OpArg::new(resolve(v, p.line)?, off.clone()));
                    }
                    if k == 0 {
                        Operator::Max(args)
                    } else {
                        Operator::Min(args)
                    }
                }
            };
            ops.push(op);
        }
        let system = OperatorSystem::new(ops)?;
        let original_vars = names.len();
        Ok(NamedOperatorSystem { system, var_names: names, original_vars })
    }
}

/// Parses `var (± term)*` where a term is a rational, `eps`, or
/// `rational*eps`.  Returns the variable name and accumulated offset.
fn parse_offset_expr(text: &str) -> std::result::Result<(String, EpsNum), String> {
    let mut it = text.split_whitespace().peekable();
    let name = it.next().ok_or("expected variable name")?.to_string();
    if !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
        return Err(format!("invalid variable name `{name}`"));
    }
    let mut offset = EpsNum::zero();
    while let Some(&sign) = it.peek() {
        let negative = match sign {
            "+" => false,
            "-" => true,
            other => return Err(format!("expected `+` or `-`, found `{other}`")),
        };
        it.next();
        let term = it.next().ok_or("expected term after sign")?;
        let parsed = parse_offset_term(term)?;
        offset = if negative { offset - parsed } else { offset + parsed };
    }
    Ok((name, offset))
}

/// Parses a signed offset like `+ 1/3`, `- 2`, `+ eps`.
fn parse_signed_offset(text: &str) -> std::result::Result<EpsNum, String> {
    let mut it = text.split_whitespace();
    let mut offset = EpsNum::zero();
    loop {
        let Some(sign) = it.next() else { return Ok(offset) };
        let negative = match sign {
            "+" => false,
            "-" => true,
            other => return Err(format!("expected `+` or `-`, found `{other}`")),
        };
        let term = it.next().ok_or("expected term after sign")?;
        let parsed = parse_offset_term(term)?;
        offset = if negative { offset - parsed } else { offset + parsed };
    }
}

fn parse_offset_term(term: &str) -> std::result::Result<EpsNum, String> {
    if term == "eps" {
        return Ok(EpsNum::eps_unit());
    }
    if let Some(scale) = term.strip_suffix("*eps") {
        let s: Rational = scale.parse().map_err(|_| format!("invalid eps scale `{scale}`"))?;
        return Ok(EpsNum::new(Rational::zero(), s));
    }
    let r: Rational = term.parse().map_err(|_| format!("invalid offset `{term}`"))?;
    Ok(EpsNum::from_rational(r))
}

fn write_offset(f: &mut fmt::Formatter<'_>, offset: &EpsNum) -> fmt::Result {
    if !offset.std.is_zero() {
        if offset.std.is_negative() {
            write!(f, " - {}", offset.std.abs())?;
        } else {
            write!(f, " + {}", offset.std)?;
        }
    }
    if !offset.eps.is_zero() {
        let mag = offset.eps.abs();
        let sign = if offset.eps.is_negative() { "-" } else { "+" };
        if mag == Rational::one() {
            write!(f, " {sign} eps")?;
        } else {
            write!(f, " {sign} {mag}*eps")?;
        }
    }
    Ok(())
}

impl fmt::Display for NamedOperatorSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, op) in self.system.ops.iter().enumerate() {
            write!(f, "{} := ", self.var_names[i])?;
            match op {
                Operator::Max(args) | Operator::Min(args) => {
                    write!(f, "{}(", if matches!(op, Operator::Max(_)) { "max" } else { "min" })?;
                    for (k, a) in args.iter().enumerate() {
                        if k > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}", self.var_names[a.var])?;
                        write_offset(f, &a.offset)?;
                    }
                    writeln!(f, ")")?;
                }
                Operator::Avg { args, offset } => {
                    write!(f, "avg(")?;
                    for (k, (w, v)) in args.iter().enumerate() {
                        if k > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}: {}", w, self.var_names[*v])?;
                    }
                    write!(f, ")")?;
                    if !offset.is_zero() {
                        write_offset(f, &EpsNum::from_rational(offset.clone()))?;
                    }
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(p: i64) -> Rational {
        Rational::from_int(p)
    }

    fn feps(p: i64) -> ExtEps {
        Ext::Finite(EpsNum::from_rational(r(p)))
    }

    fn max1(var: usize, k: i64) -> Operator {
        Operator::Max(vec![OpArg::new(var, EpsNum::from_rational(r(k)))])
    }

    fn sys(ops: Vec<Operator>) -> OperatorSystem {
        OperatorSystem::new(ops).unwrap()
    }

    #[test]
    fn eval_operator_cases() {
        assert_eq!(eval_operator(&max1(0, 1), &[feps(0)]), feps(1));
        let min = Operator::Min(vec![OpArg::plain(0), OpArg::plain(1)]);
        assert_eq!(eval_operator(&min, &[Ext::PosInf, feps(3)]), feps(3));
        assert_eq!(eval_operator(&min, &[Ext::PosInf, Ext::PosInf]), Ext::PosInf);
        let avg = Operator::Avg { args: vec![(r(2), 0), (r(1), 1)], offset: r(1) };
        assert_eq!(eval_operator(&avg, &[feps(0), feps(3)]), feps(2));
        assert_eq!(eval_operator(&avg, &[Ext::PosInf, feps(3)]), Ext::PosInf);
        let max = Operator::Max(vec![OpArg::plain(0), OpArg::plain(1)]);
        assert_eq!(eval_operator(&max, &[Ext::PosInf, feps(3)]), Ext::PosInf);
    }

    #[test]
    fn primal_self_loop_cases() {
        let budgets = Budgets::default();
        // x < x + 1 holds everywhere; the solver picks 0.
        let plus = sys(vec![max1(0, 1)]);
        assert_eq!(solve_primal(&plus, true, &budgets).unwrap(), Some(vec![r(0)]));
        // x < x − 1 never holds.
        let minus = sys(vec![max1(0, -1)]);
        assert_eq!(solve_primal(&minus, true, &budgets).unwrap(), None);
        // x < x fails, x ≤ x holds.
        let zero = sys(vec![max1(0, 0)]);
        assert_eq!(solve_primal(&zero, true, &budgets).unwrap(), None);
        assert_eq!(solve_primal(&zero, false, &budgets).unwrap(), Some(vec![r(0)]));
    }

    #[test]
    fn primal_two_avg_cycle_is_infeasible() {
        let budgets = Budgets::default();
        let o = sys(vec![
            Operator::Avg { args: vec![(r(1), 1)], offset: r(-1) },
            Operator::Avg { args: vec![(r(1), 0)], offset: r(0) },
        ]);
        assert_eq!(solve_primal(&o, true, &budgets).unwrap(), None);
        // Non-strict dual: frozen first-found certificate.
        let cert = solve_dual(&o, false, &budgets).unwrap().unwrap();
        assert_eq!(cert.y, vec![Ext::Finite(EpsNum::new(Rational::new(-1, 2).unwrap(), r(0))), feps(0)]);
        assert!(verify_dual_certificate(&o, &cert, false).unwrap());
    }

    #[test]
    fn dual_self_loop_cases() {
        let budgets = Budgets::default();
        // y ≥ y − 1 holds at y = 0.
        let minus = sys(vec![max1(0, -1)]);
        let cert = solve_dual(&minus, false, &budgets).unwrap().unwrap();
        assert_eq!(cert.y, vec![feps(0)]);
        // y ≥ y + 1 has no solution; all-+∞ is excluded.
        let plus = sys(vec![max1(0, 1)]);
        assert_eq!(solve_dual(&plus, false, &budgets).unwrap(), None);
        // strict: y > y − 1 holds at 0.
        let strict_cert = solve_dual(&minus, true, &budgets).unwrap().unwrap();
        assert!(verify_dual_certificate(&minus, &strict_cert, true).unwrap());
    }

    #[test]
    fn duality_report_on_boundary_case() {
        let budgets = Budgets::default();
        let zero = sys(vec![max1(0, 0)]);
        let report = check_duality(&zero, &budgets).unwrap();
        assert!(report.primal_strict.is_none());
        assert!(report.dual_nonstrict.is_some());
        assert!(report.primal_nonstrict.is_some());
        assert!(report.dual_strict.is_none());
    }

    #[test]
    fn dual_rejects_patterns_with_outside_references() {
        let budgets = Budgets::default();
        // y1 ≥ y2 + 1 ∧ y2 ≥ y1 + 1 has no finite solution; y1 = +∞ alone
        // fails Max's outside-reference rule, and so does y2 = +∞.
        let o = sys(vec![max1(1, 1), max1(0, 1)]);
        assert_eq!(solve_dual(&o, false, &budgets).unwrap(), None);
        // Min tolerates outside references: y1 ≥ min(y1 − 1, y2 + 5).
        let o2 = sys(vec![
            Operator::Min(vec![OpArg::new(0, EpsNum::from_rational(r(-1))), OpArg::new(1, EpsNum::from_rational(r(5)))]),
            max1(1, 1),
        ]);
        let cert = solve_dual(&o2, false, &budgets).unwrap().unwrap();
        assert_eq!(cert.y, vec![feps(0), Ext::PosInf]);
        assert!(verify_dual_certificate(&o2, &cert, false).unwrap());
    }

    #[test]
    fn certificate_validity_is_checked() {
        let o = sys(vec![max1(0, 1)]);
        let bad = DualCertificate { y: vec![feps(0)] };
        assert!(!verify_dual_certificate(&o, &bad, false).unwrap());
        let all_inf = DualCertificate { y: vec![Ext::PosInf] };
        assert!(!verify_dual_certificate(&o, &all_inf, false).unwrap());
        let good = sys(vec![max1(0, -1)]);
        assert!(verify_dual_certificate(&good, &DualCertificate { y: vec![feps(0)] }, false).unwrap());
        assert!(verify_dual_certificate(&good, &DualCertificate { y: vec![feps(5)] }, true).unwrap());
        // Dimension mismatch is an error, not `false`.
        assert!(verify_dual_certificate(&o, &DualCertificate { y: vec![] }, false).is_err());
    }

    #[test]
    fn csp_parse_display_roundtrip() {
        let text = "LT(x,y)\nT+1(x,y)\nT-1(y,x)\nS3(x,y,z)\nM0(z,x,y)\n";
        let inst = CspInstance::parse(text).unwrap();
        assert_eq!(inst.var_names, vec!["x", "y", "z"]);
        assert_eq!(inst.to_string(), text);
        assert!(CspInstance::parse("LT(x)\n").is_err());
        assert!(CspInstance::parse("XX(x,y)\n").is_err());
    }

    #[test]
    fn atom_formula_matches_atom_semantics() {
        let inst = CspInstance::parse("LT(x,y)\nS3(x,y,z)\nM0(z,x,y)\n").unwrap();
        let phi = atom_formula(&inst);
        for point in [[r(0), r(1), r(0)], [r(0), r(0), r(0)], [r(-2), r(3), r(1)]] {
            assert_eq!(inst.eval(&point).unwrap(), phi.eval(&point).unwrap());
        }
    }

    #[test]
    fn translation_examples() {
        // Single constraint per variable, plus a vacuous component.
        let inst = CspInstance::parse("T+1(x,y)\n").unwrap();
        let named = csp_to_operator_system(&inst);
        assert_eq!(named.system.ops.len(), 2);
        assert_eq!(named.system.ops[0], max1(1, 1));
        assert_eq!(named.system.ops[1], Operator::Max(vec![OpArg::new(1, EpsNum::from_rational(r(1)))]));

        // Duplicated left-hand side splits into copies tied by Min.
        let inst = CspInstance::parse("LT(x,y)\nLT(x,z)\n").unwrap();
        let named = csp_to_operator_system(&inst);
        assert_eq!(named.var_names, vec!["x", "y", "z", "x.1", "x.2"]);
        assert_eq!(named.system.ops[0], Operator::Min(vec![OpArg::plain(3), OpArg::plain(4)]));
        assert_eq!(named.system.ops[3], Operator::Max(vec![OpArg::new(1, -EpsNum::eps_unit())]));
        assert_eq!(named.system.ops[4], Operator::Max(vec![OpArg::new(2, -EpsNum::eps_unit())]));
    }

    #[test]
    fn solve_csp_sat_example() {
        let inst = CspInstance::parse("T+1(x,y)\n").unwrap();
        let CspOutcome::Sat(w) = solve_csp(&inst, &Budgets::default()).unwrap() else {
            panic!("expected Sat");
        };
        assert_eq!(w, vec![r(0), r(0)]);
    }

    #[test]
    fn solve_csp_unsat_examples() {
        let budgets = Budgets::default();
        // x ≤ max(y,z) with y,z ≤ x − 1 forces x ≤ x − 1.
        let inst = CspInstance::parse("M0(x,y,z)\nT-1(y,x)\nT-1(z,x)\n").unwrap();
        let CspOutcome::Unsat(cert) = solve_csp(&inst, &budgets).unwrap() else {
            panic!("expected Unsat");
        };
        let named = csp_to_operator_system(&inst);
        assert!(verify_dual_certificate(&named.system, &cert, true).unwrap());
        assert!(!cert.y.iter().all(|v| !v.is_finite()));

        // Strict two-cycle.
        let cyc = CspInstance::parse("LT(x,y)\nLT(y,x)\n").unwrap();
        assert!(!solve_csp(&cyc, &budgets).unwrap().is_sat());
    }

    #[test]
    fn csp_witnesses_translate() {
        let inst = CspInstance::parse("LT(x,y)\nS3(z,x,y)\nM0(z,x,y)\n").unwrap();
        let CspOutcome::Sat(w) = solve_csp(&inst, &Budgets::default()).unwrap() else {
            panic!("expected Sat");
        };
        for c in [r(-7), Rational::new(1, 3).unwrap(), r(10)] {
            let shifted: Vec<Rational> = w.iter().map(|v| v + &c).collect();
            assert!(inst.eval(&shifted).unwrap());
        }
    }

    #[test]
    fn zero_plus_examples() {
        let budgets = Budgets::default();
        // t > 0 ∧ x ≥ t: satisfiable for all small t.
        let phi = Formula::parse("t > 0\nx - t >= 0\n").unwrap();
        let w = sat_in_zero_plus(&phi, 0, &budgets).unwrap().unwrap();
        let point = w.point(&w.sample());
        assert!(phi.eval(&point).unwrap());
        assert!(w.sample().is_positive());

        // t ≥ 1/2 fails for small t.
        let phi = Formula::parse("t >= 1/2\n").unwrap();
        assert!(sat_in_zero_plus(&phi, 0, &budgets).unwrap().is_none());

        // x ≥ 1 ∧ x ≤ 1 − t: the interval empties for every positive t.
        let phi = Formula::parse("x >= 1\nx + t <= 1\n").unwrap();
        assert!(sat_in_zero_plus(&phi, 1, &budgets).unwrap().is_none());
    }

    #[test]
    fn zero_plus_threshold_instantiates() {
        // x ≥ 1 ∧ x + t ≤ 2: works up to t = 1 at x = 1.
        let phi = Formula::parse("x >= 1\nx + t <= 2\n").unwrap();
        let w = sat_in_zero_plus(&phi, 1, &Budgets::default()).unwrap().unwrap();
        assert!(phi.eval(&w.point(&w.sample())).unwrap());
        assert!(phi.eval(&w.point(&w.threshold)).unwrap());
    }

    #[test]
    fn operator_system_parse_display_roundtrip() {
        let text = "x1 := max(x2 + 1, x3 - 2)\nx2 := min(x1, x3 + 1/2)\nx3 := avg(2: x1, 1: x2) + 1/3\n";
        let named = NamedOperatorSystem::parse(text).unwrap();
        assert_eq!(named.to_string(), text);
        assert_eq!(named.var_names, vec!["x1", "x2", "x3"]);
        let eps_text = "x1 := max(x2 - eps)\nx2 := max(x1 + 1 + 3/2*eps)\n";
        let named = NamedOperatorSystem::parse(eps_text).unwrap();
        assert_eq!(named.to_string(), eps_text);
        assert!(NamedOperatorSystem::parse("x1 := max(y + 1)\n").is_err());
        assert!(NamedOperatorSystem::parse("x1 := avg(0: x1)\n").is_err());
        assert!(NamedOperatorSystem::parse("x1 := max(x1)\nx1 := max(x1)\n").is_err());
    }

    fn arb_operator(n: usize) -> impl Strategy<Value = Operator> {
        let arg = (0..n, -3i64..=3).prop_map(|(v, k)| OpArg::new(v, EpsNum::from_rational(r(k))));
        let avg_arg = (1i64..=3, 0..n).prop_map(|(w, v)| (r(w), v));
        prop_oneof![
            proptest::collection::vec(arg.clone(), 1..=3).prop_map(Operator::Max),
            proptest::collection::vec(arg, 1..=3).prop_map(Operator::Min),
            (proptest::collection::vec(avg_arg, 1..=3), -3i64..=3)
                .prop_map(|(args, k)| Operator::Avg { args, offset: r(k) }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn duality_exactly_one(ops in proptest::collection::vec(arb_operator(3), 3)) {
            let o = sys(ops);
            let report = check_duality(&o, &Budgets::default()).unwrap();
            if let Some(x) = &report.primal_strict {
                prop_assert!(verify_primal_witness(&o, x, true).unwrap());
            }
            if let Some(x) = &report.primal_nonstrict {
                prop_assert!(verify_primal_witness(&o, x, false).unwrap());
            }
            if let Some(c) = &report.dual_nonstrict {
                prop_assert!(verify_dual_certificate(&o, c, false).unwrap());
            }
            if let Some(c) = &report.dual_strict {
                prop_assert!(verify_dual_certificate(&o, c, true).unwrap());
            }
        }
    }
}
