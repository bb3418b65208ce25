//! Clausal linear formulas: disjunctions of linear inequalities over ℚ.
//!
//! A literal is `Σⱼ aⱼ·xⱼ ≻ c` with `≻ ∈ {≥, >}`; inputs written with
//! `<=`/`<` are stored negated.  A clause is a disjunction of literals, a
//! formula a conjunction of clauses.  A clause is *Horn* when all negative
//! coefficients live in one column, *restricted Horn* when additionally at
//! most one literal carries any negative coefficient, and *tropically
//! convex* (syntactically) when furthermore every literal's coefficients
//! sum to zero.  Sets defined by Horn clauses are closed under
//! componentwise max; `is_max_closed_semantic` decides that closure
//! property for an arbitrary formula by checking the 2ⁿ sign-pattern
//! implications with exact linear programming.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::lp::{fm_feasible, negate_row, LinRow, LinSystem, Rel};
use crate::numeric::{EpsNum, Rational};

/// Input relations before normalization.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InputRel {
    Geq,
    Gt,
    Leq,
    Lt,
}

/// One linear inequality `coeffs · x  rel  bound` (rel ∈ {≥, >}).
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    coeffs: BTreeMap<usize, Rational>,
    pub rel: Rel,
    pub bound: Rational,
}

impl Literal {
    /// Builds a literal, normalizing `<=`/`<` inputs by negation and
    /// dropping zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (usize, Rational)>, rel: InputRel, bound: Rational) -> Self {
        let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
        for (v, c) in terms {
            let entry = coeffs.entry(v).or_insert_with(Rational::zero);
            *entry = &*entry + &c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        match rel {
            InputRel::Geq => Literal { coeffs, rel: Rel::Geq, bound },
            InputRel::Gt => Literal { coeffs, rel: Rel::Gt, bound },
            InputRel::Leq | InputRel::Lt => {
                let coeffs = coeffs.into_iter().map(|(v, c)| (v, -c)).collect();
                let rel = if rel == InputRel::Leq { Rel::Geq } else { Rel::Gt };
                Literal { coeffs, rel, bound: -bound }
            }
        }
    }

    /// Sparse coefficients in ascending variable order.
    pub fn coeffs(&self) -> &BTreeMap<usize, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, var: usize) -> Rational {
        self.coeffs.get(&var).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest variable index mentioned, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    /// True when no coefficient is negative (a clause may contain at most
    /// one literal violating this and still be restricted Horn).
    pub fn all_coeffs_nonneg(&self) -> bool {
        !self.coeffs.values().any(Rational::is_negative)
    }

    /// Sum of all coefficients (zero for tropically convex literals).
    pub fn coeff_sum(&self) -> Rational {
        let mut s = Rational::zero();
        for c in self.coeffs.values() {
            s += c;
        }
        s
    }

    /// Dense-row view over `num_vars` variables.
    pub fn to_lin_row(&self, num_vars: usize) -> LinRow {
        let mut coeffs = vec![Rational::zero(); num_vars];
        for (&v, c) in &self.coeffs {
            coeffs[v] = c.clone();
        }
        LinRow::new(coeffs, self.rel, EpsNum::from_rational(self.bound.clone()))
    }

    /// The negation as a dense row.
    pub fn negated_row(&self, num_vars: usize) -> LinRow {
        negate_row(&self.to_lin_row(num_vars))
    }

    /// Does the literal hold at a rational point?
    pub fn holds_at(&self, x: &[Rational]) -> bool {
        let mut lhs = Rational::zero();
        for (&v, c) in &self.coeffs {
            lhs += &(c * &x[v]);
        }
        self.rel.holds(&lhs, &self.bound)
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
        let name = |v: usize| -> &str { names.get(v).map(|s| s.as_str()).unwrap_or("?") };
        if self.coeffs.is_empty() {
            // Internal-only state (e.g. `x1 - x1 >= 0`); print a parseable
            // zero term against the first known variable.
            let v0 = names.first().map(|s| s.as_str()).unwrap_or("x1");
            write!(f, "0*{}", v0)?;
        } else {
            for (i, (&v, c)) in self.coeffs.iter().enumerate() {
                let mag = c.abs();
                if i == 0 {
                    if c.is_negative() {
                        write!(f, "-")?;
                    }
                } else if c.is_negative() {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
                if mag == Rational::one() {
                    write!(f, "{}", name(v))?;
                } else {
                    write!(f, "{}*{}", mag, name(v))?;
                }
            }
        }
        write!(f, " {} {}", self.rel, self.bound)
    }

    /// Renders the literal using the given variable names.
    pub fn display(&self, names: &[String]) -> String {
        struct D<'a>(&'a Literal, &'a [String]);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, self.1)
            }
        }
        format!("{}", D(self, names))
    }
}

/// A disjunction of literals.  An empty clause is the constant FALSE; it
/// can arise internally but is not part of the text format.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause { literals }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn holds_at(&self, x: &[Rational]) -> bool {
        self.literals.iter().any(|l| l.holds_at(x))
    }
}

/// A conjunction of clauses with named variables.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Formula {
    pub var_names: Vec<String>,
    pub clauses: Vec<Clause>,
}

impl Formula {
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    /// Canonical names `x1..xn`.
    pub fn with_default_names(num_vars: usize, clauses: Vec<Clause>) -> Self {
        Formula { var_names: (1..=num_vars).map(|i| format!("x{i}")).collect(), clauses }
    }

    /// Parses the line-oriented text format: one clause per line, literals
    /// separated by `|`, `#` comments and blank lines ignored.  Identifiers
    /// are mapped to indices in first-occurrence order.
    pub fn parse(text: &str) -> Result<Formula> {
        let mut vars: HashMap<String, usize> = HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut clauses = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            let clause = parse_clause_line(line, i + 1, &mut vars, &mut names)?;
            clauses.push(clause);
        }
        Ok(Formula { var_names: names, clauses })
    }

    /// Evaluates the formula at an exact rational point.
    pub fn eval(&self, x: &[Rational]) -> Result<bool> {
        if x.len() != self.num_vars() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, formula has {} variables",
                x.len(),
                self.num_vars()
            )));
        }
        Ok(self.clauses.iter().all(|c| c.holds_at(x)))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for clause in &self.clauses {
            if clause.is_empty() {
                // Internal FALSE marker; not part of the parseable format.
                writeln!(f, "# <empty clause>")?;
                continue;
            }
            for (i, lit) in clause.literals.iter().enumerate() {
                if i > 0 {
                    write!(f, " | ")?;
                }
                lit.fmt_with(f, &self.var_names)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Translates a point by `c` in every coordinate.
pub fn shift_point(x: &[Rational], c: &Rational) -> Vec<Rational> {
    x.iter().map(|v| v + c).collect()
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    line: usize,
    chars: Vec<char>,
    pos: usize,
    _text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Cursor { line, chars: text.chars().collect(), pos: 0, _text: text }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.pos + 1, msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, ch: char) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.err("expected identifier")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn digits(&mut self) -> Result<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected number"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    /// Unsigned rational `p` or `p/q`.
    fn unsigned_rational(&mut self) -> Result<Rational> {
        self.skip_ws();
        let p = self.digits()?;
        if self.eat('/') {
            let q = self.digits()?;
            let q_val: Rational = q.parse().map_err(|_| self.err("invalid denominator"))?;
            if q_val.is_zero() {
                return Err(self.err("zero denominator"));
            }
            let p_val: Rational = p.parse().map_err(|_| self.err("invalid numerator"))?;
            Ok(p_val.checked_div(&q_val).expect("nonzero denominator"))
        } else {
            p.parse().map_err(|_| self.err("invalid number"))
        }
    }

    fn relation(&mut self) -> Result<InputRel> {
        self.skip_ws();
        match self.bump() {
            Some('>') => Ok(if self.eat('=') { InputRel::Geq } else { InputRel::Gt }),
            Some('<') => Ok(if self.eat('=') { InputRel::Leq } else { InputRel::Lt }),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected relation (>=, >, <=, <)"))
            }
        }
    }
}

fn intern(name: String, vars: &mut HashMap<String, usize>, names: &mut Vec<String>) -> usize {
    if let Some(&i) = vars.get(&name) {
        return i;
    }
    let i = names.len();
    names.push(name.clone());
    vars.insert(name, i);
    i
}

fn parse_clause_line(
    line: &str,
    line_no: usize,
    vars: &mut HashMap<String, usize>,
    names: &mut Vec<String>,
) -> Result<Clause> {
    let mut cur = Cursor::new(line, line_no);
    let mut literals = Vec::new();
    loop {
        literals.push(parse_literal(&mut cur, vars, names)?);
        cur.skip_ws();
        if cur.eat('|') {
            continue;
        }
        if cur.at_end() {
            break;
        }
        return Err(cur.err("expected `|` or end of line"));
    }
    Ok(Clause::new(literals))
}

/// One side of a literal: a sum of signed `coeff*var` terms and rational
/// constants.
struct Side {
    terms: Vec<(usize, Rational)>,
    constant: Rational,
}

fn parse_side(
    cur: &mut Cursor<'_>,
    vars: &mut HashMap<String, usize>,
    names: &mut Vec<String>,
) -> Result<Side> {
    let mut terms: Vec<(usize, Rational)> = Vec::new();
    let mut constant = Rational::zero();
    let mut first = true;
    loop {
        cur.skip_ws();
        let neg = if cur.eat('-') {
            true
        } else if cur.eat('+') {
            if first {
                return Err(cur.err("unexpected `+` at start of expression"));
            }
            false
        } else {
            if !first {
                break; // no further sign: the relation follows
            }
            false
        };
        cur.skip_ws();
        if matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
            let value = cur.unsigned_rational()?;
            cur.skip_ws();
            if cur.eat('*') {
                let name = cur.ident()?;
                let v = intern(name, vars, names);
                terms.push((v, if neg { -value } else { value }));
            } else {
                // A bare rational constant addend.
                if neg {
                    constant -= &value;
                } else {
                    constant += &value;
                }
            }
        } else {
            let name = cur.ident()?;
            let v = intern(name, vars, names);
            let coeff = Rational::one();
            terms.push((v, if neg { -coeff } else { coeff }));
        }
        first = false;
        // Peek: if a sign follows, continue collecting addends.
        cur.skip_ws();
        if !matches!(cur.peek(), Some('+') | Some('-')) {
            break;
        }
    }
    Ok(Side { terms, constant })
}

fn parse_literal(
    cur: &mut Cursor<'_>,
    vars: &mut HashMap<String, usize>,
    names: &mut Vec<String>,
) -> Result<Literal> {
    let lhs = parse_side(cur, vars, names)?;
    let rel = cur.relation()?;
    let rhs = parse_side(cur, vars, names)?;
    let mut terms = lhs.terms;
    for (v, c) in rhs.terms {
        terms.push((v, -c));
    }
    let bound = &rhs.constant - &lhs.constant;
    Ok(Literal::new(terms, rel, bound))
}

// ---------------------------------------------------------------------------
// Classifiers
// ---------------------------------------------------------------------------

/// All columns `k` such that every literal's coefficients outside `k` are
/// nonnegative.  Empty iff the clause is not Horn.
pub fn horn_columns(clause: &Clause, num_vars: usize) -> BTreeSet<usize> {
    let mut negatives: BTreeSet<usize> = BTreeSet::new();
    for lit in &clause.literals {
        for (&v, c) in lit.coeffs() {
            if c.is_negative() {
                negatives.insert(v);
            }
        }
    }
    match negatives.len() {
        0 => (0..num_vars).collect(),
        1 => negatives,
        _ => BTreeSet::new(),
    }
}

/// Per-clause witness of the restricted Horn shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseShape {
    /// Least admissible column `k` (all negative coefficients are there).
    pub horn_column: usize,
    /// Index of the unique literal carrying a negative coefficient, if any.
    pub positive: Option<usize>,
}

/// Computes per-clause `(k, l)` witnesses, failing on the first clause that
/// is not Horn or has two literals with negative coefficients.
pub fn restricted_horn_shape(f: &Formula) -> Result<Vec<ClauseShape>> {
    let mut shapes = Vec::with_capacity(f.clauses.len());
    for (ci, clause) in f.clauses.iter().enumerate() {
        let cols = horn_columns(clause, f.num_vars());
        let Some(&k) = cols.iter().next() else {
            return Err(Error::NotHorn(format!(
                "clause {} has negative coefficients in more than one column",
                ci + 1
            )));
        };
        let with_neg: Vec<usize> = clause
            .literals
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.all_coeffs_nonneg())
            .map(|(i, _)| i)
            .collect();
        if with_neg.len() > 1 {
            return Err(Error::NotRestrictedHorn(format!(
                "clause {} has {} literals with negative coefficients",
                ci + 1,
                with_neg.len()
            )));
        }
        shapes.push(ClauseShape { horn_column: k, positive: with_neg.first().copied() });
    }
    Ok(shapes)
}

/// Every clause Horn with at most one negative-coefficient literal.
pub fn is_restricted_horn(f: &Formula) -> bool {
    restricted_horn_shape(f).is_ok()
}

/// Every clause Horn and every literal's coefficients summing to zero.
/// Formulas in this shape define translation-invariant sets.
pub fn is_tropically_convex_syntactic(f: &Formula) -> bool {
    f.clauses.iter().all(|clause| {
        !horn_columns(clause, f.num_vars()).is_empty()
            && clause.literals.iter().all(|lit| lit.coeff_sum().is_zero())
    })
}

/// Decides whether the solution set is closed under componentwise max,
/// splitting on the 2ⁿ sign patterns of `(x, y)` and checking each
/// resulting implication `x ∈ S ∧ y ∈ S ⊨ max(x,y) ∈ S` exactly.
/// Limited to `n ≤ 6`.
pub fn is_max_closed_semantic(f: &Formula, budgets: &Budgets) -> Result<bool> {
    let n = f.num_vars();
    if n > 6 {
        return Err(Error::BudgetExceeded {
            what: "sign-pattern split in max-closure check".into(),
            needed: 1u128 << n,
            limit: 64,
        });
    }
    if f.clauses.iter().any(Clause::is_empty) {
        // The empty set is vacuously max-closed.
        return Ok(true);
    }
    // Hypothesis clauses over 2n variables: f(x) with x at 0..n and f(y)
    // with y at n..2n; within each clause, equal rows are collapsed.
    let map_literal = |lit: &Literal, f_map: &dyn Fn(usize) -> usize| -> LinRow {
        let mut coeffs = vec![Rational::zero(); 2 * n];
        for (&v, c) in lit.coeffs() {
            let tgt = f_map(v);
            coeffs[tgt] = &coeffs[tgt] + c;
        }
        LinRow::new(coeffs, lit.rel, EpsNum::from_rational(lit.bound.clone()))
    };
    let mut hyp_clauses: Vec<Vec<LinRow>> = Vec::new();
    for copy in 0..2 {
        for clause in &f.clauses {
            let mut rows: Vec<LinRow> = Vec::new();
            for lit in &clause.literals {
                let row = map_literal(lit, &|v| v + copy * n);
                if !rows.contains(&row) {
                    rows.push(row);
                }
            }
            hyp_clauses.push(rows);
        }
    }
    let mut selections: u128 = 1;
    for rows in &hyp_clauses {
        selections = selections.saturating_mul(rows.len() as u128);
    }
    let per_pattern = selections.saturating_mul(f.clauses.len() as u128);
    let total = per_pattern.saturating_mul(1u128 << n);
    if total > budgets.selection_limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "literal selections in max-closure check".into(),
            needed: total,
            limit: budgets.selection_limit as u128,
        });
    }

    for pattern in 0u32..(1 << n) {
        // Pattern rows: x_j >= y_j when bit set, else y_j > x_j.  The max
        // point m has m_j = x_j when the bit is set, else y_j.
        let mut base = LinSystem::new(2 * n);
        for j in 0..n {
            let mut coeffs = vec![Rational::zero(); 2 * n];
            if pattern >> j & 1 == 1 {
                coeffs[j] = Rational::from_int(1);
                coeffs[n + j] = Rational::from_int(-1);
                base.push(LinRow::new(coeffs, Rel::Geq, EpsNum::zero()));
            } else {
                coeffs[n + j] = Rational::from_int(1);
                coeffs[j] = Rational::from_int(-1);
                base.push(LinRow::new(coeffs, Rel::Gt, EpsNum::zero()));
            }
        }
        let m_map = |v: usize| if pattern >> v & 1 == 1 { v } else { n + v };
        for goal in &f.clauses {
            // Refute the implication: hypotheses ∧ ¬(goal at m) feasible?
            let mut sys = base.clone();
            for lit in &goal.literals {
                sys.push(negate_row(&map_literal(lit, &m_map)));
            }
            let mut counter = vec![0usize; hyp_clauses.len()];
            'sel: loop {
                let mut full = sys.clone();
                for (ci, &li) in counter.iter().enumerate() {
                    full.push(hyp_clauses[ci][li].clone());
                }
                if fm_feasible(&full)?.is_feasible() {
                    return Ok(false);
                }
                for i in (0..counter.len()).rev() {
                    counter[i] += 1;
                    if counter[i] < hyp_clauses[i].len() {
                        continue 'sel;
                    }
                    counter[i] = 0;
                }
                break;
            }
        }
    }
    Ok(true)
}
