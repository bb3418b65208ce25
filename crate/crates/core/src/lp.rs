//! Exact linear feasibility via Fourier–Motzkin elimination.
//!
//! Rows have rational coefficients and bounds in `EpsNum`, so a single run
//! decides systems whose constants carry an infinitesimal part (the
//! variables then take `EpsNum` values).  Variables are eliminated in
//! ascending index order; a combined row is strict iff either parent is.
//! Infeasible systems come with a certificate: nonnegative multipliers whose
//! row combination has zero coefficients and a contradictory bound
//! (`0 > 0` or `0 ≥ positive`).  Feasible systems come with a witness built
//! by back-substitution in reverse elimination order.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{EpsNum, Rational};

/// Relation of a row or literal: `≥` or `>`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub enum Rel {
    Geq,
    Gt,
}

impl Rel {
    /// The relation of a nonnegative combination: strict if either is.
    pub fn combine(self, other: Rel) -> Rel {
        if self == Rel::Gt || other == Rel::Gt {
            Rel::Gt
        } else {
            Rel::Geq
        }
    }

    /// Does `lhs rel rhs` hold?
    pub fn holds<T: Ord>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Rel::Geq => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rel::Geq => write!(f, ">="),
            Rel::Gt => write!(f, ">"),
        }
    }
}

/// One inequality `coeffs · x  rel  bound`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LinRow {
    pub coeffs: Vec<Rational>,
    pub rel: Rel,
    pub bound: EpsNum,
}

impl LinRow {
    pub fn new(coeffs: Vec<Rational>, rel: Rel, bound: EpsNum) -> Self {
        LinRow { coeffs, rel, bound }
    }

    /// Evaluates `coeffs · x` at an `EpsNum` point.
    pub fn lhs_at(&self, x: &[EpsNum]) -> EpsNum {
        let mut acc = EpsNum::zero();
        for (c, v) in self.coeffs.iter().zip(x) {
            acc += &v.scale(c);
        }
        acc
    }

    /// Does the row hold at `x`?
    pub fn holds_at(&self, x: &[EpsNum]) -> bool {
        self.rel.holds(&self.lhs_at(x), &self.bound)
    }

    fn is_zero_coeffs(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// A zero-coefficient row `0 rel bound` is a tautology iff the bound is
    /// on the right side of zero.
    fn zero_row_tautology(&self) -> bool {
        self.rel.holds(&EpsNum::zero(), &self.bound)
    }
}

/// A conjunction of inequalities over `num_vars` variables.
#[derive(Clone, Debug, Default)]
pub struct LinSystem {
    pub num_vars: usize,
    pub rows: Vec<LinRow>,
}

impl LinSystem {
    pub fn new(num_vars: usize) -> Self {
        LinSystem { num_vars, rows: Vec::new() }
    }

    pub fn push(&mut self, row: LinRow) {
        debug_assert_eq!(row.coeffs.len(), self.num_vars);
        self.rows.push(row);
    }

    /// Do all rows hold at `x`?
    pub fn holds_at(&self, x: &[EpsNum]) -> bool {
        self.rows.iter().all(|r| r.holds_at(x))
    }
}

/// Nonnegative multipliers over input rows whose combination is
/// contradictory (zero coefficients, bound violating `0 rel bound`).
#[derive(Clone, Debug)]
pub struct Certificate {
    /// Sparse `(row index, multiplier)` pairs; multipliers are positive.
    pub multipliers: Vec<(usize, Rational)>,
}

impl Certificate {
    /// Recomputes the combination against the original system and checks
    /// that it derives `0 > 0` or `0 ≥ positive`.
    pub fn verify(&self, sys: &LinSystem) -> bool {
        let mut coeffs = vec![Rational::zero(); sys.num_vars];
        let mut bound = EpsNum::zero();
        let mut rel = Rel::Geq;
        for (idx, lambda) in &self.multipliers {
            if !lambda.is_positive() {
                return false;
            }
            let Some(row) = sys.rows.get(*idx) else { return false };
            for (acc, c) in coeffs.iter_mut().zip(&row.coeffs) {
                *acc += &(c * lambda);
            }
            bound += &row.bound.scale(lambda);
            rel = rel.combine(row.rel);
        }
        if !coeffs.iter().all(Rational::is_zero) {
            return false;
        }
        // The derived row `0 rel bound` must be false.
        !rel.holds(&EpsNum::zero(), &bound)
    }
}

/// Outcome of a feasibility run.
#[derive(Clone, Debug)]
pub enum LpResult {
    /// A point (over `EpsNum`) satisfying every row.
    Feasible(Vec<EpsNum>),
    /// A Farkas-style certificate of infeasibility.
    Infeasible(Certificate),
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpResult::Feasible(_))
    }

    pub fn witness(&self) -> Option<&[EpsNum]> {
        match self {
            LpResult::Feasible(w) => Some(w),
            LpResult::Infeasible(_) => None,
        }
    }
}

/// Working row: inequality plus its provenance as a nonnegative combination
/// of original rows (kept sparse and sorted by row index).
#[derive(Clone)]
struct WorkRow {
    row: LinRow,
    mults: Vec<(usize, Rational)>,
}

fn merge_mults(
    a: &[(usize, Rational)],
    la: &Rational,
    b: &[(usize, Rational)],
    lb: &Rational,
) -> Vec<(usize, Rational)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push((a[i].0, &a[i].1 * la));
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, &b[j].1 * lb));
            j += 1;
        } else {
            let v = &a[i].1 * la + &b[j].1 * lb;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rescales a row so its first nonzero coefficient is ±1; keeps the
/// certificate multipliers in step.  Canonical scale makes exact-duplicate
/// detection effective.
fn normalize(work: &mut WorkRow) {
    let Some(pivot) = work.row.coeffs.iter().find(|c| !c.is_zero()) else {
        return;
    };
    let scale = pivot.abs().recip().expect("nonzero pivot");
    if scale == Rational::one() {
        return;
    }
    for c in &mut work.row.coeffs {
        *c = &*c * &scale;
    }
    work.row.bound = work.row.bound.scale(&scale);
    for (_, m) in &mut work.mults {
        *m = &*m * &scale;
    }
}

struct Elimination {
    /// For each eliminated variable, the rows (involving it) captured just
    /// before its elimination; used for witness back-substitution.
    stages: Vec<Vec<LinRow>>,
    /// Rows surviving with no eliminated variable left.
    remaining: Vec<WorkRow>,
    /// Set when a contradictory zero-coefficient row was derived.
    contradiction: Option<Certificate>,
}

/// Runs Fourier–Motzkin eliminating `order` (ascending), starting from the
/// input rows.  Stops early on a contradiction.
fn eliminate(sys: &LinSystem, order: &[usize]) -> Elimination {
    let mut work: Vec<WorkRow> = sys
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| WorkRow { row: row.clone(), mults: vec![(i, Rational::one())] })
        .collect();
    for w in &mut work {
        normalize(w);
    }
    let mut stages: Vec<Vec<LinRow>> = Vec::with_capacity(order.len());

    let check_zero = |w: &WorkRow| -> Option<Certificate> {
        if w.row.is_zero_coeffs() && !w.row.zero_row_tautology() {
            Some(Certificate { multipliers: w.mults.clone() })
        } else {
            None
        }
    };

    for w in &work {
        if let Some(cert) = check_zero(w) {
            return Elimination { stages, remaining: Vec::new(), contradiction: Some(cert) };
        }
    }
    work.retain(|w| !w.row.is_zero_coeffs());

    for &v in order {
        let mut lowers: Vec<WorkRow> = Vec::new();
        let mut uppers: Vec<WorkRow> = Vec::new();
        let mut rest: Vec<WorkRow> = Vec::new();
        for w in work {
            if w.row.coeffs[v].is_positive() {
                lowers.push(w);
            } else if w.row.coeffs[v].is_negative() {
                uppers.push(w);
            } else {
                rest.push(w);
            }
        }
        let mut stage: Vec<LinRow> = Vec::with_capacity(lowers.len() + uppers.len());
        stage.extend(lowers.iter().map(|w| w.row.clone()));
        stage.extend(uppers.iter().map(|w| w.row.clone()));
        stages.push(stage);

        let mut seen: HashSet<(Vec<Rational>, Rel, EpsNum)> = rest
            .iter()
            .map(|w| (w.row.coeffs.clone(), w.row.rel, w.row.bound.clone()))
            .collect();
        for lo in &lowers {
            for hi in &uppers {
                // λ_lo = -hi.coeffs[v] > 0, λ_hi = lo.coeffs[v] > 0 cancels v.
                let la = -&hi.row.coeffs[v];
                let lb = lo.row.coeffs[v].clone();
                let coeffs: Vec<Rational> = lo
                    .row
                    .coeffs
                    .iter()
                    .zip(&hi.row.coeffs)
                    .map(|(a, b)| a * &la + b * &lb)
                    .collect();
                debug_assert!(coeffs[v].is_zero());
                let bound = lo.row.bound.scale(&la) + hi.row.bound.scale(&lb);
                let rel = lo.row.rel.combine(hi.row.rel);
                let mut neu = WorkRow {
                    row: LinRow { coeffs, rel, bound },
                    mults: merge_mults(&lo.mults, &la, &hi.mults, &lb),
                };
                normalize(&mut neu);
                if neu.row.is_zero_coeffs() {
                    if !neu.row.zero_row_tautology() {
                        return Elimination {
                            stages,
                            remaining: Vec::new(),
                            contradiction: Some(Certificate { multipliers: neu.mults }),
                        };
                    }
                    continue; // tautology: drop
                }
                let key = (neu.row.coeffs.clone(), neu.row.rel, neu.row.bound.clone());
                if seen.insert(key) {
                    rest.push(neu);
                }
            }
        }
        work = rest;
    }
    Elimination { stages, remaining: work, contradiction: None }
}

/// Picks a value inside the interval bounded by `lower`/`upper` (with
/// strictness flags): midpoint when two-sided, one step past the bound when
/// one-sided, zero when free.
fn pick_value(lower: Option<(EpsNum, Rel)>, upper: Option<(EpsNum, Rel)>) -> EpsNum {
    let one = EpsNum::from(1);
    let half = Rational::new(1, 2).expect("2 != 0");
    match (lower, upper) {
        (None, None) => EpsNum::zero(),
        (Some((l, _)), None) => &l + &one,
        (None, Some((u, _))) => &u - &one,
        (Some((l, lrel)), Some((u, urel))) => {
            if l == u {
                // FM guarantees a nonempty interval, so both ends are closed.
                debug_assert!(lrel == Rel::Geq && urel == Rel::Geq);
                l
            } else {
                debug_assert!(l < u);
                (&l + &u).scale(&half)
            }
        }
    }
}

/// Decides feasibility of `sys` exactly.  Feasible systems yield a witness
/// whose infinitesimal parts are zero whenever all bounds are rational;
/// infeasible ones yield a verifiable multiplier certificate.
pub fn fm_feasible(sys: &LinSystem) -> Result<LpResult> {
    for row in &sys.rows {
        if row.coeffs.len() != sys.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "row has {} coefficients, system has {} variables",
                row.coeffs.len(),
                sys.num_vars
            )));
        }
    }
    let order: Vec<usize> = (0..sys.num_vars).collect();
    let elim = eliminate(sys, &order);
    if let Some(cert) = elim.contradiction {
        return Ok(LpResult::Infeasible(cert));
    }
    debug_assert!(elim.remaining.is_empty());

    // Back-substitute in reverse elimination order.
    let mut vals = vec![EpsNum::zero(); sys.num_vars];
    for v in (0..sys.num_vars).rev() {
        let mut lower: Option<(EpsNum, Rel)> = None;
        let mut upper: Option<(EpsNum, Rel)> = None;
        for row in &elim.stages[v] {
            // Rows at stage v involve only variables >= v.
            let mut rest = EpsNum::zero();
            for j in v + 1..sys.num_vars {
                if !row.coeffs[j].is_zero() {
                    rest += &vals[j].scale(&row.coeffs[j]);
                }
            }
            let c = &row.coeffs[v];
            let value = (&row.bound - &rest).scale(&c.abs().recip().expect("nonzero stage coeff"));
            if c.is_positive() {
                // c·x_v >= bound - rest  =>  x_v >= value
                let tighter = match &lower {
                    None => true,
                    Some((cur, cur_rel)) => {
                        value > *cur || (value == *cur && *cur_rel == Rel::Geq && row.rel == Rel::Gt)
                    }
                };
                if tighter {
                    lower = Some((value, row.rel));
                }
            } else {
                // -|c|·x_v >= bound - rest  =>  x_v <= value (negated scale)
                let value = -value;
                let tighter = match &upper {
                    None => true,
                    Some((cur, cur_rel)) => {
                        value < *cur || (value == *cur && *cur_rel == Rel::Geq && row.rel == Rel::Gt)
                    }
                };
                if tighter {
                    upper = Some((value, row.rel));
                }
            }
        }
        vals[v] = pick_value(lower, upper);
    }
    debug_assert!(sys.holds_at(&vals), "witness must satisfy all rows");
    Ok(LpResult::Feasible(vals))
}

/// Eliminates every variable not in `keep`, returning a system over the
/// same index space whose surviving rows mention only kept variables.
/// Exact-duplicate rows and zero-coefficient tautologies are dropped.
pub fn fm_project(sys: &LinSystem, keep: &BTreeSet<usize>) -> Result<LinSystem> {
    for row in &sys.rows {
        if row.coeffs.len() != sys.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "row has {} coefficients, system has {} variables",
                row.coeffs.len(),
                sys.num_vars
            )));
        }
    }
    let order: Vec<usize> = (0..sys.num_vars).filter(|v| !keep.contains(v)).collect();
    let elim = eliminate(sys, &order);
    let mut out = LinSystem::new(sys.num_vars);
    if elim.contradiction.is_some() {
        // Projection of an empty set: a single unsatisfiable constant row.
        out.push(LinRow::new(vec![Rational::zero(); sys.num_vars], Rel::Gt, EpsNum::zero()));
        return Ok(out);
    }
    for w in elim.remaining {
        out.push(w.row);
    }
    Ok(out)
}

/// Does `sys` entail `row`?  Checked as `sys ∧ ¬row` infeasible.
pub fn implies(sys: &LinSystem, row: &LinRow) -> Result<bool> {
    let mut extended = sys.clone();
    extended.push(negate_row(row));
    Ok(!fm_feasible(&extended)?.is_feasible())
}

/// The negation of `a·x rel c`: `(-a)·x rel' -c` with strictness flipped.
pub fn negate_row(row: &LinRow) -> LinRow {
    LinRow {
        coeffs: row.coeffs.iter().map(|c| -c).collect(),
        rel: match row.rel {
            Rel::Geq => Rel::Gt,
            Rel::Gt => Rel::Geq,
        },
        bound: -&row.bound,
    }
}
