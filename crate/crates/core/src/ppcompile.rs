//! Compilation of Horn clauses into primitive-positive formulas over two
//! small fixed relation vocabularies, plus an exact equivalence checker.
//!
//! The full vocabulary (`compile_gamma0`) consists of
//!
//! * `Lt(x,y)`      — `x < y`
//! * `One(u)`       — `u = 1`
//! * `NegOne(u)`    — `u = -1`
//! * `S1(x,y)`      — `2x <= y`
//! * `S2(x,y,z)`    — `x <= y + z`
//! * `M0(x,y,z)`    — `x <= y  or  x <= z`
//!
//! The translation-invariant vocabulary (`compile_gamma_t`) consists of
//!
//! * `Lt(x,y)`      — `x < y`
//! * `T+1(x,y)`     — `x <= y + 1`
//! * `T-1(x,y)`     — `x <= y - 1`
//! * `S3(x,y,z)`    — `2x <= y + z`
//! * `M0(x,y,z)`    — `x <= y  or  x <= z`
//!
//! A compiled [`PPFormula`] is an existentially quantified conjunction of
//! atoms that defines the same set as the input clause over its free
//! variables.  [`pp_to_horn`] lowers a formula back to clause form,
//! [`pp_eval`] decides membership of a rational point, and
//! [`equivalence_check`] decides set equality of two clause formulas with
//! designated existential variables, all in exact arithmetic.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One as _, Signed, ToPrimitive, Zero as _};
use serde::Serialize;
use serde::ser::{SerializeStruct, Serializer};

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::formula::{Clause, Formula, InputRel, Literal, horn_columns};
use crate::horn_solver::brute_force_sat;
use crate::lp::{LinRow, LinSystem, Rel, fm_feasible, fm_project, negate_row};
use crate::numeric::Rational;

/// Longest unary offset chain `compile_gamma_t` will emit.
const MAX_OFFSET_CHAIN: u64 = 4096;
/// Largest averaging tree (leaf count) `compile_gamma_t` will emit.
const MAX_TREE_LEAVES: u64 = 4096;

/// One atom of a primitive-positive formula.  Variables are identified by
/// name; every name must be a free variable, a bound variable, or a
/// declared constant variable of the enclosing [`PPFormula`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PPAtom {
    /// `x < y`
    Lt(String, String),
    /// `u = 1`
    One(String),
    /// `u = -1`
    NegOne(String),
    /// `2x <= y`
    S1(String, String),
    /// `x <= y + z`
    S2(String, String, String),
    /// `x <= y  or  x <= z`
    M0(String, String, String),
    /// `x <= y + 1`
    TPlus(String, String),
    /// `x <= y - 1`
    TMinus(String, String),
    /// `2x <= y + z`
    S3(String, String, String),
}

impl PPAtom {
    pub fn kind(&self) -> &'static str {
        match self {
            PPAtom::Lt(..) => "Lt",
            PPAtom::One(..) => "One",
            PPAtom::NegOne(..) => "NegOne",
            PPAtom::S1(..) => "S1",
            PPAtom::S2(..) => "S2",
            PPAtom::M0(..) => "M0",
            PPAtom::TPlus(..) => "T+1",
            PPAtom::TMinus(..) => "T-1",
            PPAtom::S3(..) => "S3",
        }
    }

    pub fn args(&self) -> Vec<&str> {
        match self {
            PPAtom::One(a) | PPAtom::NegOne(a) => vec![a],
            PPAtom::Lt(a, b) | PPAtom::S1(a, b) | PPAtom::TPlus(a, b) | PPAtom::TMinus(a, b) => {
                vec![a, b]
            }
            PPAtom::S2(a, b, c) | PPAtom::M0(a, b, c) | PPAtom::S3(a, b, c) => vec![a, b, c],
        }
    }
}

impl fmt::Display for PPAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind(), self.args().join(","))
    }
}

impl Serialize for PPAtom {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PPAtom", 2)?;
        s.serialize_field("kind", self.kind())?;
        s.serialize_field("args", &self.args())?;
        s.end()
    }
}

/// An existentially quantified conjunction of [`PPAtom`]s.
///
/// The defined set lives over `free_vars` (in order); `bound_vars` are
/// existentially quantified, and the optional constant variables are
/// existentially quantified variables pinned to `1` / `-1`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PPFormula {
    pub free_vars: Vec<String>,
    pub bound_vars: Vec<String>,
    /// Name of the constant-one variable, when the formula uses it.
    pub const_one: Option<String>,
    /// Name of the constant-minus-one variable, when the formula uses it.
    pub const_neg_one: Option<String>,
    pub atoms: Vec<PPAtom>,
}

impl PPFormula {
    /// Number of atoms (constant declarations are not atoms).
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }
}

impl fmt::Display for PPFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.const_one.is_some() || self.const_neg_one.is_some() {
            write!(f, "CONST")?;
            if let Some(u) = &self.const_one {
                write!(f, " {u}")?;
            }
            if let Some(u) = &self.const_neg_one {
                write!(f, " {u}")?;
            }
            writeln!(f)?;
        }
        if self.atoms.is_empty() {
            return writeln!(f, "TRUE");
        }
        if !self.bound_vars.is_empty() {
            write!(f, "EXISTS {} . ", self.bound_vars.join(" "))?;
        }
        let parts: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        writeln!(f, "{}", parts.join(" & "))
    }
}

// ---------------------------------------------------------------------------
// Emission machinery shared by both compilers.
// ---------------------------------------------------------------------------

/// Accumulates atoms and fresh variables during compilation and memoises
/// the shared auxiliary chains (doubling chains, constant-power chains and
/// unary offset chains) so that repeated uses cost no extra atoms.
struct Emitter {
    taken: HashSet<String>,
    counter: u64,
    atoms: Vec<PPAtom>,
    bound: Vec<String>,
    one: Option<String>,
    neg_one: Option<String>,
    /// `(base, p) -> v` with `v <= 2^p * base`, `p >= 1`.
    var_doubles: HashMap<(String, u32), String>,
    /// `p -> v` with `v <= 2^p`, `p >= 1`.
    pos_consts: HashMap<u32, String>,
    /// `p -> v` with `v <= -2^p`, `p >= 1`.
    neg_consts: HashMap<u32, String>,
    /// `(base, d) -> v` with `v <= base + d`, `d != 0`.
    offsets: HashMap<(String, i64), String>,
}

impl Emitter {
    fn new(free_names: &[String]) -> Self {
        Emitter {
            taken: free_names.iter().cloned().collect(),
            counter: 0,
            atoms: Vec::new(),
            bound: Vec::new(),
            one: None,
            neg_one: None,
            var_doubles: HashMap::new(),
            pos_consts: HashMap::new(),
            neg_consts: HashMap::new(),
            offsets: HashMap::new(),
        }
    }

    fn emit(&mut self, atom: PPAtom) {
        self.atoms.push(atom);
    }

    fn fresh(&mut self) -> String {
        loop {
            self.counter += 1;
            let name = format!("_t{}", self.counter);
            if self.taken.insert(name.clone()) {
                self.bound.push(name.clone());
                return name;
            }
        }
    }

    fn const_var(&mut self, positive: bool) -> String {
        let slot = if positive { &self.one } else { &self.neg_one };
        if let Some(name) = slot {
            return name.clone();
        }
        let mut name = if positive { "one" } else { "neg_one" }.to_string();
        while !self.taken.insert(name.clone()) {
            name.push('_');
        }
        if positive {
            self.one = Some(name.clone());
        } else {
            self.neg_one = Some(name.clone());
        }
        name
    }

    /// A variable constrained to `<= 2^p * base` that can attain equality.
    fn var_double(&mut self, base: String, p: u32) -> String {
        if p == 0 {
            return base;
        }
        if let Some(v) = self.var_doubles.get(&(base.clone(), p)) {
            return v.clone();
        }
        let prev = self.var_double(base.clone(), p - 1);
        let v = self.fresh();
        self.emit(PPAtom::S2(v.clone(), prev.clone(), prev));
        self.var_doubles.insert((base, p), v.clone());
        v
    }

    /// A variable constrained to `<= 2^p` (positive) or `<= -2^p` that can
    /// attain equality.
    fn const_pow(&mut self, p: u32, positive: bool) -> String {
        if p == 0 {
            return self.const_var(positive);
        }
        let cache = if positive { &self.pos_consts } else { &self.neg_consts };
        if let Some(v) = cache.get(&p) {
            return v.clone();
        }
        let prev = self.const_pow(p - 1, positive);
        let v = self.fresh();
        self.emit(PPAtom::S2(v.clone(), prev.clone(), prev));
        if positive {
            self.pos_consts.insert(p, v.clone());
        } else {
            self.neg_consts.insert(p, v.clone());
        }
        v
    }

    /// A variable constrained to `<= base + d` (`d != 0`) via a unary chain
    /// of `T+1` / `T-1` atoms; equality is attainable.
    fn offset_var(&mut self, base: String, d: i64) -> String {
        debug_assert!(d != 0);
        if let Some(v) = self.offsets.get(&(base.clone(), d)) {
            return v.clone();
        }
        let step = d.signum();
        let prev = if d == step {
            base.clone()
        } else {
            self.offset_var(base.clone(), d - step)
        };
        let v = self.fresh();
        if step > 0 {
            self.emit(PPAtom::TPlus(v.clone(), prev));
        } else {
            self.emit(PPAtom::TMinus(v.clone(), prev));
        }
        self.offsets.insert((base, d), v.clone());
        v
    }

    /// A chain certifying `2^m * base <= w`; returns `w` (`m >= 1`).
    fn s1_chain(&mut self, base: String, m: u32) -> String {
        let mut cur = base;
        for _ in 0..m {
            let v = self.fresh();
            self.emit(PPAtom::S1(cur, v.clone()));
            cur = v;
        }
        cur
    }

    /// Constrains `head <= z_1 + ... + z_n` for the contributor list `zs`,
    /// with equality attainable whenever each `z` can attain its own upper
    /// bound.  An empty list means `head <= 0`.
    fn fold_sum(&mut self, head: String, mut zs: Vec<String>) {
        match zs.len() {
            0 => {
                let pos = self.const_var(true);
                let neg = self.const_var(false);
                self.emit(PPAtom::S2(head, pos, neg));
            }
            1 => {
                let z = zs.pop().unwrap();
                self.emit(PPAtom::M0(head, z.clone(), z));
            }
            2 => {
                let z2 = zs.pop().unwrap();
                let z1 = zs.pop().unwrap();
                self.emit(PPAtom::S2(head, z1, z2));
            }
            _ => {
                let mut cur = head;
                while zs.len() > 2 {
                    let z = zs.pop().unwrap();
                    let t = self.fresh();
                    self.emit(PPAtom::S2(cur, t.clone(), z));
                    cur = t;
                }
                let z2 = zs.pop().unwrap();
                let z1 = zs.pop().unwrap();
                self.emit(PPAtom::S2(cur, z1, z2));
            }
        }
    }

    /// Joins the per-literal slots into the clause disjunction
    /// `x_k <= s_1 or ... or x_k <= s_m` (`m >= 2`) with a chain of `M0`
    /// atoms.
    fn join(&mut self, xk: String, slots: Vec<String>) {
        debug_assert!(slots.len() >= 2);
        let mut cur = xk;
        let mut idx = slots.len();
        while idx > 2 {
            idx -= 1;
            let t = self.fresh();
            self.emit(PPAtom::M0(cur, t.clone(), slots[idx].clone()));
            cur = t;
        }
        self.emit(PPAtom::M0(cur, slots[0].clone(), slots[1].clone()));
    }

    fn finish(self, free_vars: Vec<String>) -> PPFormula {
        PPFormula {
            free_vars,
            bound_vars: self.bound,
            const_one: self.one,
            const_neg_one: self.neg_one,
            atoms: self.atoms,
        }
    }
}

// ---------------------------------------------------------------------------
// Shared clause preprocessing.
// ---------------------------------------------------------------------------

/// Clears denominators: returns the literal's coefficients and bound scaled
/// by the least common multiple of their denominators (all integers).
fn literal_integers(lit: &Literal) -> (BTreeMap<usize, BigInt>, BigInt) {
    let mut l = lit.bound.denom().clone();
    for c in lit.coeffs().values() {
        l = l.lcm(c.denom());
    }
    let scale = Rational::from(l);
    let coeffs = lit
        .coeffs()
        .iter()
        .map(|(&j, c)| (j, (c * &scale).numer().clone()))
        .collect();
    let bound = (&lit.bound * &scale).numer().clone();
    (coeffs, bound)
}

enum ClausePrep<'a> {
    /// Some constant literal is true, so the clause defines everything.
    Trivial,
    /// The surviving non-constant literals and the Horn column.
    Lits(Vec<&'a Literal>, usize),
}

/// Drops constant literals (a true one makes the clause trivial) and
/// determines the shared column carrying the negative coefficients.
fn prep_clause<'a>(clause: &'a Clause, num_vars: usize) -> Result<ClausePrep<'a>> {
    let mut lits = Vec::new();
    for lit in &clause.literals {
        if lit.coeffs().is_empty() {
            let zero = [];
            if lit.holds_at(&zero) {
                return Ok(ClausePrep::Trivial);
            }
            continue;
        }
        lits.push(lit);
    }
    let cols = horn_columns(clause, num_vars);
    let Some(&k) = cols.iter().next() else {
        return Err(Error::NotHorn(
            "negative coefficients appear in more than one column".into(),
        ));
    };
    Ok(ClausePrep::Lits(lits, k))
}

// ---------------------------------------------------------------------------
// Compilation into the full vocabulary.
// ---------------------------------------------------------------------------

/// Per-literal data in the normal form `beta * x_k (<|<=) sum alpha_j x_j - c`
/// with `beta >= 1` and all `alpha_j >= 0` integers.
struct NormalLit {
    beta: BigUint,
    alpha: BTreeMap<usize, BigUint>,
    c: BigInt,
    strict: bool,
}

fn normalize_literal(lit: &Literal, k: usize) -> NormalLit {
    let (coeffs, bound) = literal_integers(lit);
    let strict = lit.rel == Rel::Gt;
    let ak = coeffs.get(&k).cloned().unwrap_or_else(BigInt::zero);
    if ak.is_negative() {
        let beta = (-&ak).to_biguint().unwrap();
        let alpha = coeffs
            .iter()
            .filter(|&(&j, _)| j != k)
            .map(|(&j, a)| (j, a.to_biguint().unwrap()))
            .collect();
        NormalLit { beta, alpha, c: bound, strict }
    } else {
        // All coefficients are nonnegative; add x_k to both sides so the
        // left side is a single positive multiple of x_k.
        let mut alpha: BTreeMap<usize, BigUint> = coeffs
            .iter()
            .map(|(&j, a)| (j, a.to_biguint().unwrap()))
            .collect();
        *alpha.entry(k).or_insert_with(BigUint::zero) += BigUint::one();
        NormalLit { beta: BigUint::one(), alpha, c: bound, strict }
    }
}

impl NormalLit {
    /// `x_k <= x_j` for a single other variable: realizable as a direct slot.
    fn plain_var(&self, k: usize) -> Option<usize> {
        if self.strict || !self.beta.is_one() || !self.c.is_zero() || self.alpha.len() != 1 {
            return None;
        }
        let (&j, a) = self.alpha.iter().next().unwrap();
        (a.is_one() && j != k).then_some(j)
    }

    /// `x_k < x_j`: realizable as a single `Lt` atom.  (A unit self-
    /// coefficient cannot occur here: it would make the literal constant.)
    fn strict_plain_var(&self) -> Option<usize> {
        if !self.strict || !self.beta.is_one() || !self.c.is_zero() || self.alpha.len() != 1 {
            return None;
        }
        let (&j, a) = self.alpha.iter().next().unwrap();
        a.is_one().then_some(j)
    }
}

fn bits_of(n: &BigUint) -> Vec<u32> {
    (0..n.bits()).filter(|&i| n.bit(i)).map(|i| i as u32).collect()
}

/// Emits atoms constraining `left` to satisfy the normalized literal, i.e.
/// `beta * left (<|<=) sum alpha_j x_j - c`.
fn emit_gamma0_literal(em: &mut Emitter, nl: &NormalLit, names: &[String], left: String) {
    if let Some(j) = nl.strict_plain_var() {
        em.emit(PPAtom::Lt(left, names[j].clone()));
        return;
    }
    let mut head_base = left;
    if nl.strict {
        let u = em.fresh();
        em.emit(PPAtom::Lt(head_base, u.clone()));
        head_base = u;
    }
    // Round beta up to a power of two, moving the deficit to the right-hand
    // side as extra copies of the left variable.
    let m = if nl.beta.is_one() { 0 } else { (&nl.beta - BigUint::one()).bits() as u32 };
    let pow = BigUint::one() << m;
    let delta = &pow - &nl.beta;

    let mut zs = Vec::new();
    for (&j, a) in &nl.alpha {
        for p in bits_of(a) {
            let z = em.var_double(names[j].clone(), p);
            zs.push(z);
        }
    }
    for p in bits_of(&delta) {
        let z = em.var_double(head_base.clone(), p);
        zs.push(z);
    }
    if !nl.c.is_zero() {
        // The right-hand side carries `-c`, built from constant-power
        // contributors of the appropriate sign.
        let positive = nl.c.is_negative();
        let mag = nl.c.abs().to_biguint().unwrap();
        for p in bits_of(&mag) {
            let z = em.const_pow(p, positive);
            zs.push(z);
        }
    }

    let head = if m == 0 { head_base } else { em.s1_chain(head_base, m) };
    em.fold_sum(head, zs);
}

/// Compiles one Horn clause into the full vocabulary
/// (`Lt`/`One`/`NegOne`/`S1`/`S2`/`M0`).  The result defines the same set
/// over `var_names`.
pub fn compile_gamma0(clause: &Clause, var_names: &[String]) -> Result<PPFormula> {
    let mut em = Emitter::new(var_names);
    let lits = match prep_clause(clause, var_names.len())? {
        ClausePrep::Trivial => return Ok(em.finish(var_names.to_vec())),
        ClausePrep::Lits(lits, _) if lits.is_empty() => {
            // An unsatisfiable clause: `2 * 1 <= 1`.
            let one = em.const_var(true);
            em.emit(PPAtom::S1(one.clone(), one));
            return Ok(em.finish(var_names.to_vec()));
        }
        ClausePrep::Lits(lits, k) => (lits, k),
    };
    let (lits, k) = lits;
    let normals: Vec<NormalLit> = lits.iter().map(|lit| normalize_literal(lit, k)).collect();

    if normals.len() == 1 {
        emit_gamma0_literal(&mut em, &normals[0], var_names, var_names[k].clone());
    } else {
        let mut slots = Vec::new();
        for nl in &normals {
            if let Some(j) = nl.plain_var(k) {
                slots.push(var_names[j].clone());
            } else {
                let s = em.fresh();
                emit_gamma0_literal(&mut em, nl, var_names, s.clone());
                slots.push(s);
            }
        }
        em.join(var_names[k].clone(), slots);
    }
    Ok(em.finish(var_names.to_vec()))
}

// ---------------------------------------------------------------------------
// Compilation into the translation-invariant vocabulary.
// ---------------------------------------------------------------------------

/// Emits atoms for one literal of a tropically convex clause and returns
/// the slot variable when `needs_slot` is set (otherwise the literal is
/// attached to `x_k` directly).
fn emit_gamma_t_literal(
    em: &mut Emitter,
    lit: &Literal,
    k: usize,
    names: &[String],
    needs_slot: bool,
) -> Result<Option<String>> {
    let (coeffs, bound) = literal_integers(lit);
    let strict = lit.rel == Rel::Gt;
    let ak = coeffs.get(&k).cloned().unwrap_or_else(BigInt::zero);
    debug_assert!(ak.is_negative());
    let beta = (-&ak).to_biguint().unwrap();
    let mut alpha: Vec<(usize, BigUint)> = coeffs
        .iter()
        .filter(|&(&j, _)| j != k)
        .map(|(&j, a)| (j, a.to_biguint().unwrap()))
        .collect();
    let mut c = bound;

    // Split beta into odd part times a power of two; the odd part must
    // divide through, leaving dyadic weights.
    let q = beta.trailing_zeros().unwrap_or(0);
    let odd = &beta >> q;
    if !odd.is_one() {
        let odd_int = BigInt::from(odd.clone());
        let divisible = alpha.iter().all(|(_, a)| (a % &odd).is_zero())
            && (&c % &odd_int).is_zero();
        if !divisible {
            return Err(Error::NonDyadicWeights(format!(
                "literal weights are not dyadic multiples of the x_k coefficient ({beta})"
            )));
        }
        for (_, a) in &mut alpha {
            *a /= &odd;
        }
        c /= &odd_int;
    }
    if q as u64 > MAX_TREE_LEAVES.trailing_zeros() as u64 {
        return Err(Error::BudgetExceeded {
            what: "averaging tree leaves".into(),
            needed: 1u128 << q.min(127),
            limit: MAX_TREE_LEAVES as u128,
        });
    }
    let c_i64 = c.to_i64().filter(|v| v.unsigned_abs() <= MAX_OFFSET_CHAIN);
    let Some(c_i64) = c_i64 else {
        return Err(Error::BudgetExceeded {
            what: "unary offset chain".into(),
            needed: c.abs().to_u128().unwrap_or(u128::MAX),
            limit: MAX_OFFSET_CHAIN as u128,
        });
    };

    // Leaves of the averaging tree: alpha_j copies of x_j, with the whole
    // offset -c carried by the first leaf.
    let mut leaves = Vec::new();
    for (j, a) in &alpha {
        let copies = a.to_usize().expect("leaf multiplicity fits usize");
        for _ in 0..copies {
            leaves.push(names[*j].clone());
        }
    }
    debug_assert_eq!(leaves.len() as u64, 1u64 << q);
    if c_i64 != 0 {
        leaves[0] = em.offset_var(leaves[0].clone(), -c_i64);
    }

    // Pair leaves down to a single value; identical siblings collapse
    // without an atom.
    while leaves.len() > 2 {
        let mut next = Vec::with_capacity(leaves.len() / 2);
        for pair in leaves.chunks(2) {
            if pair[0] == pair[1] {
                next.push(pair[0].clone());
            } else {
                let p = em.fresh();
                em.emit(PPAtom::S3(p.clone(), pair[0].clone(), pair[1].clone()));
                next.push(p);
            }
        }
        leaves = next;
    }

    // Attach the root to x_k (or to a fresh slot).
    let xk = names[k].clone();
    if leaves.len() == 2 && leaves[0] != leaves[1] {
        let (a, b) = (leaves[0].clone(), leaves[1].clone());
        return Ok(match (strict, needs_slot) {
            (false, false) => {
                em.emit(PPAtom::S3(xk, a, b));
                None
            }
            (false, true) => {
                let s = em.fresh();
                em.emit(PPAtom::S3(s.clone(), a, b));
                Some(s)
            }
            (true, needs_slot) => {
                let u = em.fresh();
                em.emit(PPAtom::S3(u.clone(), a, b));
                if needs_slot {
                    let s = em.fresh();
                    em.emit(PPAtom::Lt(s.clone(), u));
                    Some(s)
                } else {
                    em.emit(PPAtom::Lt(xk, u));
                    None
                }
            }
        });
    }
    let root = leaves[0].clone();
    Ok(match (strict, needs_slot) {
        (false, false) => {
            em.emit(PPAtom::M0(xk, root.clone(), root));
            None
        }
        (false, true) => Some(root),
        (true, true) => {
            let s = em.fresh();
            em.emit(PPAtom::Lt(s.clone(), root));
            Some(s)
        }
        (true, false) => {
            em.emit(PPAtom::Lt(xk, root));
            None
        }
    })
}

/// Compiles one tropically convex Horn clause into the translation-invariant
/// vocabulary (`Lt`/`T+1`/`T-1`/`S3`/`M0`).  Literals whose normalized
/// weights are not dyadic are rejected with [`Error::NonDyadicWeights`].
pub fn compile_gamma_t(clause: &Clause, var_names: &[String]) -> Result<PPFormula> {
    let mut em = Emitter::new(var_names);
    let lits = match prep_clause(clause, var_names.len())? {
        ClausePrep::Trivial => return Ok(em.finish(var_names.to_vec())),
        ClausePrep::Lits(lits, _) if lits.is_empty() => {
            let u = em.fresh();
            em.emit(PPAtom::Lt(u.clone(), u));
            return Ok(em.finish(var_names.to_vec()));
        }
        ClausePrep::Lits(lits, k) => (lits, k),
    };
    let (lits, k) = lits;
    for lit in &lits {
        if !lit.coeff_sum().is_zero() {
            return Err(Error::NotTropical(
                "literal coefficients do not sum to zero".into(),
            ));
        }
        if !lit.coeff(k).is_negative() {
            return Err(Error::NotTropical(
                "literal lacks a negative coefficient in the shared column".into(),
            ));
        }
    }

    if lits.len() == 1 {
        emit_gamma_t_literal(&mut em, lits[0], k, var_names, false)?;
    } else {
        let mut slots = Vec::new();
        for lit in &lits {
            let slot = emit_gamma_t_literal(&mut em, lit, k, var_names, true)?;
            slots.push(slot.expect("slot requested"));
        }
        em.join(var_names[k].clone(), slots);
    }
    Ok(em.finish(var_names.to_vec()))
}

// ---------------------------------------------------------------------------
// Lowering back to clause form, evaluation, and equivalence.
// ---------------------------------------------------------------------------

fn rat(n: i64) -> Rational {
    Rational::from_int(n)
}

/// Lowers a primitive-positive formula to clause form.  The returned
/// formula lists the free variables first, then the bound variables, then
/// the constant variables; the second component is the number of trailing
/// existential variables (bound plus constants).
pub fn pp_to_horn(pp: &PPFormula) -> Result<(Formula, usize)> {
    let mut var_names: Vec<String> = pp.free_vars.clone();
    var_names.extend(pp.bound_vars.iter().cloned());
    let consts: Vec<(&String, bool)> = pp
        .const_one
        .iter()
        .map(|u| (u, true))
        .chain(pp.const_neg_one.iter().map(|u| (u, false)))
        .collect();
    for (u, _) in &consts {
        var_names.push((*u).clone());
    }
    let mut index = HashMap::new();
    for (i, name) in var_names.iter().enumerate() {
        if index.insert(name.clone(), i).is_some() {
            return Err(Error::InvalidInput(format!("duplicate variable name {name}")));
        }
    }
    let ex = pp.bound_vars.len() + consts.len();
    let look = |name: &str| -> Result<usize> {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("undeclared variable {name}")))
    };

    let mut clauses = Vec::new();
    let pin = |clauses: &mut Vec<Clause>, idx: usize, value: i64| {
        clauses.push(Clause::new(vec![Literal::new(
            vec![(idx, rat(1))],
            InputRel::Geq,
            rat(value),
        )]));
        clauses.push(Clause::new(vec![Literal::new(
            vec![(idx, rat(-1))],
            InputRel::Geq,
            rat(-value),
        )]));
    };
    for (u, is_one) in &consts {
        let idx = look(u)?;
        pin(&mut clauses, idx, if *is_one { 1 } else { -1 });
    }
    for atom in &pp.atoms {
        match atom {
            PPAtom::Lt(x, y) => clauses.push(Clause::new(vec![Literal::new(
                vec![(look(y)?, rat(1)), (look(x)?, rat(-1))],
                InputRel::Gt,
                rat(0),
            )])),
            PPAtom::One(u) => pin(&mut clauses, look(u)?, 1),
            PPAtom::NegOne(u) => pin(&mut clauses, look(u)?, -1),
            PPAtom::S1(x, y) => clauses.push(Clause::new(vec![Literal::new(
                vec![(look(y)?, rat(1)), (look(x)?, rat(-2))],
                InputRel::Geq,
                rat(0),
            )])),
            PPAtom::S2(x, y, z) => clauses.push(Clause::new(vec![Literal::new(
                vec![(look(y)?, rat(1)), (look(z)?, rat(1)), (look(x)?, rat(-1))],
                InputRel::Geq,
                rat(0),
            )])),
            PPAtom::M0(x, y, z) => {
                let l1 = Literal::new(
                    vec![(look(y)?, rat(1)), (look(x)?, rat(-1))],
                    InputRel::Geq,
                    rat(0),
                );
                let l2 = Literal::new(
                    vec![(look(z)?, rat(1)), (look(x)?, rat(-1))],
                    InputRel::Geq,
                    rat(0),
                );
                let lits = if l1 == l2 { vec![l1] } else { vec![l1, l2] };
                clauses.push(Clause::new(lits));
            }
            PPAtom::TPlus(x, y) => clauses.push(Clause::new(vec![Literal::new(
                vec![(look(y)?, rat(1)), (look(x)?, rat(-1))],
                InputRel::Geq,
                rat(-1),
            )])),
            PPAtom::TMinus(x, y) => clauses.push(Clause::new(vec![Literal::new(
                vec![(look(y)?, rat(1)), (look(x)?, rat(-1))],
                InputRel::Geq,
                rat(1),
            )])),
            PPAtom::S3(x, y, z) => clauses.push(Clause::new(vec![Literal::new(
                vec![(look(y)?, rat(1)), (look(z)?, rat(1)), (look(x)?, rat(-2))],
                InputRel::Geq,
                rat(0),
            )])),
        }
    }
    Ok((Formula { var_names, clauses }, ex))
}

/// Decides whether the rational point `values` (over the free variables)
/// satisfies the primitive-positive formula.
pub fn pp_eval(pp: &PPFormula, values: &[Rational], budgets: &Budgets) -> Result<bool> {
    let (mut f, ex) = pp_to_horn(pp)?;
    let free = f.num_vars() - ex;
    if values.len() != free {
        return Err(Error::DimensionMismatch(format!(
            "expected {free} values, got {}",
            values.len()
        )));
    }
    for (i, v) in values.iter().enumerate() {
        f.clauses.push(Clause::new(vec![Literal::new(
            vec![(i, rat(1))],
            InputRel::Geq,
            v.clone(),
        )]));
        f.clauses.push(Clause::new(vec![Literal::new(
            vec![(i, rat(-1))],
            InputRel::Geq,
            -v,
        )]));
    }
    Ok(brute_force_sat(&f, budgets)?.is_sat())
}

fn unique_literals(clause: &Clause) -> Vec<&Literal> {
    let mut out: Vec<&Literal> = Vec::new();
    for lit in &clause.literals {
        if !out.iter().any(|l| *l == lit) {
            out.push(lit);
        }
    }
    out
}

/// Enumerates the polyhedra (one per selection of a literal from each
/// clause) of a formula, projected onto its leading `free` variables.
/// Infeasible selections are dropped.
fn disjunct_polyhedra(f: &Formula, ex: usize, budgets: &Budgets) -> Result<Vec<LinSystem>> {
    let n = f.num_vars();
    let free = n - ex;
    let clause_lits: Vec<Vec<&Literal>> = f.clauses.iter().map(unique_literals).collect();
    if clause_lits.iter().any(|ls| ls.is_empty()) {
        return Ok(Vec::new());
    }
    let mut total: u64 = 1;
    for ls in &clause_lits {
        total = total.saturating_mul(ls.len() as u64);
    }
    if total > budgets.selection_limit {
        return Err(Error::BudgetExceeded {
            what: "disjunct selections".into(),
            needed: total as u128,
            limit: budgets.selection_limit as u128,
        });
    }
    let keep: BTreeSet<usize> = (0..free).collect();
    let mut polys = Vec::new();
    let mut counters = vec![0usize; clause_lits.len()];
    loop {
        let mut sys = LinSystem::new(n);
        for (ci, &li) in counters.iter().enumerate() {
            sys.push(clause_lits[ci][li].to_lin_row(n));
        }
        let projected = fm_project(&sys, &keep)?;
        if fm_feasible(&projected)?.is_feasible() {
            let mut small = LinSystem::new(free);
            for row in &projected.rows {
                debug_assert!(row.coeffs[free..].iter().all(|c| c.is_zero()));
                small.push(LinRow::new(
                    row.coeffs[..free].to_vec(),
                    row.rel,
                    row.bound.clone(),
                ));
            }
            polys.push(small);
        }
        // Advance the mixed-radix selection counter.
        let mut pos = 0;
        loop {
            if pos == counters.len() {
                return Ok(polys);
            }
            counters[pos] += 1;
            if counters[pos] < clause_lits[pos].len() {
                break;
            }
            counters[pos] = 0;
            pos += 1;
        }
    }
}

/// Does the union of `qs` cover the polyhedron `p`?  Splits `p` along the
/// first member's faces and recurses on the remainder.
fn union_covers(p: &LinSystem, qs: &[LinSystem], fuel: &mut u64, limit: u64) -> Result<bool> {
    if *fuel == 0 {
        return Err(Error::BudgetExceeded {
            what: "equivalence cover splits".into(),
            needed: limit as u128 + 1,
            limit: limit as u128,
        });
    }
    *fuel -= 1;
    if !fm_feasible(p)?.is_feasible() {
        return Ok(true);
    }
    let Some((q, rest)) = qs.split_first() else {
        return Ok(false);
    };
    // p ⊆ q ∪ rest  iff  every piece of p \ q is covered by rest.
    let mut prefix = p.clone();
    for row in &q.rows {
        let mut piece = prefix.clone();
        piece.push(negate_row(row));
        if !union_covers(&piece, rest, fuel, limit)? {
            return Ok(false);
        }
        prefix.push(row.clone());
    }
    Ok(true)
}

/// Is every polyhedron of `a_polys` (over the free variables) contained in
/// the set defined by `b` (with `b_ex` trailing existential variables)?
fn formula_covers(
    a_polys: &[LinSystem],
    b: &Formula,
    b_ex: usize,
    free: usize,
    budgets: &Budgets,
    fuel: &mut u64,
) -> Result<bool> {
    if b_ex == 0 {
        // No existentials: a polyhedron is inside a clause conjunction iff
        // adding the negation of any single clause is infeasible.
        for p in a_polys {
            for clause in &b.clauses {
                let mut sys = p.clone();
                for lit in unique_literals(clause) {
                    sys.push(negate_row(&lit.to_lin_row(free)));
                }
                if fm_feasible(&sys)?.is_feasible() {
                    return Ok(false);
                }
            }
        }
        return Ok(true);
    }
    let qs = disjunct_polyhedra(b, b_ex, budgets)?;
    for p in a_polys {
        if !union_covers(p, &qs, fuel, budgets.selection_limit)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Decides whether two clause formulas define the same set over their free
/// variables.  Each formula may designate a number of trailing variables as
/// existentially quantified; the free prefixes must have equal length and
/// correspond positionally.
pub fn equivalence_check(
    a: &Formula,
    a_ex: usize,
    b: &Formula,
    b_ex: usize,
    budgets: &Budgets,
) -> Result<bool> {
    let free_a = a
        .num_vars()
        .checked_sub(a_ex)
        .ok_or_else(|| Error::InvalidInput("existential count exceeds variable count".into()))?;
    let free_b = b
        .num_vars()
        .checked_sub(b_ex)
        .ok_or_else(|| Error::InvalidInput("existential count exceeds variable count".into()))?;
    if free_a != free_b {
        return Err(Error::DimensionMismatch(format!(
            "free variable counts differ: {free_a} vs {free_b}"
        )));
    }
    let mut fuel = budgets.selection_limit;
    let a_polys = disjunct_polyhedra(a, a_ex, budgets)?;
    if !formula_covers(&a_polys, b, b_ex, free_a, budgets, &mut fuel)? {
        return Ok(false);
    }
    let b_polys = disjunct_polyhedra(b, b_ex, budgets)?;
    formula_covers(&b_polys, a, a_ex, free_a, budgets, &mut fuel)
}

// ---------------------------------------------------------------------------
