//! Stochastic mean-payoff games built from operator systems, with exact
//! limiting-average and discounted values at small scale.
//!
//! A Max component becomes a MAX vertex (one edge per argument, payoff =
//! offset), Min a MIN vertex, and a weighted average a chance vertex whose
//! edge probabilities are the normalized weights and whose global offset
//! rides on every out-edge.  Values are computed by enumerating pure
//! stationary strategy pairs; each pair induces a finite Markov chain that
//! is evaluated exactly (recurrent classes, stationary distributions, and
//! transient absorption solved over ℚ).  The value signs cross-validate
//! the primal/dual solvers: the strict primal is satisfiable iff the
//! limiting-average value is positive at every vertex, and the non-strict
//! dual is satisfiable iff it is ≤ 0 somewhere.

use std::collections::HashMap;
use std::fmt;

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::numeric::Rational;
use crate::tropical::{solve_dual, solve_primal, DualCertificate, Operator, OperatorSystem};

/// Who controls a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Max,
    Min,
    Stoch,
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKind::Max => write!(f, "MAX"),
            VertexKind::Min => write!(f, "MIN"),
            VertexKind::Stoch => write!(f, "STOCH"),
        }
    }
}

/// A labeled edge; `prob` is present exactly on chance-vertex edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub payoff: Rational,
    pub prob: Option<Rational>,
}

/// A finite stochastic mean-payoff game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    pub kinds: Vec<VertexKind>,
    pub names: Vec<String>,
    pub edges: Vec<Edge>,
}

/// Exact value per vertex.
pub type ValueVector = Vec<Rational>;

impl Game {
    /// Validates out-degrees and probability labels.
    pub fn new(kinds: Vec<VertexKind>, names: Vec<String>, edges: Vec<Edge>) -> Result<Game> {
        let game = Game { kinds, names, edges };
        game.validate()?;
        Ok(game)
    }

    pub fn num_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vertices();
        if self.names.len() != n {
            return Err(Error::InvalidGame("vertex name count mismatch".into()));
        }
        for e in &self.edges {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidGame(format!(
                    "edge {} -> {} out of range",
                    e.from, e.to
                )));
            }
            match (self.kinds[e.from], &e.prob) {
                (VertexKind::Stoch, None) => {
                    return Err(Error::InvalidGame(format!(
                        "chance vertex {} has an edge without probability",
                        self.names[e.from]
                    )))
                }
                (VertexKind::Stoch, Some(p)) if !p.is_positive() => {
                    return Err(Error::InvalidGame(format!(
                        "chance vertex {} has a non-positive edge probability",
                        self.names[e.from]
                    )))
                }
                (VertexKind::Max | VertexKind::Min, Some(_)) => {
                    return Err(Error::InvalidGame(format!(
                        "player vertex {} has a probability-labeled edge",
                        self.names[e.from]
                    )))
                }
                _ => {}
            }
        }
        for v in 0..n {
            let out: Vec<&Edge> = self.edges.iter().filter(|e| e.from == v).collect();
            if out.is_empty() {
                return Err(Error::InvalidGame(format!(
                    "vertex {} has no out-edge",
                    self.names[v]
                )));
            }
            if self.kinds[v] == VertexKind::Stoch {
                let mut total = Rational::zero();
                for e in &out {
                    total += e.prob.as_ref().expect("validated above");
                }
                if total != Rational::one() {
                    return Err(Error::InvalidGame(format!(
                        "probabilities out of {} sum to {}, not 1",
                        self.names[v], total
                    )));
                }
            }
        }
        Ok(())
    }

    fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_vertices()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from].push(i);
        }
        out
    }

    /// Parses the text format: a header `vertices: v1:MAX v2:MIN v3:STOCH`
    /// followed by edges `v1 -> v2 payoff 3/2` (`prob 1/3` on chance
    /// edges); `#` comments allowed.
    pub fn parse(text: &str) -> Result<Game> {
        let mut kinds = Vec::new();
        let mut names = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut saw_header = false;
        for (li, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: li + 1, col: 1, msg };
            if !saw_header {
                let Some(rest) = line.strip_prefix("vertices:") else {
                    return Err(err("expected `vertices:` header".into()));
                };
                for tok in rest.split_whitespace() {
                    let (name, kind) = tok
                        .split_once(':')
                        .ok_or_else(|| err(format!("expected `name:KIND`, found `{tok}`")))?;
                    let kind = match kind {
                        "MAX" => VertexKind::Max,
                        "MIN" => VertexKind::Min,
                        "STOCH" => VertexKind::Stoch,
                        other => return Err(err(format!("unknown vertex kind `{other}`"))),
                    };
                    if index.insert(name.to_string(), names.len()).is_some() {
                        return Err(err(format!("vertex `{name}` declared twice")));
                    }
                    names.push(name.to_string());
                    kinds.push(kind);
                }
                saw_header = true;
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let arrow_ok = toks.len() >= 5 && toks[1] == "->" && toks[3] == "payoff";
            if !arrow_ok || (toks.len() != 5 && !(toks.len() == 7 && toks[5] == "prob")) {
                return Err(err("expected `from -> to payoff p [prob q]`".into()));
            }
            let from = *index
                .get(toks[0])
                .ok_or_else(|| err(format!("unknown vertex `{}`", toks[0])))?;
            let to = *index
                .get(toks[2])
                .ok_or_else(|| err(format!("unknown vertex `{}`", toks[2])))?;
            let payoff: Rational = toks[4]
                .parse()
                .map_err(|_| err(format!("invalid payoff `{}`", toks[4])))?;
            let prob = if toks.len() == 7 {
                Some(
                    toks[6]
                        .parse()
                        .map_err(|_| err(format!("invalid probability `{}`", toks[6])))?,
                )
            } else {
                None
            };
            edges.push(Edge { from, to, payoff, prob });
        }
        if !saw_header {
            return Err(Error::Parse { line: 1, col: 1, msg: "missing `vertices:` header".into() });
        }
        Game::new(kinds, names, edges)
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vertices:")?;
        for (name, kind) in self.names.iter().zip(&self.kinds) {
            write!(f, " {name}:{kind}")?;
        }
        writeln!(f)?;
        for e in &self.edges {
            write!(f, "{} -> {} payoff {}", self.names[e.from], self.names[e.to], e.payoff)?;
            if let Some(p) = &e.prob {
                write!(f, " prob {p}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Maps each operator-system component to a game vertex: one edge per
/// argument with the offset as payoff; average components become chance
/// vertices with normalized-weight probabilities and the global offset
/// added to every out-edge payoff.  Offsets must be plain rationals.
pub fn build_game(o: &OperatorSystem) -> Result<Game> {
    let n = o.dim();
    let mut kinds = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for (i, op) in o.ops.iter().enumerate() {
        match op {
            Operator::Max(args) | Operator::Min(args) => {
                kinds.push(if matches!(op, Operator::Max(_)) { VertexKind::Max } else { VertexKind::Min });
                for a in args {
                    if !a.offset.is_rational() {
                        return Err(Error::InvalidGame(format!(
                            "component {} has an eps-carrying offset; games are rational-valued",
                            i + 1
                        )));
                    }
                    edges.push(Edge { from: i, to: a.var, payoff: a.offset.std.clone(), prob: None });
                }
            }
            Operator::Avg { args, offset } => {
                kinds.push(VertexKind::Stoch);
                let mut total = Rational::zero();
                for (w, _) in args {
                    total += w;
                }
                let inv = total.recip().expect("positive weights");
                // Parallel edges to the same target are merged so the
                // probability labels stay well-formed.
                let mut merged: Vec<(usize, Rational)> = Vec::new();
                for (w, v) in args {
                    match merged.iter_mut().find(|(tv, _)| tv == v) {
                        Some((_, p)) => *p = &*p + &(w * &inv),
                        None => merged.push((*v, w * &inv)),
                    }
                }
                for (v, p) in merged {
                    edges.push(Edge { from: i, to: v, payoff: offset.clone(), prob: Some(p) });
                }
            }
        }
    }
    let names = (1..=n).map(|i| format!("v{i}")).collect();
    Game::new(kinds, names, edges)
}

// ---------------------------------------------------------------------------
// Exact linear algebra over ℚ
// ---------------------------------------------------------------------------

/// Gaussian elimination; returns `None` when the matrix is singular.
fn solve_linear(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip().ok()?;
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for j in col..n {
                let delta = &factor * &a[col][j];
                a[row][j] = &a[row][j] - &delta;
            }
            let delta = &factor * &b[col];
            b[row] = &b[row] - &delta;
        }
    }
    Some(b)
}

/// Strongly connected components via transitive closure (the games here
/// are tiny); returns a component id per vertex.
fn components(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut reach = adj.to_vec();
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if comp[v] != usize::MAX {
            continue;
        }
        comp[v] = next;
        for w in v + 1..n {
            if comp[w] == usize::MAX && reach[v][w] && reach[w][v] {
                comp[w] = next;
            }
        }
        next += 1;
    }
    comp
}

/// Expected limiting-average payoff from every start of a finite Markov
/// chain with row-stochastic matrix `p` and per-state reward `r`:
/// stationary gain on each closed class, absorption-weighted mixture on
/// transient states.
fn chain_gains(p: &[Vec<Rational>], r: &[Rational]) -> Result<Vec<Rational>> {
    let n = p.len();
    let adj: Vec<Vec<bool>> = p
        .iter()
        .map(|row| row.iter().map(Rational::is_positive).collect())
        .collect();
    let comp = components(&adj);
    let num_comp = comp.iter().copied().max().map_or(0, |m| m + 1);
    // A component is recurrent (closed) iff no positive transition leaves it.
    let mut closed = vec![true; num_comp];
    for v in 0..n {
        for w in 0..n {
            if adj[v][w] && comp[w] != comp[v] {
                closed[comp[v]] = false;
            }
        }
    }
    let mut gains: Vec<Option<Rational>> = vec![None; n];
    for c in 0..num_comp {
        if !closed[c] {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
        let m = members.len();
        // Stationary distribution: m−1 balance equations plus Σμ = 1.
        let mut a = vec![vec![Rational::zero(); m]; m];
        let mut b = vec![Rational::zero(); m];
        for (row, &w) in members.iter().enumerate().take(m - 1) {
            for (colidx, &v) in members.iter().enumerate() {
                a[row][colidx] = p[v][w].clone();
                if v == w {
                    a[row][colidx] = &a[row][colidx] - &Rational::one();
                }
            }
        }
        for colidx in 0..m {
            a[m - 1][colidx] = Rational::one();
        }
        b[m - 1] = Rational::one();
        let mu = solve_linear(a, b).ok_or_else(|| {
            Error::InternalInconsistency("stationary distribution system is singular".into())
        })?;
        let mut gain = Rational::zero();
        for (idx, &v) in members.iter().enumerate() {
            gain += &(&mu[idx] * &r[v]);
        }
        for &v in &members {
            gains[v] = Some(gain.clone());
        }
    }
    // Transient states: g = Q·g + (transition-weighted recurrent gains).
    let transient: Vec<usize> = (0..n).filter(|&v| gains[v].is_none()).collect();
    if !transient.is_empty() {
        let t = transient.len();
        let pos = |v: usize| transient.iter().position(|&x| x == v);
        let mut a = vec![vec![Rational::zero(); t]; t];
        let mut b = vec![Rational::zero(); t];
        for (row, &v) in transient.iter().enumerate() {
            a[row][row] = Rational::one();
            for w in 0..n {
                if p[v][w].is_zero() {
                    continue;
                }
                match pos(w) {
                    Some(colidx) => a[row][colidx] = &a[row][colidx] - &p[v][w],
                    None => {
                        let g = gains[w].clone().expect("recurrent gain computed");
                        b[row] += &(&p[v][w] * &g);
                    }
                }
            }
        }
        let x = solve_linear(a, b).ok_or_else(|| {
            Error::InternalInconsistency("transient absorption system is singular".into())
        })?;
        for (idx, &v) in transient.iter().enumerate() {
            gains[v] = Some(x[idx].clone());
        }
    }
    Ok(gains.into_iter().map(|g| g.expect("all states covered")).collect())
}

/// The Markov chain induced by fixing one out-edge per player vertex.
fn induced_chain(g: &Game, out: &[Vec<usize>], choice: &[Option<usize>]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let n = g.num_vertices();
    let mut p = vec![vec![Rational::zero(); n]; n];
    let mut r = vec![Rational::zero(); n];
    for v in 0..n {
        match g.kinds[v] {
            VertexKind::Stoch => {
                for &ei in &out[v] {
                    let e = &g.edges[ei];
                    let q = e.prob.clone().expect("validated");
                    p[v][e.to] = &p[v][e.to] + &q;
                    r[v] += &(&q * &e.payoff);
                }
            }
            VertexKind::Max | VertexKind::Min => {
                let ei = out[v][choice[v].expect("player vertex has a choice")];
                let e = &g.edges[ei];
                p[v][e.to] = &p[v][e.to] + &Rational::one();
                r[v] = e.payoff.clone();
            }
        }
    }
    (p, r)
}

/// Iterator state over one player's pure stationary strategies.
struct StrategyIter {
    vertices: Vec<usize>,
    sizes: Vec<usize>,
    counter: Vec<usize>,
    done: bool,
}

impl StrategyIter {
    fn new(g: &Game, out: &[Vec<usize>], kind: VertexKind) -> Self {
        let vertices: Vec<usize> = (0..g.num_vertices()).filter(|&v| g.kinds[v] == kind).collect();
        let sizes = vertices.iter().map(|&v| out[v].len()).collect();
        let counter = vec![0; vertices.len()];
        StrategyIter { vertices, sizes, counter, done: false }
    }

    fn count(&self) -> u128 {
        self.sizes.iter().fold(1u128, |acc, &s| acc.saturating_mul(s as u128))
    }

    fn apply(&self, choice: &mut [Option<usize>]) {
        for (i, &v) in self.vertices.iter().enumerate() {
            choice[v] = Some(self.counter[i]);
        }
    }

    fn advance(&mut self) {
        for i in (0..self.counter.len()).rev() {
            self.counter[i] += 1;
            if self.counter[i] < self.sizes[i] {
                return;
            }
            self.counter[i] = 0;
        }
        self.done = true;
    }

    fn reset(&mut self) {
        self.counter.iter_mut().for_each(|c| *c = 0);
        self.done = false;
    }
}

fn maxmin_over_pairs<F>(g: &Game, budgets: &Budgets, mut value_of: F) -> Result<ValueVector>
where
    F: FnMut(&[Option<usize>]) -> Result<Vec<Rational>>,
{
    g.validate()?;
    let out = g.out_edges();
    let mut max_iter = StrategyIter::new(g, &out, VertexKind::Max);
    let mut min_iter = StrategyIter::new(g, &out, VertexKind::Min);
    let pairs = max_iter.count().saturating_mul(min_iter.count());
    if pairs > budgets.pair_limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "pure stationary strategy pairs".into(),
            needed: pairs,
            limit: budgets.pair_limit as u128,
        });
    }
    let n = g.num_vertices();
    let mut best: Option<Vec<Rational>> = None;
    while !max_iter.done {
        min_iter.reset();
        let mut worst: Option<Vec<Rational>> = None;
        while !min_iter.done {
            let mut choice: Vec<Option<usize>> = vec![None; n];
            max_iter.apply(&mut choice);
            min_iter.apply(&mut choice);
            let vals = value_of(&choice)?;
            worst = Some(match worst {
                None => vals,
                Some(acc) => acc.into_iter().zip(vals).map(|(a, b)| a.min(b)).collect(),
            });
            min_iter.advance();
        }
        let worst = worst.expect("at least one MIN strategy");
        best = Some(match best {
            None => worst,
            Some(acc) => acc.into_iter().zip(worst).map(|(a, b)| a.max(b)).collect(),
        });
        max_iter.advance();
    }
    Ok(best.expect("at least one MAX strategy"))
}

/// Exact limiting-average value ν₁ per start vertex: the max over MAX
/// strategies of the min over MIN strategies of the induced chain's gain.
pub fn limiting_average_values(g: &Game, budgets: &Budgets) -> Result<ValueVector> {
    let out = g.out_edges();
    maxmin_over_pairs(g, budgets, |choice| {
        let (p, r) = induced_chain(g, &out, choice);
        chain_gains(&p, &r)
    })
}

/// Exact discounted value ν_β per start vertex, β ∈ [0,1): solves
/// v = (1−β)·r + β·P·v for each strategy pair and takes the maxmin.  The
/// result is verified against the one-step optimality equation.
pub fn discounted_values(g: &Game, beta: &Rational, budgets: &Budgets) -> Result<ValueVector> {
    if beta.is_negative() || beta >= &Rational::one() {
        return Err(Error::InvalidInput(format!("discount factor {beta} outside [0, 1)")));
    }
    let out = g.out_edges();
    let one_minus = &Rational::one() - beta;
    let values = maxmin_over_pairs(g, budgets, |choice| {
        let (p, r) = induced_chain(g, &out, choice);
        let n = p.len();
        let mut a = vec![vec![Rational::zero(); n]; n];
        let mut b = vec![Rational::zero(); n];
        for v in 0..n {
            a[v][v] = Rational::one();
            for w in 0..n {
                if !p[v][w].is_zero() {
                    let scaled = beta * &p[v][w];
                    a[v][w] = &a[v][w] - &scaled;
                }
            }
            b[v] = &one_minus * &r[v];
        }
        solve_linear(a, b)
            .ok_or_else(|| Error::InternalInconsistency("discounted system is singular".into()))
    })?;
    // One-step optimality must hold exactly.
    for v in 0..g.num_vertices() {
        let step = |e: &Edge| -> Rational { &(&one_minus * &e.payoff) + &(beta * &values[e.to]) };
        let outs: Vec<Rational> = g.edges.iter().filter(|e| e.from == v).map(step).collect();
        let expect = match g.kinds[v] {
            VertexKind::Max => outs.into_iter().reduce(|a, b| a.max(b)).expect("out-degree ≥ 1"),
            VertexKind::Min => outs.into_iter().reduce(|a, b| a.min(b)).expect("out-degree ≥ 1"),
            VertexKind::Stoch => {
                let mut acc = Rational::zero();
                for e in g.edges.iter().filter(|e| e.from == v) {
                    acc += &(e.prob.as_ref().expect("validated") * &step(e));
                }
                acc
            }
        };
        if expect != values[v] {
            return Err(Error::InternalInconsistency(format!(
                "discounted value at {} violates the one-step equation: {} vs {}",
                g.names[v], values[v], expect
            )));
        }
    }
    Ok(values)
}

/// Verdicts from cross-checking game values against the two solvers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameCheckReport {
    pub values: ValueVector,
    pub primal: Option<Vec<Rational>>,
    pub dual: Option<DualCertificate>,
}

/// Asserts both sign laws on one system: strict primal satisfiable iff
/// ν₁ > 0 everywhere, non-strict dual satisfiable iff ν₁ ≤ 0 somewhere.
pub fn cross_check_duality(o: &OperatorSystem, budgets: &Budgets) -> Result<GameCheckReport> {
    let game = build_game(o)?;
    let values = limiting_average_values(&game, budgets)?;
    let primal = solve_primal(o, true, budgets)?;
    let dual = solve_dual(o, false, budgets)?;
    let all_positive = values.iter().all(Rational::is_positive);
    if primal.is_some() != all_positive {
        return Err(Error::InternalInconsistency(format!(
            "primal satisfiability ({}) disagrees with all-positive values ({})",
            primal.is_some(),
            all_positive
        )));
    }
    if dual.is_some() != !all_positive {
        return Err(Error::InternalInconsistency(format!(
            "dual satisfiability ({}) disagrees with a non-positive value existing ({})",
            dual.is_some(),
            !all_positive
        )));
    }
    Ok(GameCheckReport { values, primal, dual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::EpsNum;
    use crate::tropical::OpArg;

    fn r(p: i64) -> Rational {
        Rational::from_int(p)
    }

    fn rq(p: i64, q: i64) -> Rational {
        Rational::new(p, q).unwrap()
    }

    fn max1(var: usize, k: i64) -> Operator {
        Operator::Max(vec![OpArg::new(var, EpsNum::from_rational(r(k)))])
    }

    #[test]
    fn build_game_examples() {
        let o = OperatorSystem::new(vec![max1(0, 1)]).unwrap();
        let g = build_game(&o).unwrap();
        assert_eq!(g.kinds, vec![VertexKind::Max]);
        assert_eq!(g.edges, vec![Edge { from: 0, to: 0, payoff: r(1), prob: None }]);

        let o = OperatorSystem::new(vec![
            max1(1, 0),
            max1(0, 0),
            Operator::Avg { args: vec![(r(2), 0), (r(1), 1)], offset: r(0) },
        ])
        .unwrap();
        let g = build_game(&o).unwrap();
        assert_eq!(g.kinds[2], VertexKind::Stoch);
        let stoch: Vec<&Edge> = g.edges.iter().filter(|e| e.from == 2).collect();
        assert_eq!(stoch[0].prob, Some(rq(2, 3)));
        assert_eq!(stoch[1].prob, Some(rq(1, 3)));
        assert!(stoch.iter().all(|e| e.payoff.is_zero()));

        let o = OperatorSystem::new(vec![
            Operator::Min(vec![OpArg::plain(0), OpArg::new(1, EpsNum::from_rational(r(5)))]),
            max1(0, -5),
        ])
        .unwrap();
        let g = build_game(&o).unwrap();
        assert_eq!(g.kinds, vec![VertexKind::Min, VertexKind::Max]);
        let payoffs: Vec<Rational> = g.edges.iter().map(|e| e.payoff.clone()).collect();
        assert_eq!(payoffs, vec![r(0), r(5), r(-5)]);
    }

    #[test]
    fn build_game_rejects_eps_offsets() {
        let o = OperatorSystem::new(vec![Operator::Max(vec![OpArg::new(0, -EpsNum::eps_unit())])]).unwrap();
        assert!(matches!(build_game(&o), Err(Error::InvalidGame(_))));
    }

    #[test]
    fn avg_offset_rides_every_edge() {
        let o = OperatorSystem::new(vec![
            Operator::Avg { args: vec![(r(1), 0), (r(1), 1)], offset: rq(1, 3) },
            max1(1, 0),
        ])
        .unwrap();
        let g = build_game(&o).unwrap();
        for e in g.edges.iter().filter(|e| e.from == 0) {
            assert_eq!(e.payoff, rq(1, 3));
        }
    }

    fn self_loop_game(payoff: i64) -> Game {
        Game::new(
            vec![VertexKind::Max],
            vec!["v1".into()],
            vec![Edge { from: 0, to: 0, payoff: r(payoff), prob: None }],
        )
        .unwrap()
    }

    #[test]
    fn limiting_average_self_loop() {
        let budgets = Budgets::default();
        assert_eq!(limiting_average_values(&self_loop_game(1), &budgets).unwrap(), vec![r(1)]);
    }

    #[test]
    fn limiting_average_two_cycle_alternates() {
        let g = Game::new(
            vec![VertexKind::Max, VertexKind::Min],
            vec!["v1".into(), "v2".into()],
            vec![
                Edge { from: 0, to: 1, payoff: r(1), prob: None },
                Edge { from: 1, to: 0, payoff: r(-1), prob: None },
            ],
        )
        .unwrap();
        assert_eq!(limiting_average_values(&g, &Budgets::default()).unwrap(), vec![r(0), r(0)]);
    }

    #[test]
    fn limiting_average_mixes_absorption_classes() {
        let g = Game::new(
            vec![VertexKind::Stoch, VertexKind::Max, VertexKind::Max],
            vec!["v1".into(), "v2".into(), "v3".into()],
            vec![
                Edge { from: 0, to: 1, payoff: r(0), prob: Some(rq(1, 2)) },
                Edge { from: 0, to: 2, payoff: r(0), prob: Some(rq(1, 2)) },
                Edge { from: 1, to: 1, payoff: r(2), prob: None },
                Edge { from: 2, to: 2, payoff: r(4), prob: None },
            ],
        )
        .unwrap();
        let vals = limiting_average_values(&g, &Budgets::default()).unwrap();
        assert_eq!(vals, vec![r(3), r(2), r(4)]);
    }

    #[test]
    fn discounted_self_loop_and_cycle() {
        let budgets = Budgets::default();
        let half = rq(1, 2);
        assert_eq!(discounted_values(&self_loop_game(1), &half, &budgets).unwrap(), vec![r(1)]);

        let g = Game::new(
            vec![VertexKind::Max, VertexKind::Max],
            vec!["v1".into(), "v2".into()],
            vec![
                Edge { from: 0, to: 1, payoff: r(1), prob: None },
                Edge { from: 1, to: 0, payoff: r(-1), prob: None },
            ],
        )
        .unwrap();
        let vals = discounted_values(&g, &half, &budgets).unwrap();
        assert_eq!(vals, vec![rq(1, 3), rq(-1, 3)]);

        // β = 0 is the myopic one-step game.
        let vals = discounted_values(&g, &r(0), &budgets).unwrap();
        assert_eq!(vals, vec![r(1), r(-1)]);

        assert!(discounted_values(&g, &r(1), &budgets).is_err());
        assert!(discounted_values(&g, &r(-1), &budgets).is_err());
    }

    #[test]
    fn min_player_picks_the_worse_edge() {
        let g = Game::new(
            vec![VertexKind::Min, VertexKind::Max, VertexKind::Max],
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                Edge { from: 0, to: 1, payoff: r(0), prob: None },
                Edge { from: 0, to: 2, payoff: r(0), prob: None },
                Edge { from: 1, to: 1, payoff: r(7), prob: None },
                Edge { from: 2, to: 2, payoff: r(-7), prob: None },
            ],
        )
        .unwrap();
        let vals = limiting_average_values(&g, &Budgets::default()).unwrap();
        assert_eq!(vals[0], r(-7));
    }

    #[test]
    fn cross_check_sign_laws() {
        let budgets = Budgets::default();
        let plus = OperatorSystem::new(vec![max1(0, 1)]).unwrap();
        let report = cross_check_duality(&plus, &budgets).unwrap();
        assert_eq!(report.values, vec![r(1)]);
        assert!(report.primal.is_some() && report.dual.is_none());

        let minus = OperatorSystem::new(vec![max1(0, -1)]).unwrap();
        let report = cross_check_duality(&minus, &budgets).unwrap();
        assert_eq!(report.values, vec![r(-1)]);
        assert!(report.primal.is_none() && report.dual.is_some());

        let zero = OperatorSystem::new(vec![max1(0, 0)]).unwrap();
        let report = cross_check_duality(&zero, &budgets).unwrap();
        assert_eq!(report.values, vec![r(0)]);
        assert!(report.primal.is_none() && report.dual.is_some());
    }

    #[test]
    fn parse_display_roundtrip() {
        let text = "vertices: v1:MAX v2:MIN v3:STOCH\nv1 -> v2 payoff 3/2\nv2 -> v3 payoff -1\nv3 -> v1 payoff 0 prob 1/3\nv3 -> v2 payoff 0 prob 2/3\n";
        let g = Game::parse(text).unwrap();
        assert_eq!(g.to_string(), text);
        assert_eq!(g.kinds, vec![VertexKind::Max, VertexKind::Min, VertexKind::Stoch]);
    }

    #[test]
    fn validation_rejects_malformed_games() {
        // Missing out-edge.
        assert!(Game::parse("vertices: a:MAX b:MAX\na -> b payoff 0\n").is_err());
        // Probabilities off a player vertex.
        assert!(Game::parse("vertices: a:MAX\na -> a payoff 0 prob 1\n").is_err());
        // Chance probabilities not summing to 1.
        assert!(Game::parse("vertices: a:STOCH\na -> a payoff 0 prob 1/2\n").is_err());
        // Chance edge without a probability.
        assert!(Game::parse("vertices: a:STOCH\na -> a payoff 0\n").is_err());
        // Unknown vertex.
        assert!(Game::parse("vertices: a:MAX\na -> z payoff 0\n").is_err());
    }

    #[test]
    fn strategy_budget_is_enforced() {
        // 2^17 MAX strategies exceed a pair budget of 10^5.
        let n = 17;
        let kinds = vec![VertexKind::Max; n];
        let names = (0..n).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        for v in 0..n {
            edges.push(Edge { from: v, to: (v + 1) % n, payoff: r(0), prob: None });
            edges.push(Edge { from: v, to: v, payoff: r(1), prob: None });
        }
        let g = Game::new(kinds, names, edges).unwrap();
        assert!(matches!(
            limiting_average_values(&g, &Budgets::default()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn discounted_approaches_limiting_average() {
        let g = Game::new(
            vec![VertexKind::Stoch, VertexKind::Max, VertexKind::Min],
            vec!["s".into(), "p".into(), "q".into()],
            vec![
                Edge { from: 0, to: 1, payoff: r(1), prob: Some(rq(1, 2)) },
                Edge { from: 0, to: 2, payoff: r(-1), prob: Some(rq(1, 2)) },
                Edge { from: 1, to: 0, payoff: r(2), prob: None },
                Edge { from: 1, to: 1, payoff: r(1), prob: None },
                Edge { from: 2, to: 2, payoff: r(-1), prob: None },
                Edge { from: 2, to: 0, payoff: r(0), prob: None },
            ],
        )
        .unwrap();
        let budgets = Budgets::default();
        let nu = limiting_average_values(&g, &budgets).unwrap();
        let dist = |beta: Rational| -> Rational {
            let v = discounted_values(&g, &beta, &budgets).unwrap();
            v.iter()
                .zip(&nu)
                .map(|(a, b)| (a - b).abs())
                .reduce(|a, b| a.max(b))
                .unwrap()
        };
        let d1 = dist(rq(9, 10));
        let d3 = dist(rq(999, 1000));
        assert!(d3 <= d1, "discounted values should approach ν₁: {d3} > {d1}");
    }
}
