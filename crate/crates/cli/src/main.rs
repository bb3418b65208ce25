//! Command-line front end for the exact constraint solvers.
//!
//! Every subcommand reads its input from a file path (`-` means stdin),
//! prints a deterministic report — byte-identical across runs — and exits
//! with one of: 0 satisfiable/true, 1 unsatisfiable/false, 2 usage or
//! input error, 3 budget exceeded, 4 internal consistency violation.
//! Witness coordinates are always printed as exact fractions.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tropisolve_core::formula::{
    horn_columns, is_max_closed_semantic, is_restricted_horn, is_tropically_convex_syntactic,
};
use tropisolve_core::games::{
    build_game, cross_check_duality, discounted_values, limiting_average_values, Game,
};
use tropisolve_core::gen;
use tropisolve_core::horn_solver::{brute_force_sat, solve_restricted, verify_witness, SolveResult};
use tropisolve_core::ppcompile::{compile_gamma0, compile_gamma_t, equivalence_check, pp_to_horn};
use tropisolve_core::tropical::{
    atom_formula, check_duality, csp_to_operator_system, sat_in_zero_plus, solve_csp, CspInstance,
    CspOutcome, DualCertificate, NamedOperatorSystem,
};
use tropisolve_core::{Budgets, Clause, Error, Formula, Rational, Result};

#[derive(Parser)]
#[command(
    name = "tropisolve",
    version,
    about = "Exact solvers for max-closed linear constraint systems over the rationals",
    after_help = "Exit codes: 0 satisfiable/true, 1 unsatisfiable/false, \
                  2 usage or input error, 3 budget exceeded, 4 internal inconsistency."
)]
struct Cli {
    /// Print a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Uniform override for all enumeration budgets (takes precedence over
    /// the TROPISOLVE_BUDGET environment variable).
    #[arg(long, global = true, value_name = "N")]
    budget: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the Horn, restricted-Horn, tropically-convex, and max-closed
    /// status of a clause formula.
    Classify {
        /// Formula file (`-` for stdin).
        input: PathBuf,
    },
    /// Decide satisfiability of a restricted Horn formula; non-restricted
    /// inputs fall back to exhaustive search with a warning.
    Solve {
        /// Formula file (`-` for stdin).
        input: PathBuf,
    },
    /// Solve a constraint instance over the atoms LT, T+1, T-1, S3, M0.
    Tropical {
        /// Atom-list file (`-` for stdin).
        input: PathBuf,
    },
    /// Check both exactly-one duality laws for an operator system and
    /// report all four verdicts.
    Duality {
        /// Operator-system file (`-` for stdin).
        input: PathBuf,
    },
    /// Build the mean-payoff game of an operator system (or read a game
    /// directly) and print its exact limiting-average and discounted values.
    Game {
        /// Operator-system or game file (`-` for stdin).
        input: PathBuf,
        /// Discount factor, a rational in [0, 1).
        #[arg(long, default_value = "9/10", value_name = "Q")]
        beta: String,
    },
    /// Compile each clause of a Horn formula into a primitive positive
    /// formula over a fixed finite vocabulary.
    Compile {
        /// Formula file (`-` for stdin).
        input: PathBuf,
        /// Target vocabulary.
        #[arg(long, value_enum)]
        target: Target,
    },
    /// Run the randomized cross-check suites with a given seed.
    Selftest {
        /// Seed for the deterministic random generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Base number of cases per suite.
        #[arg(long, default_value_t = 25)]
        cases: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    /// Bounded-difference vocabulary (LT, S1, S2, S3, M0 and constants).
    Gamma0,
    /// Translation-invariant vocabulary (LT, T+1, T-1, S3, M0).
    Gammat,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        Error::InternalInconsistency(_) => 4,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let budgets = budgets_from(cli)?;
    match &cli.command {
        Command::Classify { input } => cmd_classify(&read_input(input)?, cli.json, &budgets),
        Command::Solve { input } => cmd_solve(&read_input(input)?, cli.json, &budgets),
        Command::Tropical { input } => cmd_tropical(&read_input(input)?, cli.json, &budgets),
        Command::Duality { input } => cmd_duality(&read_input(input)?, cli.json, &budgets),
        Command::Game { input, beta } => cmd_game(&read_input(input)?, beta, cli.json, &budgets),
        Command::Compile { input, target } => {
            cmd_compile(&read_input(input)?, *target, cli.json, &budgets)
        }
        Command::Selftest { seed, cases } => cmd_selftest(*seed, *cases, cli.json, &budgets),
    }
}

fn budgets_from(cli: &Cli) -> Result<Budgets> {
    if let Some(limit) = cli.budget {
        return Ok(Budgets::uniform(limit));
    }
    match std::env::var("TROPISOLVE_BUDGET") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Budgets::uniform)
            .map_err(|_| Error::InvalidInput(format!("TROPISOLVE_BUDGET must be an integer, got `{s}`"))),
        Err(_) => Ok(Budgets::default()),
    }
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
        return Ok(buf);
    }
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn emit(json: bool, value: Value, text: &str) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable report"));
    } else {
        print!("{text}");
    }
}

fn rat_strings(vals: &[Rational]) -> Vec<String> {
    vals.iter().map(|v| v.to_string()).collect()
}

fn tuple(vals: &[String]) -> String {
    format!("({})", vals.join(", "))
}

fn clause_text(clause: &Clause, names: &[String]) -> String {
    if clause.literals.is_empty() {
        return "FALSE".into();
    }
    clause
        .literals
        .iter()
        .map(|l| l.display(names))
        .collect::<Vec<_>>()
        .join(" | ")
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn cmd_classify(text: &str, json: bool, budgets: &Budgets) -> Result<i32> {
    let f = Formula::parse(text)?;
    let n = f.num_vars();

    let mut horn = true;
    let mut columns: BTreeSet<usize> = BTreeSet::new();
    for clause in &f.clauses {
        let cols = horn_columns(clause, n);
        if cols.is_empty() {
            horn = false;
            break;
        }
        if clause.literals.iter().any(|l| !l.all_coeffs_nonneg()) {
            columns.insert(*cols.iter().next().expect("nonempty"));
        }
    }
    if !horn {
        columns.clear();
    }
    let restricted = horn && is_restricted_horn(&f);
    let tropical = is_tropically_convex_syntactic(&f);
    let max_closed = match is_max_closed_semantic(&f, budgets) {
        Ok(b) => Some(b),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };

    let yn = |b: bool| if b { "yes" } else { "no" };
    let horn_field = if horn && !columns.is_empty() {
        let ks: Vec<String> = columns.iter().map(|k| k.to_string()).collect();
        format!("yes (k={})", ks.join(","))
    } else {
        yn(horn).to_string()
    };
    let mc_field = match max_closed {
        Some(b) => yn(b).to_string(),
        None => "unknown (budget exceeded)".to_string(),
    };
    let line = format!(
        "horn: {horn_field}; restricted: {}; tropical: {}; max-closed: {mc_field}\n",
        yn(restricted),
        yn(tropical)
    );

    let value = json!({
        "command": "classify",
        "horn": horn,
        "horn_columns": columns.iter().copied().collect::<Vec<usize>>(),
        "restricted": restricted,
        "tropical": tropical,
        "max_closed": max_closed,
    });
    emit(json, value, &line);
    Ok(if max_closed.is_none() { 3 } else { 0 })
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

fn cmd_solve(text: &str, json: bool, budgets: &Budgets) -> Result<i32> {
    let f = Formula::parse(text)?;
    let (result, method) = if is_restricted_horn(&f) {
        (solve_restricted(&f)?, "restricted")
    } else {
        eprintln!("warning: input is not restricted Horn; falling back to exhaustive search");
        (brute_force_sat(&f, budgets)?, "exhaustive")
    };
    match result {
        SolveResult::Sat(witness) => {
            let mut out = String::from("SAT\n");
            for (name, v) in f.var_names.iter().zip(&witness) {
                out.push_str(&format!("{name} = {v}\n"));
            }
            let value = json!({
                "command": "solve",
                "method": method,
                "status": "sat",
                "vars": f.var_names,
                "witness": rat_strings(&witness),
            });
            emit(json, value, &out);
            Ok(0)
        }
        SolveResult::Unsat(trace) => {
            let mut out = String::from("UNSAT\n");
            let mut removals = Vec::new();
            for r in &trace.removals {
                let lit = r.literal.display(&f.var_names);
                out.push_str(&format!("removed from clause {}: {lit}\n", r.clause + 1));
                removals.push(json!({ "clause": r.clause + 1, "literal": lit }));
            }
            let mut units = Vec::new();
            for u in &trace.final_units {
                let lit = u.literal.as_ref().map(|l| l.display(&f.var_names));
                out.push_str(&format!(
                    "unit clause {}: {}\n",
                    u.clause + 1,
                    lit.as_deref().unwrap_or("empty")
                ));
                units.push(json!({ "clause": u.clause + 1, "literal": lit }));
            }
            let value = json!({
                "command": "solve",
                "method": method,
                "status": "unsat",
                "removals": removals,
                "units": units,
            });
            emit(json, value, &out);
            Ok(1)
        }
    }
}

// ---------------------------------------------------------------------------
// tropical
// ---------------------------------------------------------------------------

fn cmd_tropical(text: &str, json: bool, budgets: &Budgets) -> Result<i32> {
    let inst = CspInstance::parse(text)?;
    match solve_csp(&inst, budgets)? {
        CspOutcome::Sat(witness) => {
            let mut out = String::from("SAT\n");
            for (name, v) in inst.var_names.iter().zip(&witness) {
                out.push_str(&format!("{name} = {v}\n"));
            }
            let value = json!({
                "command": "tropical",
                "status": "sat",
                "vars": inst.var_names,
                "witness": rat_strings(&witness),
            });
            emit(json, value, &out);
            Ok(0)
        }
        CspOutcome::Unsat(cert) => {
            let named = csp_to_operator_system(&inst);
            let coords: Vec<String> = cert.y.iter().map(|v| v.to_string()).collect();
            let out = format!(
                "UNSAT\nvars: {}\ncertificate: {}\n",
                named.var_names.join(", "),
                tuple(&coords)
            );
            let value = json!({
                "command": "tropical",
                "status": "unsat",
                "vars": named.var_names,
                "certificate": coords,
            });
            emit(json, value, &out);
            Ok(1)
        }
    }
}

// ---------------------------------------------------------------------------
// duality
// ---------------------------------------------------------------------------

fn fmt_primal(w: &Option<Vec<Rational>>) -> String {
    match w {
        Some(x) => format!("SAT x={}", tuple(&rat_strings(x))),
        None => "UNSAT".into(),
    }
}

fn fmt_dual(c: &Option<DualCertificate>) -> String {
    match c {
        Some(cert) => format!("SAT y={cert}"),
        None => "UNSAT".into(),
    }
}

fn dual_coords(c: &Option<DualCertificate>) -> Value {
    match c {
        Some(cert) => Value::Array(
            cert.y.iter().map(|v| Value::String(v.to_string())).collect(),
        ),
        None => Value::Null,
    }
}

fn cmd_duality(text: &str, json: bool, budgets: &Budgets) -> Result<i32> {
    let named = NamedOperatorSystem::parse(text)?;
    let report = check_duality(&named.system, budgets)?;
    let out = format!(
        "P strict: {}; D nonstrict: {}\nP nonstrict: {}; D strict: {}\n",
        fmt_primal(&report.primal_strict),
        fmt_dual(&report.dual_nonstrict),
        fmt_primal(&report.primal_nonstrict),
        fmt_dual(&report.dual_strict),
    );
    let rats = |w: &Option<Vec<Rational>>| match w {
        Some(x) => Value::Array(rat_strings(x).into_iter().map(Value::String).collect()),
        None => Value::Null,
    };
    let value = json!({
        "command": "duality",
        "vars": named.var_names,
        "primal_strict": rats(&report.primal_strict),
        "dual_nonstrict": dual_coords(&report.dual_nonstrict),
        "primal_nonstrict": rats(&report.primal_nonstrict),
        "dual_strict": dual_coords(&report.dual_strict),
    });
    emit(json, value, &out);
    Ok(if report.primal_strict.is_some() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// game
// ---------------------------------------------------------------------------

fn cmd_game(text: &str, beta: &str, json: bool, budgets: &Budgets) -> Result<i32> {
    let beta: Rational = beta
        .parse()
        .map_err(|_| Error::InvalidInput(format!("invalid discount factor `{beta}`")))?;
    if beta.is_negative() || beta >= Rational::one() {
        return Err(Error::InvalidInput(format!(
            "discount factor must lie in [0, 1), got {beta}"
        )));
    }
    let first_line = text
        .lines()
        .map(|l| match l.find('#') {
            Some(p) => l[..p].trim(),
            None => l.trim(),
        })
        .find(|l| !l.is_empty());
    let game = if first_line.is_some_and(|l| l.starts_with("vertices:")) {
        Game::parse(text)?
    } else {
        let named = NamedOperatorSystem::parse(text)?;
        let mut g = build_game(&named.system)?;
        g.names = named.var_names.clone();
        g
    };
    let nu = limiting_average_values(&game, budgets)?;
    let disc = discounted_values(&game, &beta, budgets)?;
    let out = format!(
        "{game}limiting average: {}\ndiscounted (beta = {beta}): {}\n",
        tuple(&rat_strings(&nu)),
        tuple(&rat_strings(&disc))
    );
    let vertices: Vec<Value> = game
        .names
        .iter()
        .zip(&game.kinds)
        .map(|(n, k)| json!({ "name": n, "kind": k.to_string() }))
        .collect();
    let edges: Vec<Value> = game
        .edges
        .iter()
        .map(|e| {
            json!({
                "from": game.names[e.from],
                "to": game.names[e.to],
                "payoff": e.payoff.to_string(),
                "prob": e.prob.as_ref().map(|p| p.to_string()),
            })
        })
        .collect();
    let value = json!({
        "command": "game",
        "vertices": vertices,
        "edges": edges,
        "limiting_average": rat_strings(&nu),
        "discounted": { "beta": beta.to_string(), "values": rat_strings(&disc) },
    });
    emit(json, value, &out);
    Ok(0)
}

// ---------------------------------------------------------------------------
// compile
// ---------------------------------------------------------------------------

fn cmd_compile(text: &str, target: Target, json: bool, _budgets: &Budgets) -> Result<i32> {
    let f = Formula::parse(text)?;
    let mut out = String::new();
    let mut clauses = Vec::new();
    for (i, clause) in f.clauses.iter().enumerate() {
        let pp = match target {
            Target::Gamma0 => compile_gamma0(clause, &f.var_names)?,
            Target::Gammat => compile_gamma_t(clause, &f.var_names)?,
        };
        if i > 0 {
            out.push('\n');
        }
        let source = clause_text(clause, &f.var_names);
        out.push_str(&format!("clause {}: {source}\n{pp}atoms: {}\n", i + 1, pp.atom_count()));
        clauses.push(json!({
            "clause": source,
            "pp": serde_json::to_value(&pp).expect("serializable formula"),
            "text": pp.to_string(),
            "atoms": pp.atom_count(),
        }));
    }
    let target_name = match target {
        Target::Gamma0 => "gamma0",
        Target::Gammat => "gammat",
    };
    let value = json!({
        "command": "compile",
        "target": target_name,
        "clauses": clauses,
    });
    emit(json, value, &out);
    Ok(0)
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

fn inconsistent(msg: String) -> Error {
    Error::InternalInconsistency(msg)
}

fn suite_duality(seed: u64, cases: usize, budgets: &Budgets) -> Result<usize> {
    let mut r = gen::rng(seed);
    for i in 0..cases {
        let o = gen::random_operator_system(&mut r, 3);
        check_duality(&o, budgets)
            .map_err(|e| inconsistent(format!("duality case {i}: {e}")))?;
    }
    Ok(cases)
}

fn suite_game_signs(seed: u64, cases: usize, budgets: &Budgets) -> Result<usize> {
    let mut r = gen::rng(seed);
    for i in 0..cases {
        let o = gen::random_operator_system(&mut r, 3);
        cross_check_duality(&o, budgets)
            .map_err(|e| inconsistent(format!("game-sign case {i}: {e}")))?;
    }
    Ok(cases)
}

fn suite_restricted(seed: u64, cases: usize, budgets: &Budgets) -> Result<usize> {
    let mut r = gen::rng(seed);
    for i in 0..cases {
        let f = gen::random_restricted_horn(&mut r, 4, 4, 3, 3);
        let fast = solve_restricted(&f)?;
        let slow = brute_force_sat(&f, budgets)?;
        if fast.is_sat() != slow.is_sat() {
            return Err(inconsistent(format!(
                "restricted case {i}: solver disagreement on {f}"
            )));
        }
        if let Some(w) = fast.witness() {
            if !verify_witness(&f, w)? {
                return Err(inconsistent(format!("restricted case {i}: bad witness for {f}")));
            }
        }
    }
    Ok(cases)
}

fn suite_csp(seed: u64, cases: usize, budgets: &Budgets) -> Result<usize> {
    let mut r = gen::rng(seed);
    let shifts: Vec<Rational> =
        vec![Rational::from_int(-7), Rational::new(1, 3)?, Rational::from_int(10)];
    for i in 0..cases {
        let inst = gen::random_csp_instance(&mut r, 4, 5);
        let phi = atom_formula(&inst);
        let direct = brute_force_sat(&phi, budgets)?;
        match solve_csp(&inst, budgets)? {
            CspOutcome::Sat(w) => {
                if !direct.is_sat() {
                    return Err(inconsistent(format!("csp case {i}: spurious witness")));
                }
                if !verify_witness(&phi, &w)? {
                    return Err(inconsistent(format!("csp case {i}: witness fails atoms")));
                }
                for c in &shifts {
                    let shifted: Vec<Rational> = w.iter().map(|v| v + c).collect();
                    if !verify_witness(&phi, &shifted)? {
                        return Err(inconsistent(format!(
                            "csp case {i}: witness not translation-invariant under {c}"
                        )));
                    }
                }
            }
            CspOutcome::Unsat(_) => {
                if direct.is_sat() {
                    return Err(inconsistent(format!("csp case {i}: missed satisfiable instance")));
                }
            }
        }
    }
    Ok(cases)
}

fn suite_compile_roundtrip(seed: u64, cases: usize, budgets: &Budgets) -> Result<usize> {
    let mut r = gen::rng(seed);
    for i in 0..cases {
        let n = 1 + i % 3;
        let clause = gen::random_horn_clause(&mut r, n, 2, 2);
        let f = Formula::with_default_names(n, vec![clause]);
        let pp = compile_gamma0(&f.clauses[0], &f.var_names)?;
        let (h, ex) = pp_to_horn(&pp)?;
        if !equivalence_check(&f, 0, &h, ex, budgets)? {
            return Err(inconsistent(format!("compile case {i}: round-trip mismatch for {f}")));
        }
    }
    Ok(cases)
}

fn suite_zero_plus(seed: u64, cases: usize, budgets: &Budgets) -> Result<usize> {
    let mut r = gen::rng(seed);
    for i in 0..cases {
        let solvable = i % 2 == 0;
        let (phi, t_var) = gen::zero_plus_instance(&mut r, solvable);
        match sat_in_zero_plus(&phi, t_var, budgets)? {
            Some(w) => {
                if !solvable {
                    return Err(inconsistent(format!("zero-plus case {i}: spurious witness")));
                }
                let point = w.point(&w.sample());
                if !verify_witness(&phi, &point)? {
                    return Err(inconsistent(format!(
                        "zero-plus case {i}: sample point fails the formula"
                    )));
                }
            }
            None => {
                if solvable {
                    return Err(inconsistent(format!(
                        "zero-plus case {i}: missed solvable instance"
                    )));
                }
            }
        }
    }
    Ok(cases)
}

fn cmd_selftest(seed: u64, cases: usize, json: bool, budgets: &Budgets) -> Result<i32> {
    let half = cases.div_ceil(2);
    let suites: Vec<(&str, usize)> = vec![
        ("duality laws", suite_duality(seed, cases, budgets)?),
        ("game sign laws", suite_game_signs(seed.wrapping_add(1), half, budgets)?),
        ("restricted horn vs exhaustive", suite_restricted(seed.wrapping_add(2), cases, budgets)?),
        ("csp agreement and translation", suite_csp(seed.wrapping_add(3), half, budgets)?),
        ("compile round-trip", suite_compile_roundtrip(seed.wrapping_add(4), half, budgets)?),
        ("zero-plus decisions", suite_zero_plus(seed.wrapping_add(5), half, budgets)?),
    ];
    let mut out = format!("seed: {seed}\n");
    for (name, count) in &suites {
        out.push_str(&format!("{name}: {count}/{count}\n"));
    }
    out.push_str("all suites passed\n");
    let value = json!({
        "command": "selftest",
        "seed": seed,
        "suites": suites
            .iter()
            .map(|(name, count)| json!({ "name": name, "passed": count, "total": count }))
            .collect::<Vec<Value>>(),
        "ok": true,
    });
    emit(json, value, &out);
    Ok(0)
}
