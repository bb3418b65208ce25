//! End-to-end tests for the `tropisolve` binary: frozen report texts,
//! exit codes, JSON round-trips, and byte-identical determinism.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

const MC: &str = "x2 - x1 >= 3 | x3 - x1 >= 3\n";
const SUM: &str = "-x1 + x2 + x3 >= 0\n";
const TWO_NEG: &str = "x1 < x2 | x1 < x3\n";
const THREE_OPS: &str =
    "v1 := max(v2 + 1, v3)\nv2 := min(v1 - 1, v3 + 2)\nv3 := avg(1: v1, 2: v2) + 1\n";

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_with(args: &[&str], stdin: Option<&str>, envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tropisolve"));
    cmd.args(args)
        .env_remove("TROPISOLVE_BUDGET")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("binary spawns");
    if let Some(text) = stdin {
        child
            .stdin
            .as_mut()
            .expect("piped stdin")
            .write_all(text.as_bytes())
            .expect("stdin accepts input");
    }
    drop(child.stdin.take());
    let out = child.wait_with_output().expect("binary runs to completion");
    Output {
        code: out.status.code().expect("no signal"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

fn run(args: &[&str]) -> Output {
    run_with(args, None, &[])
}

fn fixture(name: &str, contents: &str) -> String {
    let mut path = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    path.push(name);
    std::fs::write(&path, contents).expect("fixture written");
    path.to_str().expect("utf-8 path").to_string()
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[test]
fn classify_bounded_difference_disjunction() {
    let p = fixture("classify_mc.horn", MC);
    let out = run(&["classify", &p]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(out.stdout, "horn: yes (k=1); restricted: no; tropical: yes; max-closed: yes\n");
}

#[test]
fn classify_weighted_sum_literal() {
    let p = fixture("classify_sum.horn", SUM);
    let out = run(&["classify", &p]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "horn: yes (k=0); restricted: yes; tropical: no; max-closed: yes\n");
}

#[test]
fn classify_two_strict_comparisons() {
    let p = fixture("classify_two.horn", TWO_NEG);
    let out = run(&["classify", &p]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "horn: yes (k=0); restricted: no; tropical: yes; max-closed: yes\n");
}

#[test]
fn classify_reads_stdin() {
    let out = run_with(&["classify", "-"], Some(MC), &[]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("horn: yes (k=1)"));
}

#[test]
fn classify_rejects_parse_errors_with_exit_2() {
    let p = fixture("classify_broken.horn", "x1 >= \n");
    let out = run(&["classify", &p]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("parse error"), "stderr: {}", out.stderr);
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[test]
fn solve_restricted_formula_prints_exact_witness() {
    let p = fixture("solve_sat.horn", "x1 >= 0\nx2 - x1 > 1\n-x2 >= -4 | x1 > 9\n");
    let out = run(&["solve", &p]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(out.stdout, "SAT\nx1 = 19/2\nx2 = 11\n");
    assert!(out.stderr.is_empty());
}

#[test]
fn solve_unsat_prints_trace_and_exits_1() {
    let p = fixture("solve_unsat.horn", "x1 >= 1\n-x1 >= 0\n");
    let out = run(&["solve", &p]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout, "UNSAT\nunit clause 1: x1 >= 1\nunit clause 2: -x1 >= 0\n");
}

#[test]
fn solve_falls_back_with_warning_on_non_restricted_input() {
    let p = fixture("solve_fallback.horn", TWO_NEG);
    let out = run(&["solve", &p]);
    assert_eq!(out.code, 0);
    assert!(out.stderr.contains("falling back to exhaustive search"));
    assert!(out.stdout.starts_with("SAT\n"));
}

#[test]
fn solve_respects_budget_env_with_exit_3() {
    let p = fixture("solve_budget.horn", TWO_NEG);
    let out = run_with(&["solve", &p], None, &[("TROPISOLVE_BUDGET", "1")]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("budget exceeded"));
}

#[test]
fn budget_flag_overrides_environment() {
    let p = fixture("solve_budget_flag.horn", TWO_NEG);
    let out = run_with(
        &["--budget", "1000000", "solve", &p],
        None,
        &[("TROPISOLVE_BUDGET", "1")],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
}

#[test]
fn malformed_budget_env_is_an_input_error() {
    let p = fixture("solve_badenv.horn", SUM);
    let out = run_with(&["solve", &p], None, &[("TROPISOLVE_BUDGET", "lots")]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("TROPISOLVE_BUDGET"));
}

// ---------------------------------------------------------------------------
// tropical
// ---------------------------------------------------------------------------

#[test]
fn tropical_sat_instance_prints_witness() {
    let p = fixture("trop_sat.csp", "LT(x, y)\nS3(z, x, y)\nM0(z, x, y)\n");
    let out = run(&["tropical", &p]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(out.stdout, "SAT\nx = 1/2\ny = 1\nz = 0\n");
}

#[test]
fn tropical_unsat_instance_prints_certificate() {
    let p = fixture("trop_unsat.csp", "LT(x, x)\n");
    let out = run(&["tropical", &p]);
    assert_eq!(out.code, 1);
    assert_eq!(out.stdout, "UNSAT\nvars: x\ncertificate: (0)\n");
}

// ---------------------------------------------------------------------------
// duality
// ---------------------------------------------------------------------------

#[test]
fn duality_self_loop_favors_the_dual() {
    let p = fixture("dual_triv.ops", "x1 := max(x1)\n");
    let out = run(&["duality", &p]);
    assert_eq!(out.code, 1);
    assert_eq!(
        out.stdout,
        "P strict: UNSAT; D nonstrict: SAT y=(0)\nP nonstrict: SAT x=(0); D strict: UNSAT\n"
    );
}

#[test]
fn duality_three_component_system_is_strictly_satisfiable() {
    let p = fixture("dual_three.ops", THREE_OPS);
    let out = run(&["duality", &p]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "P strict: SAT x=(-1/8, -5/4, 0); D nonstrict: UNSAT\n\
         P nonstrict: SAT x=(4/3, 1/3, 0); D strict: UNSAT\n"
    );
}

// ---------------------------------------------------------------------------
// game
// ---------------------------------------------------------------------------

#[test]
fn game_from_operator_system_prints_both_value_vectors() {
    let p = fixture("game_three.ops", THREE_OPS);
    let out = run(&["game", &p]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(
        out.stdout,
        "vertices: v1:MAX v2:MIN v3:STOCH\n\
         v1 -> v2 payoff 1\n\
         v1 -> v3 payoff 0\n\
         v2 -> v1 payoff -1\n\
         v2 -> v3 payoff 2\n\
         v3 -> v1 payoff 1 prob 1/3\n\
         v3 -> v2 payoff 1 prob 2/3\n\
         limiting average: (1/8, 1/8, 1/8)\n\
         discounted (beta = 9/10): (9/61, 2/61, 10/61)\n"
    );
}

#[test]
fn game_accepts_game_text_directly() {
    let p = fixture(
        "game_direct.game",
        "vertices: a:MAX b:MIN\na -> b payoff 2\nb -> a payoff -1\n",
    );
    let out = run(&["game", &p, "--beta", "1/2"]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.contains("limiting average: (1/2, 1/2)"), "stdout: {}", out.stdout);
    assert!(out.stdout.contains("discounted (beta = 1/2):"));
}

#[test]
fn game_rejects_discount_outside_unit_interval() {
    let p = fixture("game_beta.ops", THREE_OPS);
    let out = run(&["game", &p, "--beta", "5/4"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("discount factor"));
}

// ---------------------------------------------------------------------------
// compile
// ---------------------------------------------------------------------------

#[test]
fn compile_bounded_difference_target_is_frozen() {
    let p = fixture("compile_mc0.horn", MC);
    let out = run(&["compile", &p, "--target", "gamma0"]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(
        out.stdout,
        "clause 1: x2 - x1 >= 3 | -x1 + x3 >= 3\n\
         CONST neg_one\n\
         EXISTS _t1 _t2 _t3 _t4 _t5 . S2(_t2,neg_one,neg_one) & S2(_t1,_t3,_t2) & \
         S2(_t3,x2,neg_one) & S2(_t4,_t5,_t2) & S2(_t5,x3,neg_one) & M0(x1,_t1,_t4)\n\
         atoms: 6\n"
    );
}

#[test]
fn compile_translation_invariant_target_is_frozen() {
    let p = fixture("compile_mct.horn", MC);
    let out = run(&["compile", &p, "--target", "gammat"]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(
        out.stdout,
        "clause 1: x2 - x1 >= 3 | -x1 + x3 >= 3\n\
         EXISTS _t1 _t2 _t3 _t4 _t5 _t6 . T-1(_t1,x2) & T-1(_t2,_t1) & T-1(_t3,_t2) & \
         T-1(_t4,x3) & T-1(_t5,_t4) & T-1(_t6,_t5) & M0(x1,_t3,_t6)\n\
         atoms: 7\n"
    );
}

#[test]
fn compile_rejects_non_horn_clause() {
    let p = fixture("compile_nonhorn.horn", "x1 - x2 >= 0 | x2 - x1 >= 0\n");
    let out = run(&["compile", &p, "--target", "gamma0"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("not Horn"), "stderr: {}", out.stderr);
}

#[test]
fn compile_rejects_non_dyadic_weights_for_translation_target() {
    let p = fixture("compile_nondyadic.horn", "2*y + z - 3*x >= 0\n");
    let out = run(&["compile", &p, "--target", "gammat"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("non-dyadic"), "stderr: {}", out.stderr);
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

#[test]
fn selftest_small_run_passes() {
    let out = run(&["selftest", "--seed", "7", "--cases", "6"]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.starts_with("seed: 7\n"));
    assert!(out.stdout.ends_with("all suites passed\n"));
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

fn assert_json_roundtrip(stdout: &str) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(stdout).expect("stdout parses as JSON");
    let again: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&v).expect("re-serializes"))
            .expect("re-parses");
    assert_eq!(v, again);
    v
}

#[test]
fn json_classify_has_typed_fields() {
    let p = fixture("json_classify.horn", MC);
    let out = run(&["--json", "classify", &p]);
    assert_eq!(out.code, 0);
    let v = assert_json_roundtrip(&out.stdout);
    assert_eq!(v["horn"], serde_json::json!(true));
    assert_eq!(v["horn_columns"], serde_json::json!([1]));
    assert_eq!(v["restricted"], serde_json::json!(false));
    assert_eq!(v["tropical"], serde_json::json!(true));
    assert_eq!(v["max_closed"], serde_json::json!(true));
}

#[test]
fn json_solve_witness_uses_exact_fractions() {
    let p = fixture("json_solve.horn", "x1 >= 0\nx2 - x1 > 1\n-x2 >= -4 | x1 > 9\n");
    let out = run(&["--json", "solve", &p]);
    assert_eq!(out.code, 0);
    let v = assert_json_roundtrip(&out.stdout);
    assert_eq!(v["status"], serde_json::json!("sat"));
    assert_eq!(v["witness"], serde_json::json!(["19/2", "11"]));
}

#[test]
fn json_duality_reports_all_four_verdicts() {
    let p = fixture("json_dual.ops", "x1 := max(x1)\n");
    let out = run(&["--json", "duality", &p]);
    assert_eq!(out.code, 1);
    let v = assert_json_roundtrip(&out.stdout);
    assert_eq!(v["primal_strict"], serde_json::Value::Null);
    assert_eq!(v["dual_nonstrict"], serde_json::json!(["0"]));
    assert_eq!(v["primal_nonstrict"], serde_json::json!(["0"]));
    assert_eq!(v["dual_strict"], serde_json::Value::Null);
}

#[test]
fn json_game_and_compile_roundtrip() {
    let ops = fixture("json_game.ops", THREE_OPS);
    let out = run(&["--json", "game", &ops]);
    assert_eq!(out.code, 0);
    let v = assert_json_roundtrip(&out.stdout);
    assert_eq!(v["limiting_average"], serde_json::json!(["1/8", "1/8", "1/8"]));

    let mc = fixture("json_compile.horn", MC);
    let out = run(&["--json", "compile", &mc, "--target", "gammat"]);
    assert_eq!(out.code, 0);
    let v = assert_json_roundtrip(&out.stdout);
    assert_eq!(v["clauses"][0]["atoms"], serde_json::json!(7));
    assert_eq!(v["clauses"][0]["pp"]["atoms"][0]["kind"], serde_json::json!("T-1"));
}

// ---------------------------------------------------------------------------
// Determinism and usage errors
// ---------------------------------------------------------------------------

#[test]
fn reports_are_byte_identical_across_runs() {
    let ops = fixture("determinism.ops", THREE_OPS);
    let mc = fixture("determinism.horn", MC);
    for args in [
        vec!["duality", ops.as_str()],
        vec!["game", ops.as_str()],
        vec!["classify", mc.as_str()],
        vec!["compile", mc.as_str(), "--target", "gamma0"],
        vec!["--json", "game", ops.as_str()],
        vec!["selftest", "--seed", "3", "--cases", "4"],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.code, second.code, "args: {args:?}");
        assert_eq!(first.stdout, second.stdout, "args: {args:?}");
        assert_eq!(first.stderr, second.stderr, "args: {args:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.code, 2);
    let out = run(&["classify"]);
    assert_eq!(out.code, 2);
}

#[test]
fn missing_input_file_exits_2() {
    let out = run(&["classify", "/nonexistent/input.horn"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("cannot read"));
}
