//! End-to-end tests of the command-line interface: exit codes, golden
//! outputs, and cross-language comparisons, driving the real binary.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_procalc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().expect("binary exits")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("procalc-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn parse_echoes_canonical_form() {
    let out = run(&["parse", "--lang", "ccs", "--expr", "(a.0)+((b.0))"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "a.0 + b.0\n");
}

#[test]
fn parse_reads_stdin() {
    let out = run_stdin(&["parse", "--lang", "csp", "-"], "a -> ( STOP )");
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "a -> STOP\n");
}

#[test]
fn parse_error_reports_position_and_exits_2() {
    let out = run(&["parse", "--lang", "ccs", "--expr", "a ->"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:"), "no position in: {err}");
}

#[test]
fn parse_definitions_file_with_main() {
    let path = write_temp("defs.csp", "P = a -> STOP\nmain = P [] (b -> STOP)\n");
    let out = run(&["parse", "--lang", "csp", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "a -> STOP [] b -> STOP\n");
}

#[test]
fn usage_error_exits_1() {
    let out = run(&["equiv", "--relation", "nonsense", "a", "b"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lts_emits_aut_goldens() {
    let out = run(&["lts", "--lang", "ccs", "--expr", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "des (0, 0, 1)\n");

    let out = run(&["lts", "--lang", "csp", "--expr", "DIV"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "des (0, 1, 1)\n(0, \"tau\", 0)\n");
}

#[test]
fn lts_cap_exceeded_exits_3_with_partial_graph() {
    let out = run(&[
        "lts",
        "--lang",
        "ccs",
        "--expr",
        "a.b.c.0",
        "--max-states",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout_of(&out).starts_with("des ("));
    assert!(String::from_utf8_lossy(&out.stderr).contains("partial graph"));
}

#[test]
fn lts_dot_output() {
    let out = run(&["lts", "--lang", "csp", "--expr", "DIV", "--format", "dot"]);
    assert!(out.status.success());
    let dot = stdout_of(&out);
    assert!(dot.starts_with("digraph lts {"));
    assert!(dot.contains("style=dashed"));
}

#[test]
fn encode_goldens() {
    let out = run(&["encode", "--expr", "STOP"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "0\n");

    // Open terms pass variables through.
    let out = run(&["encode", "--expr", "X", "--alphabet", "a"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "X\n");

    let out = run(&["encode", "--expr", "(a -> STOP) [|{a}|] (a -> STOP)"]);
    assert!(out.status.success());
    assert_eq!(
        stdout_of(&out),
        "((a.0 | fix X {X = 'a.a'.a''.a'.X})\\{a} | (a.0 | fix X {X = 'a.'a'.'a'.X})\\{a})\\{a'}[a/a'']\n"
    );
}

#[test]
fn encode_output_reparses_as_ccs() {
    let out = run(&["encode", "--expr", "((a -> STOP) [|{a}|] (b -> DIV)) \\ b"]);
    assert!(out.status.success());
    let ccs_text = stdout_of(&out);
    let reparse = run(&["parse", "--lang", "ccs", "--expr", ccs_text.trim()]);
    assert!(reparse.status.success());
    assert_eq!(stdout_of(&reparse), ccs_text);
}

#[test]
fn encode_rejects_out_of_alphabet_actions() {
    let out = run(&["encode", "--expr", "d -> STOP", "--alphabet", "a,b"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equiv_identical_files_hold() {
    let p = write_temp("same.ccs", "a.b.0 + c.0");
    let out = run(&[
        "equiv",
        "--relation",
        "iso-reachable",
        "--lang",
        "ccs",
        p.to_str().unwrap(),
        p.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("holds: true"));
}

#[test]
fn equiv_trace_counterexample_and_expect() {
    let p1 = write_temp("t1.ccs", "a.0");
    let p2 = write_temp("t2.ccs", "a.a.0");
    let out = run(&[
        "equiv",
        "--relation",
        "trace",
        "--lang",
        "ccs",
        p1.to_str().unwrap(),
        p2.to_str().unwrap(),
        "--expect",
        "holds",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let text = stdout_of(&out);
    assert!(text.contains("holds: false"));
    assert!(text.contains("distinguishing trace: a a"), "{text}");
}

#[test]
fn equiv_cross_language_witness_pair() {
    let ccs = write_temp("w.ccs", "b.0 + b.c.0");
    let csp = write_temp("w.csp", "(b -> STOP) [] (b -> (c -> STOP))");
    let out = run(&[
        "equiv",
        "--relation",
        "weak-bisim",
        "--lang",
        "ccs",
        "--lang2",
        "csp",
        ccs.to_str().unwrap(),
        csp.to_str().unwrap(),
        "--expect",
        "holds",
    ]);
    assert!(out.status.success(), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("holds: true"));
}

#[test]
fn equiv_accepts_aut_inputs() {
    let lts = run(&["lts", "--lang", "ccs", "--expr", "tau.a.0"]);
    let aut = write_temp("g.aut", &stdout_of(&lts));
    let term = write_temp("g.ccs", "a.0");
    let out = run(&[
        "equiv",
        "--relation",
        "weak-bisim",
        "--lang",
        "ccs",
        aut.to_str().unwrap(),
        term.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("holds: true"));
}

#[test]
fn verify_identity_strong_bisim_passes() {
    let out = run(&[
        "verify",
        "--translation",
        "identity",
        "--lang",
        "ccs",
        "--relation",
        "strong-bisim",
        "--corpus-seed",
        "3",
        "--corpus-size",
        "10",
        "--expect",
        "holds",
    ]);
    assert!(out.status.success(), "{}", stdout_of(&out));
    assert!(stdout_of(&out).contains("result=PASS"));
}

#[test]
fn verify_summary_format() {
    let out = run(&[
        "verify",
        "--corpus-seed",
        "42",
        "--corpus-size",
        "5",
        "--format",
        "summary",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("result=PASS"));
}

#[test]
fn verify_encode_cweak_reports_failures_per_term() {
    // Untranslatability at the divergence-respecting relation shows up as
    // per-term failures (e.g. DIV ↦ 0 loses the divergence).
    let out = run(&[
        "verify",
        "--translation",
        "encode",
        "--relation",
        "convergent-weak-bisim",
        "--corpus-seed",
        "42",
        "--corpus-size",
        "30",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("result=FAIL"), "{text}");
    assert!(text.lines().any(|l| l.contains("\tfail\t")));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let cfg = write_temp("procalc.conf", "corpus-size=4\nmax-states=20000\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "verify",
        "--corpus-seed",
        "42",
        "--format",
        "summary",
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("checked=4"));

    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "verify",
        "--corpus-seed",
        "42",
        "--corpus-size",
        "6",
        "--format",
        "summary",
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("checked=6"));
}

#[test]
fn gen_corpus_is_deterministic_and_reparsable() {
    let a = run(&["gen-corpus", "--lang", "csp", "--seed", "11", "--size", "8"]);
    let b = run(&["gen-corpus", "--lang", "csp", "--seed", "11", "--size", "8"]);
    assert!(a.status.success());
    assert_eq!(stdout_of(&a), stdout_of(&b));
    for line in stdout_of(&a).lines() {
        let out = run(&["parse", "--lang", "csp", "--expr", line]);
        assert!(out.status.success(), "generated term does not reparse: {line}");
    }
}

#[test]
fn fixture_separation_reports_key_facts() {
    let out = run(&["fixture-separation"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("witness pair weakly bisimilar: true"));
    assert!(text.contains("CSP-side traces under rho: <empty>, b, b c"));
    assert!(text.contains("nu-instance divergence-free: true, reaches a deadlock: true"));
}
