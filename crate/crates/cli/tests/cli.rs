use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftreset"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn eval_examples() {
    assert_eq!(stdout(&["eval", "<S k. k>"]), "value: \\x. <x>\n");
    assert_eq!(stdout(&["eval", "--fuel", "100", "OMEGA"]), "timeout\n");
    assert_eq!(stdout(&["eval", "S k. k"]), "stuck: S k. k\n");
}

#[test]
fn stuck_examples() {
    assert_eq!(stdout(&["stuck", "S k. k"]), "true\n");
    assert_eq!(stdout(&["stuck", "<S k. k>"]), "false\n");
    assert_eq!(stdout(&["stuck", "(\\x. x) (S k. k)"]), "true\n");
}

#[test]
fn trace_ends_in_the_value() {
    let out = stdout(&["trace", "<(\\x. x) (S k. k (\\y. y))>"]);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("0: <"));
    assert_eq!(*lines.last().unwrap(), "5: \\y. y");
}

#[test]
fn cps_examples() {
    assert_eq!(stdout(&["cps-equiv", "<\\x.x>", "\\x.x"]), "equiv\n");
    assert_eq!(stdout(&["cps-equiv", "S k. k (\\x.x)", "\\x.x"]), "equiv\n");
    assert_eq!(stdout(&["cps-equiv", "\\x. \\y. x", "\\x. \\y. y"]), "inequiv\n");
    assert_eq!(stdout(&["cps-equiv", "--fuel", "500", "OMEGA", "\\x. x"]), "unknown\n");
    assert!(stdout(&["cps", "\\x. x"]).starts_with('\\'));
}

#[test]
fn kh_examples() {
    let out = stdout(&["kh", "--depth", "2", "<< \\x.x >>", "< \\x.x >"]);
    assert!(out.starts_with("derivation (1 step)\n"), "{out}");
    assert!(out.contains("reset-value"));
    assert_eq!(stdout(&["kh", "--depth", "2", "\\x. x", "\\x. \\y. x"]), "none\n");
}

#[test]
fn bisim_examples() {
    let out = stdout(&["bisim", "--semantics", "relaxed", "\\x.x", "S k. k (\\x.x)"]);
    assert!(out.starts_with("distinguished\nstart "), "{out}");
    assert!(out.contains("mismatch value: \\x. x | stuck: S k. k (\\x. x)"));
    let out = stdout(&["bisim", "--semantics", "original", "OMEGA", "S k. OMEGA"]);
    assert!(out.starts_with("no-counterexample"), "{out}");
    let out = stdout(&["bisim", "OMEGA", "S k. OMEGA"]);
    assert!(out.starts_with("likely-distinguished"), "{out}");
}

#[test]
fn big_step_traces_have_no_reduce_moves() {
    let out = stdout(&["bisim", "--big-step", "OMEGA", "S k. OMEGA"]);
    assert!(out.starts_with("likely-distinguished"));
    assert!(!out.contains("\nreduce "));
}

#[test]
fn falsify_and_compare() {
    let out = stdout(&["falsify", "S k. k (\\x. x)", "\\x. x"]);
    assert!(out.starts_with("counterexample\ncontext [] "), "{out}");
    let out = stdout(&["falsify", "--semantics", "original", "S k. k (\\x. x)", "\\x. x"]);
    assert!(out.starts_with("none-found"), "{out}");
    let out = stdout(&["compare", "S k. k (\\x. x)", "\\x. x"]);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows[1], ["relaxed", "distinguished", "counterexample"]);
    assert_eq!(rows[2], ["original", "no-counterexample", "none-found"]);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["eval", "(\\x."]), 2);
    assert_eq!(code(&["bisim", "\\x. x", "<"]), 2);
    assert_eq!(code(&["eval", "x"]), 3);
    assert_eq!(code(&["trace", "\\x. y"]), 3);
    assert_eq!(code(&["stuck", "S k. y"]), 3);
    assert_eq!(code(&["bisim", "--closure-budget", "0", "\\x. x", "\\y. y"]), 4);
    assert_eq!(code(&["falsify", "--ctx-size", "40", "\\x. x", "\\y. y"]), 4);
    assert_eq!(code(&["compare", "--fuel", "0", "\\x. x", "\\y. y"]), 4);
    assert_eq!(code(&["bisim", "--semantics", "other", "\\x. x", "\\y. y"]), 2);
}

#[test]
fn json_lines_have_the_fixed_fields() {
    let out = stdout(&["--format", "json", "bisim", "\\x.x", "S k. k (\\x.x)"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1);
    let v: Value = serde_json::from_str(lines[0]).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(keys, ["budgets", "command", "input", "millis", "verdict", "witness"]);
    assert!(lines[0].starts_with("{\"command\":\"bisim\",\"input\":"));
    assert_eq!(v["verdict"], "distinguished");
    assert_eq!(v["budgets"]["fuel"], 2000);
    assert_eq!(v["budgets"]["closure_budget"], 5);
    assert_eq!(v["budgets"]["depth"], 3);
    assert_eq!(v["budgets"]["ctx_size"], 6);
    assert!(v["witness"].as_str().unwrap().contains("mismatch"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["bisim", "OMEGA", "S k. OMEGA"][..],
        &["falsify", "\\x. \\y. x", "\\x. \\y. y"],
        &["compare", "(\\x. S k. k x) (\\z. z)", "S k. (\\x. k x) (\\z. z)"],
        &["kh", "--depth", "3", "<<\\x. x>>", "\\x. x"],
    ] {
        assert_eq!(stdout(args), stdout(args), "{args:?}");
    }
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn corpus_file_mismatch_exits_with_one() {
    let text = "alias I = \\x. x\n\n\
                name: wrong\nleft: S k. k I\nright: I\n\
                expect-relaxed: no-counterexample none-found\n\
                expect-original: no-counterexample none-found\nref: deliberately wrong\n";
    let path = temp_file("mismatch.corpus", text);
    let out = run(&["corpus", "run", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("MISMATCH"), "{s}");
    assert!(s.ends_with("1 entries, 1 mismatches\n"), "{s}");
}

#[test]
fn corpus_file_errors() {
    let path = temp_file("broken.corpus", "name: a\nleft: (\n");
    assert_eq!(code(&["corpus", "run", "--file", path.to_str().unwrap()]), 2);
    assert_eq!(code(&["corpus", "run", "--file", "/nonexistent/corpus.txt"]), 2);
}

#[test]
fn corpus_list_names_every_entry() {
    let out = stdout(&["corpus", "list"]);
    assert!(out.lines().any(|l| l.starts_with("theta-shift: ")));
    assert!(out.lines().count() >= 20);
}

#[test]
fn builtin_corpus_runs_clean() {
    let out = stdout(&["corpus", "run"]);
    assert!(out.trim_end().ends_with(" 0 mismatches"), "{out}");
    assert!(!out.contains("MISMATCH"));
    let json = stdout(&["--format", "json", "corpus", "run"]);
    for line in json.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["command"], "corpus");
    }
}
