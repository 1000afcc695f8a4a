use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "tests", "data", name]
        .iter()
        .collect()
}

fn cllr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cllr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run(extra: &[&str], script: &str) -> Output {
    let path = data(script);
    let mut args = extra.to_vec();
    args.push("run");
    args.push(path.to_str().unwrap());
    cllr(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn example_script_matches_golden_output() {
    let out = run(&[], "conjunctive_equation.cllr");
    let expected = std::fs::read_to_string(data("conjunctive_equation.expected")).unwrap();
    assert_eq!(stdout(&out), expected);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn all_holding_queries_exit_zero() {
    let out = run(&[], "holds.cllr");
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().all(|l| l.starts_with("[HOLDS]")));
}

#[test]
fn state_bound_gives_unknown() {
    let out = run(&["--max-states", "50"], "unknown.cllr");
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("[UNKNOWN]"));
}

#[test]
fn parse_errors_exit_three_with_position() {
    let out = run(&[], "broken.cllr");
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("broken.cllr:2:1"), "{err}");
}

#[test]
fn weak_guard_is_a_hypothesis_error() {
    let out = run(&[], "unguarded.cllr");
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).starts_with("[ERROR]"));
}

#[test]
fn missing_file_and_bad_flags_are_usage_errors() {
    assert_eq!(
        cllr(&["run", "/nonexistent/script.cllr"]).status.code(),
        Some(3)
    );
    assert_eq!(
        cllr(&["--max-states", "0", "run", "x"]).status.code(),
        Some(3)
    );
    assert_eq!(cllr(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn json_lines_carry_the_report_fields() {
    let out = run(&["--format", "json"], "conjunctive_equation.cllr");
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 11);
    for v in &lines {
        for key in ["query", "verdict", "witness", "states", "millis"] {
            assert!(v.get(key).is_some(), "{key} missing in {v}");
        }
    }
    let failing: Vec<&str> = lines
        .iter()
        .filter(|v| v["verdict"] == "FAILS")
        .map(|v| v["query"].as_str().unwrap())
        .collect();
    assert_eq!(
        failing,
        ["check consistent PZ /\\ b.PA", "check equiv PA PB"]
    );
    assert!(lines[4]["witness"].as_str().unwrap().contains("Rp12(b)"));
}

#[test]
fn dot_output_marks_roots_and_unstable_states() {
    let out_path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("holds.dot");
    let script = data("holds.cllr");
    let out = cllr(&[
        "dot",
        script.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dot = std::fs::read_to_string(&out_path).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("[label=\"tau\"]"));
    assert!(dot.contains("style=dashed"));
    assert!(dot.contains("peripheries=2"));
}

#[test]
fn selftest_passes_and_notices_a_dropped_rule() {
    assert_eq!(cllr(&["selftest", "--cases", "30"]).status.code(), Some(0));
    let out = cllr(&["selftest", "--cases", "30", "--disable-rule", "11"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAILED"));
}
