use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fakeideal")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn e_not_ideal_trace_lists_first_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["witness", "e-not-ideal", "--h", "exp 2", "--steps", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("n=1 a=3 "), "{text}");
    assert!(text.contains("n=2 a=13 b=7 "), "{text}");
}

#[test]
fn verify_accepts_untampered_and_rejects_edits() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["witness", "parity-escape", "--seed", "5", "--out", "b.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(run(dir.path(), &["verify", "b.json"]).status.code(), Some(0));

    let text = std::fs::read_to_string(dir.path().join("b.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["body"]["claims"][0]["detail"] = Value::from("edited");
    std::fs::write(dir.path().join("bad.json"), v.to_string()).unwrap();
    assert_eq!(run(dir.path(), &["verify", "bad.json"]).status.code(), Some(4));

    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["header"]["params"]["depth"] = Value::from(7);
    std::fs::write(dir.path().join("bad.json"), v.to_string()).unwrap();
    assert_eq!(run(dir.path(), &["verify", "bad.json"]).status.code(), Some(4));
}

#[test]
fn structured_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["witness", "s-not-in-fin", "--seed", "11", "--format", "structured"];
    let a = run(dir.path(), &args);
    let b = run(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn separate_example_is_limited_by_window_growth() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["diagonal", "separate", "--f", "poly n", "--g", "poly n^3", "--depth", "500"];
    let ten = run(dir.path(), &[&base[..], &["--stages", "10", "--format", "structured"]].concat());
    assert_eq!(ten.status.code(), Some(2));
    let err: Value = serde_json::from_str(&stdout(&ten)).unwrap();
    assert_eq!(err["error"], "DepthExhausted");
    let two = run(dir.path(), &[&base[..], &["--stages", "2", "--out", "sep.json"]].concat());
    assert_eq!(two.status.code(), Some(0), "{}", stdout(&two));
    assert_eq!(run(dir.path(), &["verify", "sep.json"]).status.code(), Some(0));
}

#[test]
fn plan_file_feeds_escape() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        run(dir.path(), &["diagonal", "build", "--s", "poly n", "--t", "const 1", "--depth", "60", "--out", "p.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(dir.path(), &["diagonal", "escape", "--plan", "p.json", "--opponent", "zeros:1", "--stages", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verified: ok"));
}

#[test]
fn membership_reads_system_files() {
    let dir = tempfile::tempdir().unwrap();
    let sys = r#"{"prefix": {"weight": {"kind": "fin"}, "levels": {"kind": "explicit", "levels": {"2": ["0,0"], "3": ["0,0,0"]}}}}"#;
    std::fs::write(dir.path().join("s.json"), sys).unwrap();
    let o = run(
        dir.path(),
        &["membership", "--system", "s.json", "--point", "zero", "--depth", "5", "--format", "structured"],
    );
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["hits"], serde_json::json!([2, 3]));
}

#[test]
fn transform_emits_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        run(dir.path(), &["transform", "ioe-to-minus", "--point", "const 2", "--depth", "4", "--format", "structured"]);
    assert_eq!(o.status.code(), Some(0));
    let t: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t["certificate"]["map"].as_array().unwrap().len(), 4);
    assert_eq!(t["certificate"]["biconditional"], true);
}

#[test]
fn precondition_errors_exit_two_with_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["witness", "e-not-ideal", "--h", "log2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotIncreasing"));
    let o = run(dir.path(), &["eval-h", "--h", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Parse"));
}

#[test]
fn ceiling_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["witness", "e-not-ideal", "--steps", "12", "--ceiling", "10"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
