use serde_json::Value;
use std::process::{Command, Output};

fn sumset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumset")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn count_exact_example() {
    let v = json(&sumset(&["count", "exact", "--group", "Z", "--ground", "interval:1..4", "--mode", "sym", "--m", "5", "--s", "3"]));
    assert_eq!(v["count"], 2);
    assert_eq!(v["schema"], 1);
}

#[test]
fn count_lists_members() {
    let v = json(&sumset(&["count", "exact", "--ground", "interval:1..4", "--m", "5", "--s", "3", "--members"]));
    assert_eq!(v["members"], serde_json::json!([[1, 2, 3], [2, 3, 4]]));
}

#[test]
fn containers_verify_covers_everything() {
    let v = json(&sumset(&["containers", "verify", "--ground", "interval:1..9", "--m", "9", "--s", "2"]));
    assert_eq!(v["covered"], "100%");
    assert_eq!(v["sound"], true);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let base = ["containers", "verify", "--ground", "interval:1..10", "--m", "10", "--s", "3", "--list"];
    let one = sumset(&[&base[..], &["--threads", "1"]].concat());
    let eight = sumset(&[&base[..], &["--threads", "8"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, eight.stdout);
    let a = sumset(&["lowerbound", "appendixA", "--n", "14", "--m", "22", "--s", "3", "--threads", "1"]);
    let b = sumset(&["lowerbound", "appendixA", "--n", "14", "--m", "22", "--s", "3", "--threads", "8"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_has_header_and_row() {
    let out = sumset(&["bound", "eval", "--theorem", "1.3", "--n", "100", "--m", "30", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("log2_bound"));
}

#[test]
fn writes_to_out_file() {
    let dir = std::env::temp_dir().join(format!("sumset-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("b1.json");
    let out = sumset(&["lemma", "check", "--lemma", "b1", "--param", "s1=2", "--param", "s2=3", "--param", "m=20", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["inequality_holds"], true);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn runs_sumrise_and_sunset() {
    let v = json(&sumset(&["sumrise", "run", "--ground", "interval:1..4", "--s", "1", "--set-a", "1,2", "--set-b", "1,2", "--trace"]));
    assert_eq!(v["s"], serde_json::json!([1]));
    assert_eq!(v["trace"], serde_json::json!(["0,0,1,5,3"]));
    let v = json(&sumset(&[
        "sunset", "run", "--ground", "interval:1..4", "--s", "1", "--lambda", "1", "--delta", "9/10", "--set-a", "1,2", "--set-b", "1,2", "--trace",
    ]));
    assert_eq!(v["branch"], "if");
    assert_eq!(v["trace"], serde_json::json!(["0,0,1,7,3,if"]));
}

#[test]
fn exit_codes() {
    assert_eq!(sumset(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sumset(&["count", "exact", "--ground", "interval:1..4", "--m", "5"]).status.code(), Some(1));
    let domain = sumset(&["containers", "build", "--ground", "interval:1..8", "--m", "6", "--s", "2", "--epsilon", "0.3"]);
    assert_eq!(domain.status.code(), Some(2));
    let pre = sumset(&["sumrise", "run", "--ground", "interval:1..4", "--s", "3", "--set-a", "1,2", "--set-b", "1"]);
    assert_eq!(pre.status.code(), Some(2));
    let cap = sumset(&["count", "exact", "--ground", "interval:1..30", "--m", "40", "--s", "3", "--cap", "10"]);
    assert_eq!(cap.status.code(), Some(3));
    let falsified = sumset(&[
        "lemma", "check", "--lemma", "stability", "--set-a", "0,1,2,3,5", "--set-b", "0,1,2,3", "--u0", "0,1,2,3,4,5,6,7,8", "--epsilon", "1/1024",
        "--s", "1", "--s2", "1",
    ]);
    assert_eq!(falsified.status.code(), Some(4));
}

#[test]
fn timing_is_opt_in() {
    let args = ["lemma", "check", "--lemma", "lev-smeliansky", "--set-a", "1,2,3,4", "--set-b", "1,2,3"];
    let v = json(&sumset(&args));
    assert!(v.get("elapsed_ms").is_none());
    assert_eq!(v["conclusion_holds"], true);
    let v = json(&sumset(&[&args[..], &["--timing"]].concat()));
    assert!(v.get("elapsed_ms").is_some());
}
