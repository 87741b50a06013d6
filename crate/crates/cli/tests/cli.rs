use std::path::Path;
use std::process::{Command, Output};

use dilate_core::exponents::ExponentReport;
use dilate_core::verify::{SuiteReport, TrialRecord};
use dilate_core::Decomposition;

fn dilates(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilates"))
        .args(args)
        .env("NO_COLOR", "1")
        .env_remove("DILATES_COLOR")
        .output()
        .expect("run dilates")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_table_names_the_winner() {
    let o = dilates(&["bounds", "--lambdas", "3,5,6", "--format", "table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("plunnecke                14"), "{text}");
    assert!(text.contains("95.7078"));
    assert!(text.contains("best                     plunnecke = 14"));
}

#[test]
fn zero_coefficient_is_a_usage_error() {
    let o = dilates(&["bounds", "--lambdas", "0,2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coefficient #1 is zero"));
    let o = dilates(&["bounds", "--lambdas", "3,,5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repeated_coefficients_round_trip_as_json() {
    let o = dilates(&["bounds", "--lambdas", "65535", "--repeat", "16", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: ExponentReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep.best, "decomposition/greedy");
    assert_eq!(rep.decomposition_exponents["greedy"], 221);
    assert_eq!(serde_json::to_string_pretty(&rep).unwrap() + "\n", stdout(&o));
}

#[test]
fn negative_lists_and_single_methods() {
    let o = dilates(&["bounds", "--lambdas", "-7,2", "--method", "plunnecke", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["exponent"], 9);
    let o = dilates(&["bounds", "--lambdas", "1", "--method", "main-theorem"]);
    assert_eq!(o.status.code(), Some(1), "r + h < 3 has no main-theorem value");
}

#[test]
fn decompose_writes_a_valid_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("k33.json");
    let edges: Vec<(usize, usize)> = (1..=3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
    let json = serde_json::json!({"left": 3, "right": 3, "edges": edges});
    std::fs::write(&graph, json.to_string()).unwrap();
    let out = dir.path().join("d.json");
    let o = dilates(&["decompose", "--graph", path(&graph), "--algo", "greedy", "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let d: Decomposition = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((d.weight, d.len()), (6, 1));
    assert!(stdout(&o).contains("validation   valid"));
}

#[test]
fn decompose_exact_limits() {
    let o = dilates(&["decompose", "--lambdas", "3,5,6", "--algo", "exact", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["weight"], 9);
    assert_eq!(v["validation"]["reconstruction"], true);
    let o = dilates(&["decompose", "--lambdas", "3,5,6", "--algo", "exact", "--max-edges", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dilates(&["decompose", "--graph", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_exit_codes_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    let o = dilates(&[
        "verify", "ruzsa", "--trials", "300", "--seed", "7", "--format", "json", "--log", path(&log),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rep: SuiteReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((rep.trials, rep.violated), (300, 0));
    let lines = std::fs::read_to_string(&log).unwrap();
    let recs: Vec<TrialRecord> = lines.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 300);
    assert!(recs.iter().all(|r| r.slack >= rep.min_slack.unwrap()));

    assert_eq!(dilates(&["verify", "nosuch"]).status.code(), Some(1));
    assert_eq!(dilates(&["verify", "ruzsa", "--max-set-size", "1"]).status.code(), Some(1));
    let o = dilates(&["verify", "ruzsa", "--exhaustive", "--universe", "40"]);
    assert_eq!(o.status.code(), Some(2), "instance limit");
    let o = dilates(&["verify", "plunnecke", "--trials", "50", "--cap", "3"]);
    assert_eq!(o.status.code(), Some(2), "cardinality cap");
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"trials": 40, "seed": 3, "format": "json"}"#).unwrap();
    let o = dilates(&["verify", "prop6", "--config", path(&cfg), "--trials", "25"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: SuiteReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((rep.instances, rep.config.seed), (25, 3));
}

#[test]
fn gap_examples() {
    let o = dilates(&["gap", "--base", "0", "--diffs", "1,10", "--lengths", "3,3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((v["size"].as_u64(), v["proper"].as_bool()), (Some(9), Some(true)));
    assert_eq!(v["doubling"], serde_json::json!({"numer": 25, "denom": 9}));

    let o = dilates(&["gap", "--base", "0", "--diffs", "1,2", "--lengths", "3,3"]);
    assert!(stdout(&o).contains("proper    false"));

    let o = dilates(&[
        "gap", "--base", "0", "--diffs", "1,10", "--lengths", "3,3", "--lambdas", "2,3",
    ]);
    assert!(stdout(&o).contains("75 <= 5^2 * 9 = 225: holds"), "{}", stdout(&o));

    let o = dilates(&["gap", "--base", "0", "--diffs", "1", "--lengths", "100", "--cap", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(dilates(&["--help"]).status.code(), Some(0));
    assert_eq!(dilates(&["bounds", "--frobnicate"]).status.code(), Some(1));
    assert_eq!(dilates(&[]).status.code(), Some(1));
}

#[test]
fn color_toggle_only_touches_tables() {
    let plain = dilates(&["bounds", "--lambdas", "3,5,6"]);
    assert!(!stdout(&plain).contains('\x1b'));
    let colored = Command::new(env!("CARGO_BIN_EXE_dilates"))
        .args(["bounds", "--lambdas", "3,5,6"])
        .env("DILATES_COLOR", "always")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&colored.stdout).contains("\x1b[32m"));
    let json = Command::new(env!("CARGO_BIN_EXE_dilates"))
        .args(["bounds", "--lambdas", "3,5,6", "--format", "json"])
        .env("DILATES_COLOR", "always")
        .output()
        .unwrap();
    assert!(!String::from_utf8_lossy(&json.stdout).contains('\x1b'));
}
