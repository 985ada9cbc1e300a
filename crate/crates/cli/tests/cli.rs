mod common;

use std::thread;

use common::{run, run_json, schema, validate};
use serde_json::Value;

fn assert_valid(command: &str, doc: &Value) {
    let errors = validate(&schema(command), doc);
    assert!(errors.is_empty(), "{command}: {errors:#?}");
    assert_eq!(doc["command"], command);
}

#[test]
fn validator_rejects_bad_documents() {
    let s = schema("classical-bound");
    let mut doc = run_json(&["classical-bound"]);
    assert!(validate(&s, &doc).is_empty());
    doc["bound"] = Value::String("seven".into());
    doc.as_object_mut().unwrap().remove("strategy");
    assert_eq!(validate(&s, &doc).len(), 2);
}

#[test]
fn every_subcommand_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).display().to_string();
    let cases: Vec<(&str, Vec<String>)> = vec![
        ("magic-square", vec!["magic-square".into(), "--exact".into()]),
        (
            "magic-square",
            vec![
                "magic-square".into(),
                "--trials".into(),
                "200".into(),
                "--backend".into(),
                "gaussian".into(),
            ],
        ),
        ("classical-bound", vec!["classical-bound".into()]),
        ("four-pair", vec!["four-pair".into(), "--backend".into(), "oracle".into()]),
        ("ghz-scan", vec!["ghz-scan".into(), "--trials".into(), "100".into()]),
        ("ghz-encoding", vec!["ghz-encoding".into(), "--block".into(), "4".into()]),
        (
            "ghz-encoding",
            vec!["ghz-encoding".into(), "--parties".into(), "5".into(), "--block".into(), "0".into()],
        ),
        ("teleport", vec!["teleport".into(), "--trials".into(), "500".into()]),
        ("dense-code", vec!["dense-code".into()]),
        (
            "noise-sweep",
            vec!["noise-sweep".into(), "--points".into(), "11".into(), "--rounds".into(), "50".into()],
        ),
        (
            "source-gen",
            vec![
                "source-gen".into(),
                "--rounds".into(),
                "3".into(),
                "--alice-out".into(),
                p("a"),
                "--bob-out".into(),
                p("b"),
            ],
        ),
        (
            "crosscheck",
            vec![
                "crosscheck".into(),
                "--pairs".into(),
                "2".into(),
                "--depth".into(),
                "4".into(),
                "--random-programs".into(),
                "50".into(),
            ],
        ),
    ];
    for (command, args) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let doc = run_json(&args);
        assert_valid(command, &doc);
        assert_eq!(doc["passed"], true, "{args:?}");
    }
}

#[test]
fn serve_outputs_match_schema() {
    let dir = tempfile::tempdir().unwrap();
    let addr = dir.path().join("addr").display().to_string();
    let capture = dir.path().join("capture.jsonl").display().to_string();
    let (a1, a2) = (addr.clone(), addr.clone());
    let referee = thread::spawn(move || {
        run_json(&[
            "--seed",
            "2",
            "serve",
            "referee",
            "--rounds",
            "300",
            "--mode",
            "lhv",
            "--addr-file",
            &addr,
            "--capture",
            &capture,
        ])
    });
    let alice = thread::spawn(move || run_json(&["serve", "alice", "--mode", "lhv", "--addr-file", &a1]));
    let bob = run_json(&["serve", "bob", "--mode", "lhv", "--addr-file", &a2]);
    let (referee, alice) = (referee.join().unwrap(), alice.join().unwrap());
    for doc in [&referee, &alice, &bob] {
        assert_valid("serve", doc);
    }
    assert_eq!(referee["seed"], 2);
    assert_eq!(referee["conformance"]["verdict"], "PASS");
    assert_eq!(referee["summary"], alice["summary"]);
    assert_eq!(bob["answered"], 300);
}

#[test]
fn spec_examples() {
    let m = run_json(&["magic-square", "--exact"]);
    assert_eq!(m["quantum_value"], 9);
    assert_eq!(m["quantum_value_exact"], "9");
    let c = run_json(&["classical-bound"]);
    assert_eq!(c["bound"], 7);
    assert_eq!(c["strategy_value"], 7);
    assert!(c["strategy"]["alice_table"].is_array() && c["strategy"]["bob_table"].is_array());
    assert_eq!(c["identical_tables_bound"], 3);
}

#[test]
fn output_is_deterministic_and_echoes_seed() {
    for args in [
        vec!["--seed", "17", "ghz-scan", "--trials", "300"],
        vec!["--seed", "17", "teleport", "--trials", "2000"],
        vec!["--seed", "17", "noise-sweep", "--points", "6", "--rounds", "500"],
        vec!["--seed", "17", "--format", "csv", "noise-sweep", "--points", "6", "--rounds", "500"],
        vec!["--seed", "17", "--threads", "1", "ghz-scan", "--trials", "300"],
    ] {
        let (x, y) = (run(&args), run(&args));
        assert!(x.status.success());
        assert_eq!(x.stdout, y.stdout, "{args:?}");
    }
    let doc = run_json(&["--seed", "17", "ghz-scan", "--trials", "10"]);
    assert_eq!(doc["seed"], 17);
    assert_eq!(run_json(&["dense-code"])["seed"], 0);
    // the thread count does not change results
    assert_eq!(
        run(&["--threads", "1", "ghz-scan", "--trials", "300"]).stdout,
        run(&["ghz-scan", "--trials", "300"]).stdout
    );
}

#[test]
fn csv_sweep_has_header() {
    let out = run(&["--format", "csv", "noise-sweep", "--points", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,g_exact,g_mc,stderr");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.000000,9.000000000000"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["magic-square", "--no-such-flag"]), Some(2));
    assert_eq!(code(&["no-such-command"]), Some(2));
    assert_eq!(code(&["--format", "csv", "classical-bound"]), Some(2));
    assert_eq!(code(&["--backend", "stabilizer", "noise-sweep"]), Some(2));
    assert_eq!(code(&["--threads", "0", "dense-code"]), Some(2));
    assert_eq!(
        code(&["serve", "alice", "--connect", "127.0.0.1:1", "--tape", "/nonexistent/tape"]),
        Some(1)
    );
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("crosscheck"));
}

#[test]
fn oracle_refuses_more_than_twelve_modes() {
    let out = run(&["--backend", "oracle", "ghz-scan", "--trials", "5", "--max-pairs", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refuses 14 modes"));
    let ok = run_json(&["--backend", "oracle", "ghz-scan", "--trials", "50", "--max-pairs", "6"]);
    assert_eq!(ok["backend_failures"], 0);
}
