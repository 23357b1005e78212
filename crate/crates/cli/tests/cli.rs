use std::fs;
use std::process::{Command, Output};

fn mpcmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpcmm"))
        .args(args)
        .env("MPCMM_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn match_path_is_perfect() {
    let out = mpcmm(&["match", "--gen", "path:1000", "--mode", "loglog"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["summary"]["matching_size"], 500);
    assert_eq!(v["summary"]["maximal"], true);
    assert_eq!(v["summary"]["seed"], 0x5eed_2019u64);
}

#[test]
fn match_complete_graph() {
    let out = mpcmm(&["match", "--gen", "complete:9"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["summary"]["matching_size"], 4);
}

#[test]
fn usage_errors_exit_two() {
    let out = mpcmm(&["match"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(
        mpcmm(&["match", "--gen", "path:10", "--input", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(mpcmm(&["match", "--gen", "wheel:5"]).status.code(), Some(2));
    assert_eq!(
        mpcmm(&["match", "--input", "/nonexistent/graph.txt"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mpcmm(&["match", "--gen", "path:10", "--p-exponent", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mpcmm(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(mpcmm(&["verify", "tails", "--beta", "2"]).status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let summary = dir.path().join(format!("s{tag}.json"));
        let matching = dir.path().join(format!("m{tag}.json"));
        let out = mpcmm(&[
            "match",
            "--gen",
            "random-regular:3000,64",
            "--seed",
            "17",
            "--output",
            summary.to_str().unwrap(),
            "--matching-out",
            matching.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        (fs::read(summary).unwrap(), fs::read(matching).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let m: serde_json::Value = serde_json::from_slice(&a.1).unwrap();
    assert_eq!(m["seed"], 17);
    assert!(!m["edges"].as_array().unwrap().is_empty());
}

#[test]
fn input_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let out = mpcmm(&[
        "gen",
        "erdos-renyi:200,6",
        "--seed",
        "4",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# erdos-renyi:200,6 seed=4"));
    let out = mpcmm(&["match", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["summary"]["maximal"], true);
}

#[test]
fn verify_reports_instances() {
    let out = mpcmm(&["verify", "vertex-cover", "--trials", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["instances"], 31);
    let out = mpcmm(&[
        "verify", "tails", "--beta", "0.05", "--p", "0.5", "--trials", "300", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# seed="));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sweep_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("fits.json");
    let out = mpcmm(&[
        "sweep",
        "--n",
        "600",
        "--degrees",
        "8,32,128",
        "--seeds",
        "2",
        "--census-trials",
        "2",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# seed="));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("degree,seed_index,seed,n,m,max_degree,phases"));
    assert_eq!(lines.count(), 6);
    let fits: serde_json::Value = serde_json::from_str(&fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(fits["schema_version"], 1);
    assert_eq!(fits["fits"]["per_degree"].as_array().unwrap().len(), 3);
}
