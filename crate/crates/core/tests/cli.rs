//! The `fusionlab` binary: outputs, determinism and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use fusionlab::matrix::read_matrix_file;
use fusionlab::{derive_invariants, total_relevant_probability};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fusionlab"))
        .args(args)
        .output()
        .expect("spawn fusionlab")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn analyze_pbs2_and_identity() {
    let out = run(&["analyze", "--matrix", "pbs2"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let stabilizers = v["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|o| o["relevant"] == true && o["probability"] == 0.125)
        .filter(|o| o["entropy_bits"] == 1.0)
        .filter(|o| o["classification"]["labels"][0]["label"] == "Stabilizer")
        .count();
    assert_eq!(stabilizers, 4);

    let out = run(&["analyze", "--matrix", "identity"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for o in v["outcomes"].as_array().unwrap() {
        if o["relevant"] == true {
            assert_eq!(o["classification"]["labels"][0]["label"], "Product");
        }
    }
}

#[test]
fn analyze_rejects_non_unitary() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let row = |k: usize| -> Vec<[f64; 2]> {
        (0..4)
            .map(|c| [if c == k { 2.0 } else { 0.0 }, 0.0])
            .collect()
    };
    let json = serde_json::json!({ "matrix": (0..4).map(row).collect::<Vec<_>>() });
    std::fs::write(&bad, json.to_string()).unwrap();
    let out = run(&["analyze", "--matrix", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not unitary"));
}

#[test]
fn analyze_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub/report.json");
    let out = run(&[
        "analyze",
        "--matrix",
        "theorem7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["total_relevant_probability"], 0.5);
}

#[test]
fn sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        assert_eq!(
            code(&run(&[
                "sample",
                "--n",
                "1000",
                "--seed",
                "7",
                "--out",
                p.to_str().unwrap()
            ])),
            0
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sample_expectation_rows_respect_the_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scatter.csv");
    let out = run(&[
        "sample",
        "--n",
        "10000",
        "--mode",
        "expectation",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&path);
    assert_eq!(rows.len(), 10000);
    for r in &rows {
        let p: f64 = r[1].parse().unwrap();
        let s: f64 = r[2].parse().unwrap();
        assert!(p >= 0.5 - 1e-12);
        assert!(s <= p + 1e-12);
    }
}

#[test]
fn sample_threshold_and_nats() {
    let bits = run(&[
        "sample",
        "--n",
        "5",
        "--mode",
        "threshold",
        "--s-targets",
        "0,1",
    ]);
    let nats = run(&[
        "sample",
        "--n",
        "5",
        "--mode",
        "threshold",
        "--s-targets",
        "0,1",
        "--nats",
    ]);
    assert_eq!(code(&bits), 0);
    let bits = String::from_utf8(bits.stdout).unwrap();
    let nats = String::from_utf8(nats.stdout).unwrap();
    assert!(bits.starts_with("sample,s_target,P,running_mean,running_std,unit\n"));
    assert_eq!(bits.lines().count(), 11);
    // s = 1 bit is ln 2 nats; P is unitless
    assert!(nats.lines().nth(2).unwrap().starts_with("0,0.69314718056,"));
    assert!(bits.lines().nth(1).unwrap().starts_with("0,0,1,"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["sample", "--n", "0"])), 2);
    assert_eq!(
        code(&run(&["optimize", "threshold", "--s-target", "1.5"])),
        2
    );
    assert_eq!(
        code(&run(&["optimize", "expectation", "--p-target", "0.2"])),
        2
    );
    assert_eq!(code(&run(&["optimize", "threshold"])), 2);
    assert_eq!(code(&run(&["analyze"])), 2);
    assert_eq!(code(&run(&["analyze", "--matrix", "no-such-file.json"])), 2);
    assert_eq!(code(&run(&["verify", "--trials", "0"])), 2);
}

#[test]
fn optimize_threshold_writes_sweep_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "optimize",
        "threshold",
        "--s-target",
        "1.0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&dir.path().join("sweep_threshold.csv"));
    assert_eq!(rows.len(), 1);
    let p_max: f64 = rows[0][1].parse().unwrap();
    assert!((0.499..=0.5 + 1e-9).contains(&p_max), "{p_max}");
    assert_eq!(rows[0][6], "bits");
    let u = read_matrix_file(&dir.path().join("best_threshold_s1.json"), 1e-9).unwrap();
    let n = derive_invariants(&u).n;
    assert!(n.iter().all(|x| x.abs() <= 1e-3), "{n:?}");
}

#[test]
fn optimize_expectation_reaches_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "optimize",
        "expectation",
        "--p-target",
        "0.5",
        "--restarts",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&dir.path().join("sweep_expectation.csv"));
    let s_max: f64 = rows[0][1].parse().unwrap();
    assert!(s_max >= 0.49, "{s_max}");
    let u = read_matrix_file(&dir.path().join("best_expectation_p0.5.json"), 1e-9).unwrap();
    assert!((total_relevant_probability(&u) - 0.5).abs() < 0.01);
}

#[test]
fn optimize_is_deterministic() {
    let args = [
        "optimize",
        "threshold",
        "--sweep",
        "--sweep-step",
        "0.5",
        "--restarts",
        "2",
        "--iterations",
        "60",
        "--init-samples",
        "10",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("s_target_bits,P_max,P_mean,states_used,seed,iterations,unit\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(code(&run(&["verify", "--trials", "1"])), 0);
    assert_eq!(
        code(&run(&["verify", "--trials", "20", "--negative-control"])),
        1
    );
}

#[test]
fn oracle_commands() {
    let out = run(&["oracle", "--chains", "3+3", "--matrix", "pbs2"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["qubits"], 7);

    assert_eq!(
        code(&run(&["oracle", "--chains", "2+2", "--matrix", "haar:9"])),
        0
    );
    let big = run(&["oracle", "--chains", "8+8"]);
    assert_eq!(code(&big), 2);
    assert!(String::from_utf8_lossy(&big.stderr).contains("capped at 14"));
}

#[test]
fn oracle_from_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let left = dir.path().join("left.txt");
    let right = dir.path().join("right.txt");
    std::fs::write(&left, "3 010\n0 1\n1 2\n0 2\nmark 2\n").unwrap();
    std::fs::write(&right, "3\n0 1\n1 2\nmark 1  # two neighbours\n").unwrap();
    let out = run(&[
        "oracle",
        "--left",
        left.to_str().unwrap(),
        "--right",
        right.to_str().unwrap(),
        "--matrix",
        "theorem7",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["arity"], "two");
}
