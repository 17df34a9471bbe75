use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fidroute(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fidroute"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = fidroute(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const LINE_CNOT: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncx q[0],q[2];\n";

#[test]
fn reference_heavy_hex_has_127_qubits_and_144_edges() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["gen-topology", "--reference", "--out", "."]);
    let t = json(&tmp.path().join("topology.json"));
    let edges = t["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 144);
    let max = edges
        .iter()
        .flat_map(|e| e.as_array().unwrap().iter().map(|q| q.as_u64().unwrap()))
        .max()
        .unwrap();
    assert_eq!(max, 126);
    assert!(tmp.path().join("manifest-gen-topology.json").exists());
}

#[test]
fn planted_failures_appear_as_unit_error_rates() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-topology", "--reference"]);
    ok(
        d,
        &[
            "gen-calibration",
            "--topology",
            "topology.json",
            "--fail-edges",
            "2",
            "--seed",
            "7",
        ],
    );
    let cal = json(&d.join("calibration.json"));
    let failed = cal["edge_errors"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e[2].as_f64() == Some(1.0))
        .count();
    assert_eq!(failed, 2, "{cal}");
}

#[test]
fn same_seed_gives_identical_outputs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [a.path(), b.path()] {
        ok(d, &["gen-topology", "--kind", "ring", "--n", "8"]);
        ok(
            d,
            &[
                "gen-calibration",
                "--topology",
                "topology.json",
                "--count",
                "2",
                "--seed",
                "3",
            ],
        );
        ok(
            d,
            &[
                "gen-data",
                "--topology",
                "topology.json",
                "--calibrations",
                "calibrations.jsonl",
                "--num",
                "60",
                "--max-len",
                "5",
                "--shots",
                "200",
                "--seed",
                "3",
            ],
        );
    }
    for name in [
        "topology.json",
        "calibrations.jsonl",
        "dataset.jsonl",
        "manifest-gen-data.json",
    ] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn zero_experiments_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-topology", "--kind", "line", "--n", "4"]);
    ok(d, &["gen-calibration", "--topology", "topology.json"]);
    let out = fidroute(
        d,
        &[
            "gen-data",
            "--topology",
            "topology.json",
            "--calibrations",
            "calibrations.jsonl",
            "--num",
            "0",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.join("dataset.jsonl").exists());
}

#[test]
fn bad_length_range_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-topology", "--kind", "line", "--n", "4"]);
    ok(d, &["gen-calibration", "--topology", "topology.json"]);
    let out = fidroute(
        d,
        &[
            "gen-data",
            "--topology",
            "topology.json",
            "--calibrations",
            "calibrations.jsonl",
            "--min-len",
            "9",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_file_is_a_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let out = fidroute(tmp.path(), &["gen-calibration", "--topology", "nope.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));
}

#[test]
fn shortest_route_on_a_line_inserts_one_swap() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-topology", "--kind", "line", "--n", "3"]);
    ok(d, &["gen-calibration", "--topology", "topology.json"]);
    fs::write(d.join("c.qasm"), LINE_CNOT).unwrap();
    ok(
        d,
        &[
            "route",
            "--circuit",
            "c.qasm",
            "--topology",
            "topology.json",
            "--calibration",
            "calibration.json",
            "--method",
            "shortest",
            "--out",
            "routed.qasm",
        ],
    );
    let routed = fs::read_to_string(d.join("routed.qasm")).unwrap();
    assert_eq!(routed.matches("swap ").count(), 1, "{routed}");
    assert_eq!(routed.matches("cx ").count(), 1, "{routed}");
    assert!(routed.contains("swap q[0],q[1];"));
    assert!(routed.contains("cx q[1],q[2];"));
    let report = json(&d.join("routed.report.json"));
    assert_eq!(report["swap_count"], 1);
    assert!(d.join("manifest-route.json").exists());
}

#[test]
fn xgswap_without_a_model_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-topology", "--kind", "line", "--n", "3"]);
    ok(d, &["gen-calibration", "--topology", "topology.json"]);
    fs::write(d.join("c.qasm"), LINE_CNOT).unwrap();
    let out = fidroute(
        d,
        &[
            "route",
            "--circuit",
            "c.qasm",
            "--topology",
            "topology.json",
            "--calibration",
            "calibration.json",
            "--out",
            "r.qasm",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.join("r.qasm").exists());
}

#[test]
fn full_pipeline_on_a_small_grid() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "gen-topology",
            "--kind",
            "grid",
            "--rows",
            "2",
            "--cols",
            "4",
        ],
    );
    ok(
        d,
        &[
            "gen-calibration",
            "--topology",
            "topology.json",
            "--count",
            "4",
            "--seed",
            "11",
        ],
    );
    let summary = ok(
        d,
        &[
            "gen-data",
            "--topology",
            "topology.json",
            "--calibrations",
            "calibrations.jsonl",
            "--num",
            "120",
            "--max-len",
            "5",
            "--seed",
            "11",
        ],
    );
    assert!(summary.starts_with("experiments,min_length,max_length,mean_length\n120,2,5,"));
    ok(
        d,
        &["prepare", "--dataset", "dataset.jsonl", "--seed", "11"],
    );
    for f in ["train.jsonl", "validation.jsonl", "bins.csv"] {
        assert!(d.join(f).exists(), "{f}");
    }
    ok(
        d,
        &[
            "train",
            "--train",
            "train.jsonl",
            "--topology",
            "topology.json",
            "--calibrations",
            "calibrations.jsonl",
            "--lmax",
            "8",
            "--rounds",
            "20",
        ],
    );
    let trace = fs::read_to_string(d.join("training_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 22);
    let metrics = ok(
        d,
        &[
            "evaluate",
            "--model",
            "model.json",
            "--validation",
            "validation.jsonl",
            "--topology",
            "topology.json",
            "--calibrations",
            "calibrations.jsonl",
        ],
    );
    assert!(metrics.starts_with("MAE,MSE,RMSE,R2\n"));
    let table = fs::read_to_string(d.join("fidelity_vs_length.csv")).unwrap();
    assert!(table.starts_with("length,count,measured_fidelity,predicted_fidelity\n"));

    fs::write(
        d.join("c.qasm"),
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[8];\nh q[0];\ncx q[0],q[7];\ncx q[3],q[4];\n",
    )
    .unwrap();
    ok(
        d,
        &[
            "route",
            "--circuit",
            "c.qasm",
            "--topology",
            "topology.json",
            "--calibration",
            "calibration.json",
            "--model",
            "model.json",
            "--out",
            "out/routed.qasm",
        ],
    );
    let report = json(&d.join("out/routed.report.json"));
    assert_eq!(report["chosen_paths"].as_array().unwrap().len(), 2);
    assert!(report["chosen_paths"][0]["predicted_fidelity"].is_number());

    let out = ok(
        d,
        &[
            "compare",
            "--topology",
            "topology.json",
            "--calibration",
            "calibration.json",
            "--model",
            "model.json",
            "--pairs",
            "15",
            "--min-len",
            "3",
            "--max-len",
            "4",
            "--seed",
            "2",
            "--out",
            "cmp",
        ],
    );
    assert!(out.contains("outcome,count,proportion"));
    let rows = fs::read_to_string(d.join("cmp/comparison.csv")).unwrap();
    assert_eq!(rows.lines().count(), 16);
    assert!(d.join("cmp/comparison_summary.csv").exists());
}

#[test]
fn replay_reproduces_the_recorded_run() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-topology", "--kind", "ring", "--n", "6"]);
    ok(
        d,
        &[
            "gen-calibration",
            "--topology",
            "topology.json",
            "--count",
            "3",
            "--seed",
            "9",
        ],
    );
    let first = fs::read(d.join("calibrations.jsonl")).unwrap();
    fs::remove_file(d.join("calibrations.jsonl")).unwrap();
    ok(
        d,
        &["replay", "--manifest", "manifest-gen-calibration.json"],
    );
    assert_eq!(fs::read(d.join("calibrations.jsonl")).unwrap(), first);
}

#[test]
fn reference_conflicts_with_other_kinds() {
    let tmp = TempDir::new().unwrap();
    let out = fidroute(
        tmp.path(),
        &["gen-topology", "--reference", "--kind", "ring", "--n", "5"],
    );
    assert_eq!(out.status.code(), Some(1));
}
