//! End-to-end tests of the `popsim` binary: exit codes, output formats and
//! spec validation.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn popsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_popsim"))
}

fn instances() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn write_instance(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn run_clique_sweep_is_deterministic_and_passes() {
    let go = || {
        popsim()
            .args(["run", "--instance"])
            .arg(instances().join("clique_k3_n9.json"))
            .args(["--protocol", "clique", "--seeds", "0..4"])
            .args(["--checks", "duel_invariants,oracle_compare,ordering_report"])
            .output()
            .unwrap()
    };
    let first = go();
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(lines.len(), 4);
    for (i, line) in lines.iter().enumerate() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["seed"], i as u64);
        assert_eq!(row["violations"], 0);
        assert!(row["converged_step"].is_u64());
    }
    // Bit-identical rerun.
    let second = go();
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn run_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let output = popsim()
        .args(["run", "--instance"])
        .arg(instances().join("baseline_majority_n5.json"))
        .args(["--protocol", "baseline4", "--seeds", "0..2"])
        .args(["--checks", "oracle_compare,fairness_audit"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(dir.path().join("trace_seed0.jsonl").exists());
    assert!(dir.path().join("trace_seed1.jsonl").exists());
    let summary = std::fs::read_to_string(dir.path().join("summary.jsonl")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    // The majority census 3 vs 2 settles on color 0 for every seed.
    for line in summary.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["outputs"]["out"], serde_json::json!([0]));
    }
}

#[test]
fn clique_on_a_path_graph_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(
        dir.path(),
        "bad.json",
        r#"{
            "n": 4, "k": 2, "colors": [0, 1, 0, 1],
            "graph": { "type": "path" },
            "scheduler": { "kind": "uniform_random", "seed": 0 },
            "stop": { "kind": "converged", "window_factor": 10, "max_steps": 100000 }
        }"#,
    );
    let output = popsim()
        .args(["run", "--instance"])
        .arg(&path)
        .args(["--protocol", "clique"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("complete graph"), "{err}");
    // The general protocol accepts the same instance.
    let output = popsim()
        .args(["run", "--instance"])
        .arg(&path)
        .args(["--protocol", "general", "--checks", "oracle_compare"])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn empty_seed_range_is_rejected() {
    let output = popsim()
        .args(["run", "--instance"])
        .arg(instances().join("clique_k3_n9.json"))
        .args(["--protocol", "clique", "--seeds", "5..5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("empty seed list"));
}

#[test]
fn mismatched_checks_are_rejected() {
    let output = popsim()
        .args(["run", "--instance"])
        .arg(instances().join("ordering_k4_n12.json"))
        .args(["--protocol", "ordering", "--checks", "duel_invariants"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("does not apply"));
}

#[test]
fn baseline_requires_two_colors() {
    let output = popsim()
        .args(["run", "--instance"])
        .arg(instances().join("clique_k3_n9.json"))
        .args(["--protocol", "baseline4"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("k = 2"));
}

#[test]
fn certify_stabilization_accepts_and_refutes() {
    let output = popsim()
        .args(["certify", "stabilization", "--instance"])
        .arg(instances().join("baseline_majority_n5.json"))
        .args(["--protocol", "baseline4"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&output).trim()).unwrap();
    assert_eq!(row["verdict"], "certified");

    let output = popsim()
        .args(["certify", "stabilization", "--instance"])
        .arg(instances().join("baseline_flip_a.json"))
        .args(["--protocol", "voter"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let row: serde_json::Value = serde_json::from_str(stdout(&output).trim()).unwrap();
    assert_eq!(row["verdict"], "refuted");
}

#[test]
fn certify_indistinguishability_matches_the_theory() {
    let voter = popsim()
        .args(["certify", "indistinguishability", "--instance"])
        .arg(instances().join("baseline_flip_a.json"))
        .arg("--instance-b")
        .arg(instances().join("baseline_flip_b.json"))
        .args(["--protocol", "voter"])
        .output()
        .unwrap();
    assert!(voter.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&voter).trim()).unwrap();
    assert_eq!(row["outcome"], "witness");

    let baseline = popsim()
        .args(["certify", "indistinguishability", "--instance"])
        .arg(instances().join("baseline_flip_a.json"))
        .arg("--instance-b")
        .arg(instances().join("baseline_flip_b.json"))
        .args(["--protocol", "baseline4"])
        .output()
        .unwrap();
    assert!(baseline.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&baseline).trim()).unwrap();
    assert_eq!(row["outcome"], "disjoint");
}

#[test]
fn audit_states_covers_the_budgets() {
    let output = popsim()
        .args(["audit-states", "--protocol", "ordering", "--k", "1..=16"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout(&output).lines().count(), 16);

    let output = popsim()
        .args(["audit-states", "--protocol", "clique", "--k", "2..=8"])
        .output()
        .unwrap();
    assert!(output.status.success());
    for line in stdout(&output).lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["within"], true);
    }
}

#[test]
fn fairness_flags_scripted_gaps_and_passes_round_robin() {
    let dir = tempfile::tempdir().unwrap();
    let rr = write_instance(
        dir.path(),
        "rr.json",
        r#"{
            "n": 4, "k": 2, "colors": [0, 1, 0, 1],
            "graph": { "type": "complete" },
            "scheduler": { "kind": "round_robin" },
            "stop": { "kind": "max_steps", "n": 24 }
        }"#,
    );
    let out_dir = tempfile::tempdir().unwrap();
    let run = popsim()
        .args(["run", "--instance"])
        .arg(&rr)
        .args(["--protocol", "ordering"])
        .arg("--out")
        .arg(out_dir.path())
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let fair = popsim()
        .args(["fairness", "--instance"])
        .arg(&rr)
        .arg("--trace")
        .arg(out_dir.path().join("trace_seed0.jsonl"))
        .output()
        .unwrap();
    assert!(fair.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&fair).trim()).unwrap();
    assert_eq!(row["absent"].as_array().unwrap().len(), 0);
    // 24 steps over the 12 directed edges of K4: two full cycles.
    for edge in row["per_edge"].as_array().unwrap() {
        assert_eq!(edge["count"], 2);
    }

    let scripted = write_instance(
        dir.path(),
        "scripted.json",
        r#"{
            "n": 4, "k": 2, "colors": [0, 1, 0, 1],
            "graph": { "type": "complete" },
            "scheduler": { "kind": "scripted", "script": [[0, 1], [0, 1]], "cycle": false },
            "stop": { "kind": "max_steps", "n": 10 }
        }"#,
    );
    let out_dir = tempfile::tempdir().unwrap();
    let run = popsim()
        .args(["run", "--instance"])
        .arg(&scripted)
        .args(["--protocol", "ordering"])
        .arg("--out")
        .arg(out_dir.path())
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let fair = popsim()
        .args(["fairness", "--instance"])
        .arg(&scripted)
        .arg("--trace")
        .arg(out_dir.path().join("trace_seed0.jsonl"))
        .output()
        .unwrap();
    assert_eq!(fair.status.code(), Some(1));
    let row: serde_json::Value = serde_json::from_str(stdout(&fair).trim()).unwrap();
    assert_eq!(row["absent"].as_array().unwrap().len(), 11);
}

#[test]
fn general_run_on_er_graph_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(
        dir.path(),
        "er.json",
        r#"{
            "n": 8, "k": 2, "colors": [0, 0, 0, 0, 0, 1, 1, 1],
            "graph": { "type": "er", "p": 0.4, "seed": 11 },
            "scheduler": { "kind": "uniform_random", "seed": 2 },
            "stop": { "kind": "converged", "window_factor": 10, "max_steps": 5000000 }
        }"#,
    );
    let output = popsim()
        .args(["run", "--instance"])
        .arg(&path)
        .args([
            "--protocol",
            "general",
            "--seeds",
            "0..3",
            "--checks",
            "oracle_compare",
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    for line in stdout(&output).lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["outputs"]["ans"], serde_json::json!([0]));
    }
}

#[test]
fn scripted_travel_demo_restores_placement() {
    let out_dir = tempfile::tempdir().unwrap();
    let output = popsim()
        .args(["run", "--instance"])
        .arg(instances().join("path5_travel.json"))
        .args(["--protocol", "general", "--snapshots", "1"])
        .arg("--out")
        .arg(out_dir.path())
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let trace = std::fs::read_to_string(out_dir.path().join("trace_seed0.jsonl")).unwrap();
    let snapshots: Vec<&str> = trace.lines().filter(|l| l.contains("config")).collect();
    assert_eq!(snapshots.len(), 9); // steps 0..=8
}
