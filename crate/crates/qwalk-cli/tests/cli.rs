//! End-to-end tests that spawn the built binary and inspect its JSON
//! output and exit codes.

use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

fn run_with(args: &[&str], envs: &[(&str, &str)]) -> (i32, Value, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qwalk"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    let stdout = String::from_utf8(out.stdout).expect("stdout is utf-8");
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    let json: Value = serde_json::from_str(&stdout)
        .unwrap_or_else(|e| panic!("stdout must be one JSON document ({e}): {stdout:?}"));
    (out.status.code().expect("exit code"), json, stderr)
}

fn run(args: &[&str]) -> (i32, Value, String) {
    run_with(args, &[])
}

fn scratch(name: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let id = COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("qwalk-test-{}-{id}-{name}", std::process::id()))
}

fn repo_file(rel: &str) -> String {
    format!("{}/../../{rel}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn build_reports_compound_size() {
    let (code, json, _) = run(&[
        "build",
        "complete:2",
        "--satellites",
        "complete:1,complete:1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["status"], "ok");
    assert_eq!(json["vertices"], 4);
    assert_eq!(json["edges"], 3);
    assert_eq!(json["labels"][2], "v:0/w:0");
}

#[test]
fn build_handles_mixed_satellites() {
    let (code, json, _) = run(&["build", "path:3", "--satellites", "path:2,path:1,path:2"]);
    assert_eq!(code, 0);
    assert_eq!(json["vertices"], 8);
    assert_eq!(json["edges"], 14);
}

#[test]
fn build_rejects_unknown_family() {
    let (code, json, stderr) = run(&["build", "blob:3", "--satellites", "complete:1"]);
    assert_eq!(code, 64);
    assert_eq!(json["status"], "usage");
    assert!(stderr.contains("blob"));
}

#[test]
fn build_writes_edge_list_and_labels() {
    let out = scratch("compound.edges");
    let out_str = out.to_str().unwrap();
    let (code, json, _) = run(&[
        "build",
        "cycle:4",
        "--satellites",
        "complete:1",
        "--out",
        out_str,
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["vertices"], 8);

    let labels_text = std::fs::read_to_string(format!("{out_str}.labels.json")).unwrap();
    let labels: Value = serde_json::from_str(&labels_text).unwrap();
    assert_eq!(labels["labels"].as_array().unwrap().len(), 8);

    // the written edge list round-trips through @file input
    let spec = format!("@{out_str}");
    let (code, json, _) = run(&["spectrum", &spec]);
    assert_eq!(code, 0);
    let mults: u64 = json["spectrum"]["multiplicities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(mults, 8);
}

#[test]
fn spectrum_numeric_finds_golden_ratios() {
    let (code, json, _) = run(&["spectrum", "path:4"]);
    assert_eq!(code, 0);
    let values: Vec<f64> = json["spectrum"]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let expected = [phi, phi - 1.0, 1.0 - phi, -phi];
    assert_eq!(values.len(), 4);
    for (got, want) in values.iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!(json["invariant_max_deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn spectrum_closed_form_agrees_with_numeric() {
    let (code, numeric, _) = run(&["spectrum", "cycle:6", "--satellites", "complete:2"]);
    assert_eq!(code, 0);
    let (code, closed, _) = run(&[
        "spectrum",
        "cycle:6",
        "--satellites",
        "complete:2",
        "--closed-form",
    ]);
    assert_eq!(code, 0);
    assert_eq!(closed["mode"], "closed-form");
    assert!(!closed["branches"].as_array().unwrap().is_empty());

    let expand = |doc: &Value| -> Vec<f64> {
        let values = doc["spectrum"]["eigenvalues"].as_array().unwrap();
        let mults = doc["spectrum"]["multiplicities"].as_array().unwrap();
        let mut out = Vec::new();
        for (v, m) in values.iter().zip(mults) {
            for _ in 0..m.as_u64().unwrap() {
                out.push(v.as_f64().unwrap());
            }
        }
        out
    };
    let a = expand(&numeric);
    let b = expand(&closed);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn spectrum_closed_form_requires_regular_base() {
    let (code, json, _) = run(&[
        "spectrum",
        "path:3",
        "--satellites",
        "complete:1",
        "--closed-form",
    ]);
    assert_eq!(code, 2);
    assert_eq!(json["status"], "precondition_failed");
}

#[test]
fn fidelity_vanishes_for_inner_path_pair_at_zero() {
    let (code, json, _) = run(&["fidelity", "path:4", "--u", "1", "--v", "2", "--t", "0"]);
    assert_eq!(code, 0);
    assert!(json["fidelity"].as_f64().unwrap() < 1e-12);
}

#[test]
fn fidelity_peaks_for_edge_at_quarter_turn() {
    let (code, json, _) = run(&[
        "fidelity",
        "complete:2",
        "--u",
        "0",
        "--v",
        "1",
        "--t",
        "1.5707963267948966",
    ]);
    assert_eq!(code, 0);
    assert!(json["fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
}

#[test]
fn fidelity_scan_writes_curve() {
    let out = scratch("curve.csv");
    let out_str = out.to_str().unwrap();
    // window around t = 93*pi where the edge-with-satellites compound
    // revives
    let (code, json, _) = run(&[
        "fidelity",
        "complete:2",
        "--satellites",
        "complete:1",
        "--u",
        "v:0",
        "--v",
        "v:1",
        "--scan",
        "290",
        "294",
        "4001",
        "--out",
        out_str,
    ]);
    assert_eq!(code, 0);
    assert!(json["max_fidelity"].as_f64().unwrap() > 0.99);
    let csv = std::fs::read_to_string(out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re,im,fidelity"));
    assert_eq!(lines.count(), 4001);
}

#[test]
fn fidelity_reads_spectral_data() {
    let data = repo_file("data/golay_double_4096.json");
    let (code, json, _) = run(&[
        "fidelity", "--data", &data, "--u", "0", "--v", "1", "--t", "1.0",
    ]);
    assert_eq!(code, 0);
    let f = json["fidelity"].as_f64().unwrap();
    assert!(f.is_finite() && f <= 1.0 + 1e-12);

    let (code, json, _) = run(&[
        "fidelity", "--data", &data, "--u", "0", "--v", "0", "--t", "0",
    ]);
    assert_eq!(code, 0);
    assert!((json["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn fidelity_rejects_labels_without_a_compound() {
    let (code, json, _) = run(&[
        "fidelity",
        "complete:2",
        "--u",
        "v:0",
        "--v",
        "1",
        "--t",
        "1",
    ]);
    assert_eq!(code, 64);
    assert_eq!(json["status"], "usage");
}

#[test]
fn fidelity_rejects_out_of_range_labels() {
    let (code, json, _) = run(&[
        "fidelity",
        "complete:2",
        "--satellites",
        "complete:1",
        "--u",
        "v:0/w:5",
        "--v",
        "v:1",
        "--t",
        "1",
    ]);
    assert_eq!(code, 64);
    assert_eq!(json["status"], "usage");
}

#[test]
fn certify_periodic_integer_spectrum() {
    let (code, json, _) = run(&["certify", "--mode", "periodic", "cycle:4", "--vertex", "0"]);
    assert_eq!(code, 0);
    assert_eq!(json["verdict"], "periodic");
    assert_eq!(json["report"]["criterion"], "integer-spectrum");
}

#[test]
fn certify_periodic_quadratic_spectrum() {
    let (code, json, _) = run(&["certify", "--mode", "periodic", "path:3", "--vertex", "0"]);
    assert_eq!(code, 0);
    assert_eq!(json["verdict"], "periodic");
    assert_eq!(json["report"]["criterion"], "quadratic-spectrum");
}

#[test]
fn certify_periodic_inconclusive_exit_code() {
    let out = scratch("c5k1.edges");
    let out_str = out.to_str().unwrap();
    let (code, _, _) = run(&[
        "build",
        "cycle:5",
        "--satellites",
        "complete:1",
        "--out",
        out_str,
    ]);
    assert_eq!(code, 0);
    let spec = format!("@{out_str}");
    let (code, json, _) = run(&["certify", "--mode", "periodic", &spec, "--vertex", "0"]);
    assert_eq!(code, 3);
    assert_eq!(json["status"], "inconclusive");
    assert_eq!(json["verdict"], "inconclusive");
}

#[test]
fn certify_periodic_corona_route_cross_checks() {
    let (code, json, _) = run(&[
        "certify",
        "--mode",
        "periodic",
        "cycle:4",
        "--satellites",
        "complete:2",
        "--vertex",
        "v:1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["vertex"], "v:1");
    assert_eq!(json["verdict"], "not_periodic");
    assert_eq!(json["report"]["criterion"], "lemma-4.2a");
    assert_eq!(json["direct"]["verdict"], "not_periodic");
}

#[test]
fn certify_pst_on_square() {
    let (code, json, _) = run(&[
        "certify", "--mode", "pst", "cycle:4", "--u", "0", "--v", "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["holds"], true);
    let t0 = json["certificate"]["t0"].as_f64().unwrap();
    assert!((t0 - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn certify_pst_refuses_mismatched_support_forms() {
    let (code, json, _) = run(&["certify", "--mode", "pst", "path:4", "--u", "0", "--v", "3"]);
    assert_eq!(code, 0, "definite negative answers exit 0");
    assert_eq!(json["holds"], false);
    assert_eq!(json["status"], "ok");
}

#[test]
fn certify_pgst_finds_edge_witness() {
    let (code, json, _) = run(&[
        "certify",
        "--mode",
        "pgst",
        "complete:2",
        "--u",
        "0",
        "--v",
        "1",
        "--eps",
        "0.1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["witness"]["criterion"], "theorem-4.8");
    assert_eq!(json["witness"]["l"], 23);
    assert!(json["achieved_fidelity"].as_f64().unwrap() >= 0.9);
}

#[test]
fn certify_pgst_exhaustion_exits_not_found() {
    let (code, json, _) = run(&[
        "certify",
        "--mode",
        "pgst",
        "complete:2",
        "--u",
        "0",
        "--v",
        "1",
        "--eps",
        "0.01",
        "--l-max",
        "1",
    ]);
    assert_eq!(code, 4);
    assert_eq!(json["status"], "not_found");
}

#[test]
fn certify_pgst_requires_transfer_evidence() {
    let (code, json, _) = run(&[
        "certify", "--mode", "pgst", "cycle:5", "--u", "0", "--v", "1",
    ]);
    assert_eq!(code, 2);
    assert_eq!(json["status"], "precondition_failed");
}

#[test]
fn certify_pgst_runs_on_spectral_data() {
    let data = repo_file("data/golay_double_4096.json");
    let (code, json, _) = run(&[
        "certify", "--mode", "pgst", "--data", &data, "--g", "2", "--u", "0", "--v", "1", "--eps",
        "0.5",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["witness"]["criterion"], "theorem-4.8");
    assert_eq!(json["witness"]["l"], 13299);
    assert!(json["achieved_fidelity"].as_f64().unwrap() >= 0.5);
}

#[test]
fn missing_subcommand_is_usage() {
    let (code, json, _) = run(&[]);
    assert_eq!(code, 64);
    assert_eq!(json["status"], "usage");
}

#[test]
fn tolerance_env_overrides_recognition() {
    let (code, json, _) = run_with(
        &["certify", "--mode", "periodic", "path:4", "--vertex", "0"],
        &[("QWALK_TOL", "0.4")],
    );
    assert_eq!(code, 0);
    assert_eq!(
        json["report"]["criterion"], "integer-spectrum",
        "an absurdly loose tolerance rounds the golden ratios to integers"
    );

    let (code, json, _) = run_with(&["spectrum", "cycle:4"], &[("QWALK_TOL", "banana")]);
    assert_eq!(code, 64);
    assert_eq!(json["status"], "usage");
}
