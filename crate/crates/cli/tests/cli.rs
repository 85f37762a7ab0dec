use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ztrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ztrace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn zeta_reports_trace_and_critical_line() {
    let out = ztrace(&["zeta", "--curve", "p=5 f=1 a4=1 a6=0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["zeta"]["a"], 2);
    assert_eq!(v["point_count"], 4);
    for z in v["zeta"]["zeros"].as_array().unwrap() {
        assert_eq!(z["re"], 0.5);
    }
}

#[test]
fn verify_passes_on_bump_at_log_q() {
    let out = ztrace(&[
        "verify",
        "--curve",
        "p=5 f=1 a4=1 a6=0",
        "--alpha",
        "bump:c=1.6094,w=0.5",
        "--nu-max",
        "256",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["residual"].as_f64().unwrap() <= v["tail_bound"].as_f64().unwrap() + 1e-8);
}

#[test]
fn zero_amplitude_balances_exactly() {
    let out = ztrace(&["verify", "--curve", "p=7 a4=1 a6=3", "--alpha", "bump:c=1,w=2,a=0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["lhs"], 0.0);
    assert_eq!(v["rhs"], 0.0);
}

#[test]
fn wrong_genus_fails_the_check() {
    let out = ztrace(&["verify", "--curve", "p=5 a4=1 a6=0", "--alpha", "bump:c=0,w=2", "--genus", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(ztrace(&["zeta", "--curve", "p=5 a4=0 a6=0"]).status.code(), Some(2));
    assert_eq!(ztrace(&["zeta"]).status.code(), Some(2));
    assert_eq!(ztrace(&["padic", "lab", "--p", "4"]).status.code(), Some(2));
    assert_eq!(ztrace(&["suite", "0"]).status.code(), Some(2));
    let bad = temp_file("unknown_key.toml", "curv = \"p=5 a4=1 a6=0\"\n");
    assert_eq!(
        ztrace(&["zeta", "--config", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let other = temp_file("other_verb.toml", "command = \"census\"\n");
    assert_eq!(
        ztrace(&["zeta", "--config", other.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let file = temp_file("layered.toml", "curve = \"p=7 a4=1 a6=3\"\nnu_max = 128\nseed = 4\n");
    let out = ztrace(&["verify", "--config", file.to_str().unwrap(), "--nu-max", "512", "--explain"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["nu_max"], 512);
    assert_eq!(v["seed"], 4);
    assert_eq!(v["curve"], "p=7 a4=1 a6=3");
    assert_eq!(v["samples"], 50);
    assert_eq!(v["formula_tol"], 1e-8);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["padic", "lab", "--p", "3", "--n", "2", "--m", "2", "--seed", "11"];
    let a = ztrace(&args);
    let b = ztrace(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = ztrace(&["padic", "lab", "--p", "3", "--n", "2", "--m", "2", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn census_csv_schema() {
    let out = ztrace(&["census", "--curve", "p=5 f=2 a=3", "--max-degree", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,N_d,B_d,length");
    assert!(lines[1].starts_with("1,23,23,"));
    assert_eq!(lines.len(), 4);
}

#[test]
fn plot_is_a_two_column_series() {
    let out = ztrace(&[
        "verify",
        "--curve",
        "p=5 a4=1 a6=0",
        "--alpha",
        "bump:c=1.6,w=0.5",
        "--nu-max",
        "64",
        "--emit-plot",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "nu,partial_sum");
    assert_eq!(lines.len(), 66);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 2));
}

#[test]
fn tate_lab_and_weights() {
    for lattice in ["gaussian", "eisenstein", "companion:a=1,q=5"] {
        let out = ztrace(&["tate", "lab", "--lattice", lattice, "--depth", "3"]);
        assert_eq!(out.status.code(), Some(0), "{lattice}");
    }
    let out = ztrace(&["weights", "--curve", "p=5 a4=1 a6=0", "--k", "2", "--direction", "-"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["weight"], "1/25");
    let out = ztrace(&["weights", "--lattice", "gaussian", "--k", "3", "--direction", "+"]);
    assert_eq!(json(&out)["weight"], "1");
}

#[test]
fn quick_suite_criteria() {
    for c in ["3", "4", "6", "7"] {
        let out = ztrace(&["suite", c]);
        assert_eq!(out.status.code(), Some(0), "criterion {c}");
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn table_format_is_flat() {
    let out = ztrace(&["zeta", "--curve", "p=11 a4=1 a6=1", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("zeta.zeros[0].re")));
}
