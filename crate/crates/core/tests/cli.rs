// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_wand-gibbs");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("WAND_GIBBS_TOL")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_text_lists_three_measures_below_critical() {
    let out = run(&["solve", "--k", "3", "--theta", "0.5"]);
    assert_eq!(code(&out), 0);
    let s = stdout(&out);
    assert!(s.contains("TISGM count: 3"));
    assert_eq!(s.matches("asymmetric").count(), 2);
}

#[test]
fn solve_json_has_schema_keys() {
    let out = run(&["solve", "--k", "2", "--theta", "0.5", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in [
        "k",
        "theta",
        "theta_cr",
        "tisgm_count",
        "laws",
        "classification",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["tisgm_count"], 3);
    assert_eq!(v["laws"].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_parameters_exit_with_usage_code() {
    assert_eq!(code(&run(&["solve", "--k", "1", "--theta", "0.5"])), 2);
    assert_eq!(code(&run(&["solve", "--k", "3", "--theta", "-1"])), 2);
    assert_eq!(code(&run(&["solve", "--k", "3"])), 2);
    let zero_width = run(&[
        "scan",
        "--k",
        "3",
        "--theta-min",
        "1",
        "--theta-max",
        "1",
        "--steps",
        "5",
    ]);
    assert_eq!(code(&zero_width), 2);
    assert_eq!(code(&run(&["verify", "--k", "2", "--depth", "3"])), 2);
}

#[test]
fn tolerance_override_is_validated() {
    let out = Command::new(BIN)
        .args(["solve", "--k", "3", "--theta", "1"])
        .env("WAND_GIBBS_TOL", "nope")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = Command::new(BIN)
        .args(["solve", "--k", "3", "--theta", "1"])
        .env("WAND_GIBBS_TOL", "1e-9")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn scan_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(&[
            "scan",
            "--k",
            "3",
            "--theta-min",
            "0.5",
            "--theta-max",
            "2",
            "--steps",
            "25",
            "--scale",
            "log",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 26);
    assert!(text.starts_with("theta,z_sym,z_asym_1,z_asym_2,tisgm_count"));
}

#[test]
fn scan_json_round_trips() {
    let out = run(&[
        "scan",
        "--k",
        "2",
        "--theta-min",
        "0.5",
        "--theta-max",
        "2",
        "--steps",
        "4",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["k"], 2);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for key in ["theta", "z_sym", "ks_value", "product", "classification"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn thresholds_k3_text() {
    let out = run(&["thresholds", "--k", "3"]);
    assert_eq!(code(&out), 0);
    let s = stdout(&out);
    assert!(s.contains("0.83039") && s.contains("1.22632"), "{s}");
    assert!(!s.contains("exploratory"));
}

#[test]
fn thresholds_without_bracket_is_solver_error() {
    // at k = 4 the symmetric chain never drops below the Kesten-Stigum line
    assert_eq!(
        code(&run(&["thresholds", "--k", "4", "--criterion", "ks"])),
        3
    );
    assert_eq!(
        code(&run(&["thresholds", "--k", "4", "--criterion", "msw"])),
        3
    );
}

#[test]
fn verify_passes_at_default_activities() {
    let out = run(&["verify", "--k", "2"]);
    assert_eq!(code(&out), 0);
    let s = stdout(&out);
    assert!(s.lines().all(|l| l.starts_with("PASS")));
    assert!(s.contains("perturbed"));
}

#[test]
fn plot_renders_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let svg = dir.path().join("plot.svg");
    let out = run(&[
        "scan",
        "--k",
        "3",
        "--theta-min",
        "0.3",
        "--theta-max",
        "3",
        "--steps",
        "40",
        "--scale",
        "log",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        code(&run(&[
            "plot",
            csv.to_str().unwrap(),
            "--out",
            svg.to_str().unwrap()
        ])),
        0
    );
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert!(text.contains("k-s1-sq-minus-1") && text.contains("k-s2-sq-minus-1"));
    assert!(text.contains("threshold"));
}

#[test]
fn plot_rejects_empty_and_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let svg = dir.path().join("x.svg");
    let out = run(&[
        "plot",
        empty.to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    assert!(!Path::new(&svg).exists());
    let missing = dir.path().join("nope.csv");
    assert_eq!(
        code(&run(&[
            "plot",
            missing.to_str().unwrap(),
            "--out",
            svg.to_str().unwrap()
        ])),
        4
    );
}

#[test]
fn help_documents_json_schema() {
    let s = stdout(&run(&["solve", "--help"]));
    assert!(s.contains("\"properties\""), "{s}");
}
