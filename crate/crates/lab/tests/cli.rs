use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use xcf_lab::output::read_trajectory_csv;

fn xcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xcf")).args(args).output().expect("run xcf")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report JSON")
}

fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn round_su2_final_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = xcf(&[
        "simulate",
        "--geometry",
        "su2",
        "--sign",
        "plus",
        "--init",
        "1,1,1",
        "--t-end",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = read_trajectory_csv(&dir.path().join("trajectory.csv")).unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last[0], 2.0);
    for a in &last[1..4] {
        assert!((a - 3.0).abs() < 1e-8, "{a}");
    }
    // round sphere: k_i = 1/A, h_i = 1/A
    assert!((last[4] - 1.0 / 3.0).abs() < 1e-8 && (last[7] - 1.0 / 3.0).abs() < 1e-8);
    assert_eq!(report(dir.path())["termination"], "time_reached");
}

#[test]
fn heisenberg_auto_reports_singular_time() {
    let r = json_stdout(&xcf(&[
        "simulate",
        "--geometry",
        "heisenberg",
        "--sign",
        "plus",
        "--init",
        "1,1,1",
        "--t-end",
        "auto",
    ]));
    assert_eq!(r["termination"], "blow_up");
    let t_hat = r["blowup"]["t_hat"].as_f64().unwrap();
    assert!((t_hat - 0.035714).abs() < 1e-6, "{t_hat}");
    assert_eq!(r["subriemannian"]["degenerate"], "A");
    assert!(r["t_end"].is_null());
}

#[test]
fn blowup_subcommand_fails_without_blowup() {
    let ok = json_stdout(&xcf(&["blowup", "--geometry", "su2", "--init", "2,1,1"]));
    assert_eq!(ok["power_law"].as_array().unwrap().len(), 3);
    let out = xcf(&["blowup", "--geometry", "e2", "--init", "1,1,1", "--max-steps", "500"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "failed");
}

#[test]
fn classify_immediate_q1() {
    let r = json_stdout(&xcf(&["classify", "--geometry", "sl2r", "--init", "1,1,0.5"]));
    assert_eq!(r["regime"], "Q1");
    assert_eq!(r["trigger_time"], 0.0);
    assert_eq!(r["trigger"], "A>=B-C");
}

#[test]
fn classify_rejects_other_geometries() {
    let out = xcf(&["classify", "--geometry", "su2", "--init", "1,1,0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "config");
}

#[test]
fn separatrix_report() {
    let r = json_stdout(&xcf(&["separatrix", "--b", "1", "--c", "0.5", "--bracket", "0.078,0.5", "--tol", "1e-6"]));
    let a = r["a_star"].as_f64().unwrap();
    assert!(a > 0.0774 && a < 0.5);
    assert_eq!(r["below"], "Q2");
    assert_eq!(r["above"], "Q1");
    assert_eq!(r["spot_checks"].as_array().unwrap().len(), 4);
    assert_eq!(r["monotonicity_assumed"], true);
}

#[test]
fn verify_only_heisenberg() {
    let out = xcf(&["verify", "--only", "heisenberg"]);
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = table.lines().filter(|l| l.contains(" pass ") || l.contains(" FAIL ")).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|l| l.split_whitespace().nth(1) == Some("heisenberg")), "{table}");
}

#[test]
fn verify_lists_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let out = xcf(&["verify", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let r: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(r["checks"].as_array().unwrap().len() >= 12);
}

#[test]
fn sign_flip_fault_fails_verification() {
    let out = xcf(&["verify", "--inject-fault", "sign-flip"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn bad_input_gives_error_json() {
    let cases: [&[&str]; 5] = [
        &["simulate", "--geometry", "su3", "--init", "1,1,1"],
        &["simulate", "--geometry", "su2", "--init", "1,-1,1"],
        &["simulate", "--geometry", "su2", "--init", "1,1"],
        &["simulate", "--geometry", "su2", "--init", "1,1,1", "--t-end", "never"],
        &["simulate", "--no-such-flag"],
    ];
    for args in cases {
        let out = xcf(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let e = error_json(&out);
        assert!(e["error"]["message"].is_string(), "{args:?}");
    }
    let out = xcf(&["verify", "--only", "nonsense"]);
    assert_eq!(error_json(&out)["error"]["kind"], "config");
}

#[test]
fn config_file_merges_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"geometry": "su2", "init": [1, 1, 1], "t_end": 5, "rel_tol": 1e-9}"#).unwrap();
    let r = json_stdout(&xcf(&["simulate", "--config", cfg.to_str().unwrap(), "--t-end", "2"]));
    assert_eq!(r["final"]["t"], 2.0);
    assert_eq!(r["controls"]["rel_tol"], 1e-9);

    fs::write(&cfg, r#"{"geometry": "su2", "initial": [1, 1, 1]}"#).unwrap();
    let out = xcf(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "json");
}

#[test]
fn outputs_are_byte_reproducible_and_round_trip() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&d1, &d2] {
        let out = xcf(&[
            "simulate",
            "--geometry",
            "sl2r",
            "--init",
            "0.3,1,0.5",
            "--t-end",
            "auto",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["trajectory.csv", "report.json"] {
        assert_eq!(fs::read(d1.path().join(f)).unwrap(), fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
    let text = fs::read_to_string(d1.path().join("report.json")).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(again, parsed);
    // the typed report re-serializes to the same bytes
    let typed: xcf_lab::analysis::SimulateReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&typed).unwrap() + "\n", text);
    assert!(typed.regime.is_some());

    let csv = fs::read_to_string(d1.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,A,B,C,k1,k2,k3,h1,h2,h3\n") && csv.ends_with('\n') && !csv.contains('\r'));
}

#[test]
fn sweep_orders_by_grid_index() {
    let (d1, d4) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (d, jobs) in [(&d1, "1"), (&d4, "4")] {
        let out = xcf(&[
            "sweep",
            "--geometry",
            "sl2r",
            "--init",
            "1,1,0.5",
            "--grid",
            "A=0.05,0.5,1;C=0.2:0.8:3",
            "--jobs",
            jobs,
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let s1 = fs::read(d1.path().join("summary.json")).unwrap();
    assert_eq!(s1, fs::read(d4.path().join("summary.json")).unwrap());
    let summary: Value = serde_json::from_slice(&s1).unwrap();
    let points = summary["points"].as_array().unwrap();
    assert_eq!(points.len(), 9);
    for (i, p) in points.iter().enumerate() {
        assert_eq!(p["index"], i);
        assert!(d1.path().join(p["dir"].as_str().unwrap()).join("trajectory.csv").exists());
    }
    assert_eq!(points[1]["init"], serde_json::json!([0.05, 1.0, 0.5]));

    let out = xcf(&["sweep", "--geometry", "su2", "--init", "1,1,1"]);
    assert_eq!(out.status.code(), Some(2));
}
