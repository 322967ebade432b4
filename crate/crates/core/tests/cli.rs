//! End-to-end tests of the command-line interface: exit codes, report
//! contents, replay, and byte-level reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Output;

use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_ando-lab"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Nilpotent Jordan block of size 3 paired with itself.
fn jordan3_pair() -> Value {
    let m = json!([
        [[0, 0], [0, 0], [0, 0]],
        [[1, 0], [0, 0], [0, 0]],
        [[0, 0], [1, 0], [0, 0]],
    ]);
    json!({"dim": 3, "T1": [m], "T2": [m]})
}

/// p(z, w) = z + z^3 w; the second term dies on the order-3 model.
fn jordan3_poly() -> Value {
    json!({"kind": "bivariate", "terms": [
        {"zdeg": 1, "wdeg": 0, "coeff": [1, 0]},
        {"zdeg": 3, "wdeg": 1, "coeff": [1, 0]},
    ]})
}

#[test]
fn bound_on_nilpotent_fixture_sharpens_the_classical_bound() {
    let dir = tmp("bound_nilpotent");
    let pair = write_json(&dir, "pair.json", &jordan3_pair());
    let poly = write_json(&dir, "poly.json", &jordan3_poly());
    let out_path = dir.join("report.json");
    let out = run(&[
        "bound", &pair, &poly,
        "--grid", "512", "--extensions", "2", "--seed", "1",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report = read_json(&out_path);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["command"], "bound");
    let bounds = &report["report"]["bounds"];
    let am3 = bounds["am3_order12"].as_f64().unwrap();
    assert!((am3 - 1.0).abs() <= 1e-8, "am3 = {am3}");
    let lo = bounds["torus_lo"].as_f64().unwrap();
    assert!((lo - 2.0).abs() <= 1e-3, "torus_lo = {lo}");
    for v in bounds["verdicts"].as_array().unwrap() {
        assert_eq!(v["pass"], true, "verdict failed: {v}");
    }
}

#[test]
fn bound_on_zero_pair_reports_zero_bounds() {
    let dir = tmp("bound_zero");
    let zero = json!([[[0, 0]]]);
    let pair = write_json(&dir, "pair.json", &json!({"dim": 1, "T1": [zero], "T2": [zero]}));
    let poly = write_json(
        &dir,
        "poly.json",
        &json!({"kind": "bivariate", "terms": [{"zdeg": 1, "wdeg": 1, "coeff": [1, 0]}]}),
    );
    let out_path = dir.join("report.json");
    let out = run(&["bound", &pair, &poly, "--grid", "64", "--extensions", "1",
        "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let bounds = read_json(&out_path)["report"]["bounds"].clone();
    assert_eq!(bounds["direct_norm"].as_f64().unwrap(), 0.0);
    assert!(bounds["am3_order12"].as_f64().unwrap() <= 1e-12);
    assert!(bounds["am3_order21"].as_f64().unwrap() <= 1e-12);
    assert!(bounds["general_composite"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn noncommuting_pair_exits_2_with_location() {
    let dir = tmp("bound_noncommuting");
    let up = json!([[[0, 0], [0.5, 0]], [[0, 0], [0, 0]]]);
    let down = json!([[[0, 0], [0, 0]], [[0.5, 0], [0, 0]]]);
    let pair = write_json(&dir, "pair.json", &json!({"dim": 2, "T1": [up], "T2": [down]}));
    let poly = write_json(
        &dir,
        "poly.json",
        &json!({"kind": "bivariate", "terms": [{"zdeg": 1, "wdeg": 0, "coeff": [1, 0]}]}),
    );
    let out = run(&["bound", &pair, &poly]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("$.T1, $.T2"), "stderr: {err}");
}

#[test]
fn invalid_json_exits_2() {
    let dir = tmp("bound_invalid_json");
    let path = dir.join("pair.json");
    fs::write(&path, "{ not json").unwrap();
    let poly = write_json(
        &dir,
        "poly.json",
        &json!({"kind": "bivariate", "terms": [{"zdeg": 0, "wdeg": 0, "coeff": [1, 0]}]}),
    );
    let out = run(&["bound", path.to_str().unwrap(), &poly]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("invalid JSON"), "stderr: {}", stderr(&out));
}

#[test]
fn free_polynomial_is_rejected_by_bound() {
    let dir = tmp("bound_free_poly");
    let pair = write_json(&dir, "pair.json", &jordan3_pair());
    let poly = write_json(
        &dir,
        "poly.json",
        &json!({"kind": "free", "n1": 1, "n2": 1,
                "terms": [{"x": [1], "y": [1], "coeff": [1, 0]}]}),
    );
    let out = run(&["bound", &pair, &poly]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bivariate"), "stderr: {}", stderr(&out));
}

#[test]
fn verify_certified_fixture_exits_0() {
    let dir = tmp("verify_ok");
    let pair = write_json(&dir, "pair.json", &jordan3_pair());
    let poly = write_json(&dir, "poly.json", &jordan3_poly());
    let out = run(&["verify", &pair, &poly, "--grid", "256", "--extensions", "1"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
}

#[test]
fn verify_replay_detects_a_corrupted_bound() {
    let dir = tmp("verify_replay");
    let pair = write_json(&dir, "pair.json", &jordan3_pair());
    let poly = write_json(&dir, "poly.json", &jordan3_poly());
    let report_path = dir.join("report.json");
    let out = run(&["verify", &pair, &poly, "--grid", "256", "--extensions", "2",
        "--seed", "7", "--out", report_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    // An untouched report replays cleanly.
    let replay = run(&["verify", &pair, &poly, "--replay", report_path.to_str().unwrap()]);
    assert_eq!(code(&replay), 0, "stderr: {}", stderr(&replay));

    // A corrupted bound value must be caught.
    let mut report = read_json(&report_path);
    let old = report["report"]["bounds"]["am3_order12"].as_f64().unwrap();
    report["report"]["bounds"]["am3_order12"] = json!(old + 0.5);
    fs::write(&report_path, serde_json::to_string_pretty(&report).unwrap()).unwrap();
    let corrupted = run(&["verify", &pair, &poly, "--replay", report_path.to_str().unwrap()]);
    assert_eq!(code(&corrupted), 1);
    assert!(stderr(&corrupted).contains("replay mismatch"), "stderr: {}", stderr(&corrupted));
}

#[test]
fn equal_flags_give_byte_identical_reports_apart_from_timestamp() {
    let dir = tmp("byte_identical");
    let pair = write_json(&dir, "pair.json", &jordan3_pair());
    let poly = write_json(&dir, "poly.json", &jordan3_poly());
    let p1 = dir.join("r1.json");
    let p2 = dir.join("r2.json");
    for p in [&p1, &p2] {
        let out = run(&["bound", &pair, &poly, "--grid", "256", "--extensions", "3",
            "--seed", "42", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let strip = |p: &Path| -> String {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.contains("timestamp_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&p1), strip(&p2));
}

#[test]
fn dilate_emits_certified_colligation() {
    let dir = tmp("dilate_nilpotent");
    let m = json!([[[0, 0], [0, 0]], [[1, 0], [0, 0]]]);
    let pair = write_json(&dir, "pair.json", &json!({"dim": 2, "T1": [m], "T2": [m]}));
    let out_path = dir.join("report.json");
    let out = run(&["dilate", &pair, "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report = read_json(&out_path);
    assert_eq!(report["command"], "dilate");
    let certs = &report["report"]["certificates"];
    assert!(certs["kernel_isometry"].as_f64().unwrap() <= 1e-9);
    assert!(certs["intertwine_t1"].as_f64().unwrap() <= 1e-9);
    assert!(certs["commutation"].as_f64().unwrap() <= 1e-10);
    assert!(certs["transfer_norm"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert_eq!(report["report"]["extension"], "canonical");
    assert_eq!(report["report"]["model"]["dim"], 2);
}

#[test]
fn decompose_splits_mixed_diagonal_into_two_blocks() {
    let dir = tmp("decompose_mixed");
    let t1 = json!([[[1, 0], [0, 0]], [[0, 0], [0.5, 0]]]);
    let t2 = json!([[[0.3333333333333333, 0], [0, 0]], [[0, 0], [0, 0.5]]]);
    let pair = write_json(&dir, "pair.json", &json!({"dim": 2, "T1": [t1], "T2": [t2]}));
    let out_path = dir.join("report.json");
    let out = run(&["decompose", &pair, "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let blocks = read_json(&out_path)["report"]["blocks"].as_array().unwrap().clone();
    assert_eq!(blocks.len(), 4);
    let dims: Vec<u64> = blocks.iter().map(|b| b["dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![0, 1, 0, 1]);
    assert_eq!(blocks[1]["class1"], "unitary");
    assert_eq!(blocks[1]["class2"], "cnu");
    assert_eq!(blocks[3]["class1"], "cnu");
}

#[test]
fn lift_reports_the_symbol_for_a_polynomial_intertwiner() {
    let dir = tmp("lift_poly");
    // T strictly contractive, A = 0.3 T + 0.1 I commutes with it.
    let t = json!([[[0.5, 0], [0.3, 0]], [[0, 0], [0.2, 0]]]);
    let a = json!([[[0.25, 0], [0.09, 0]], [[0, 0], [0.16, 0]]]);
    let triple = write_json(&dir, "triple.json", &json!({"T": t, "Tp": t, "A": a}));
    let out_path = dir.join("report.json");
    let out = run(&["lift", &triple, "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report = read_json(&out_path)["report"].clone();
    let grid = report["grid_norm"].as_f64().unwrap();
    let certified = report["certified_norm"].as_f64().unwrap();
    assert!(grid <= certified + 1e-12, "grid {grid} certified {certified}");
    assert!(report["interpolation_residual"].as_f64().unwrap() <= 1e-8);
    assert!(!report["taylor_coefficients"].as_array().unwrap().is_empty());
}

#[test]
fn lift_rejects_a_noncommuting_operator_with_exit_3() {
    let dir = tmp("lift_bad");
    let t = json!([[[0.5, 0], [0.3, 0]], [[0, 0], [0.2, 0]]]);
    let a = json!([[[0, 0], [0, 0]], [[1, 0], [0, 0]]]);
    let triple = write_json(&dir, "triple.json", &json!({"T": t, "Tp": t, "A": a}));
    let out = run(&["lift", &triple]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
}

#[test]
fn fock_verify_on_zero_tuples_has_exact_residuals() {
    let dir = tmp("fock_zero");
    let zero = json!([[[0, 0], [0, 0]], [[0, 0], [0, 0]]]);
    let pair = write_json(&dir, "pair.json", &json!({"dim": 2, "T1": [zero], "T2": [zero]}));
    let out_path = dir.join("report.json");
    let out = run(&["fock-verify", &pair, "--max-len", "4",
        "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let res = read_json(&out_path)["report"]["residuals"].clone();
    for key in ["relation_t2", "relation_t1", "relation_t1_prime"] {
        for v in res[key].as_array().unwrap() {
            assert_eq!(v.as_f64().unwrap(), 0.0, "{key} not exact: {v}");
        }
    }
    assert_eq!(res["series_residual"].as_f64().unwrap(), 0.0);
    assert_eq!(res["within_bounds"], true);
}
