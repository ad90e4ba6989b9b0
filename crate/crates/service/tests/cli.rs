use std::path::{Path, PathBuf};
use std::process::Command;

use dimcf::Projector;
use dimcf_service::cli::{run, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use dimcf_service::Session;
use serde_json::Value;

mod common;
use common::{assert_valid, repo_root};

fn dimcf(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("dimcf").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fit_toy_linear(dir: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    let (code, _, err) = dimcf(&["fit", "--data", "toy", "--method", "linear", "--seed", "3", "--out", path_str(&out)]);
    assert_eq!(code, EXIT_OK, "{err}");
    out
}

#[test]
fn fit_writes_a_reproducible_session() {
    let dir = tempfile::tempdir().unwrap();
    let a = fit_toy_linear(dir.path(), "a.json");
    let b = fit_toy_linear(dir.path(), "b.json");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let session = Session::load(&a).unwrap();
    assert_eq!(session.dataset.n_samples(), 500);
    match &session.projector {
        Projector::Linear(p) => assert_eq!((p.a.rows(), p.a.cols()), (2, 10)),
        other => panic!("unexpected projector {other:?}"),
    }
}

#[test]
fn fit_accepts_params_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let mut text = String::from("a,b,c,label\n");
    for i in 0..30 {
        let f = i as f64;
        text.push_str(&format!("{},{},{},{}\n", f, (f * 0.7).sin(), 30.0 - f, i % 2));
    }
    std::fs::write(&csv, text).unwrap();
    let out = dir.path().join("som.json");
    let (code, stdout, err) = dimcf(&[
        "fit", "--data", path_str(&csv), "--method", "som", "--params", r#"{"height": 2, "width": 3, "epochs": 3}"#,
        "--out", path_str(&out),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("30 samples x 3 features"));
    match Session::load(&out).unwrap().projector {
        Projector::Som(s) => assert_eq!((s.height, s.width), (2, 3)),
        other => panic!("unexpected projector {other:?}"),
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let (code, _, err) = dimcf(&["fit", "--data", "toy", "--method", "umap", "--out", path_str(&out)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("umap"));
    let (code, _, _) = dimcf(&["fit", "--data", "toy", "--method", "linear", "--params", "{", "--out", path_str(&out)]);
    assert_eq!(code, EXIT_USAGE);
    assert_eq!(dimcf(&["frobnicate"]).0, EXIT_USAGE);
    let (code, stdout, _) = dimcf(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("explain"));
}

#[test]
fn missing_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let missing = dir.path().join("none.csv");
    let (code, _, _) = dimcf(&["fit", "--data", path_str(&missing), "--method", "linear", "--out", path_str(&out)]);
    assert_eq!(code, EXIT_DATA);
    let (code, _, _) = dimcf(&["explain", "--session", path_str(&missing), "--sample", "0", "--target", "0,0"]);
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn explain_prints_a_disjoint_explanation_set() {
    let dir = tempfile::tempdir().unwrap();
    let session = fit_toy_linear(dir.path(), "s.json");
    let s = path_str(&session);

    let (code, stdout, err) = dimcf(&["explain", "--session", s, "--sample", "7", "--target-sample", "7", "--k", "1"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let set: Value = serde_json::from_str(&stdout).unwrap();
    let delta = set["members"][0]["delta"].as_array().unwrap();
    assert!(delta.iter().all(|d| d.as_f64().unwrap().abs() <= 1e-9));

    let (code, stdout, err) =
        dimcf(&["explain", "--session", s, "--sample", "7", "--target-sample", "250", "--k", "3", "--c", "100"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let set: Value = serde_json::from_str(&stdout).unwrap();
    let members = set["members"].as_array().unwrap();
    assert_eq!(members.len(), 3);
    let mut seen = std::collections::BTreeSet::new();
    for m in members {
        for j in m["changed_features"].as_array().unwrap() {
            assert!(seen.insert(j.as_u64().unwrap()), "feature {j} reused");
        }
    }

    let (code, _, _) = dimcf(&[
        "explain", "--session", s, "--x", "0,1,-2,0,0,0,0,0,0,0", "--target", "1.5,-0.5", "--blacklist", "0,1",
    ]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn explain_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let session = fit_toy_linear(dir.path(), "s.json");
    let s = path_str(&session);
    let all = "0,1,2,3,4,5,6,7,8,9";
    let (code, _, err) = dimcf(&["explain", "--session", s, "--sample", "0", "--target", "0,0", "--blacklist", all]);
    assert_eq!(code, EXIT_USAGE, "{err}");
    assert_eq!(dimcf(&["explain", "--session", s, "--sample", "900", "--target", "0,0"]).0, EXIT_USAGE);
    assert_eq!(dimcf(&["explain", "--session", s, "--sample", "0", "--target", "0,0,0"]).0, EXIT_USAGE);
    assert_eq!(dimcf(&["explain", "--session", s, "--sample", "0", "--target-cell", "0,1"]).0, EXIT_USAGE);
    assert_eq!(dimcf(&["explain", "--session", s, "--sample", "0"]).0, EXIT_USAGE);
}

#[test]
fn bench_smoke_matches_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = repo_root().join("configs/smoke.json");
    let (code, stdout, err) = dimcf(&["bench", "--config", path_str(&config), "--out-dir", path_str(dir.path())]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("Algo1"));
    for ext in ["txt", "json", "csv"] {
        assert!(dir.path().join(format!("smoke.{ext}")).is_file());
    }
    let json = std::fs::read_to_string(dir.path().join("smoke.json")).unwrap();
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/smoke.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &json).unwrap();
    }
    assert_eq!(json, std::fs::read_to_string(&golden).unwrap(), "rerun with UPDATE_GOLDEN=1 after intended changes");

    let again = tempfile::tempdir().unwrap();
    dimcf(&["bench", "--config", path_str(&config), "--out-dir", path_str(again.path())]);
    for ext in ["txt", "json", "csv"] {
        let name = format!("smoke.{ext}");
        assert_eq!(std::fs::read(dir.path().join(&name)).unwrap(), std::fs::read(again.path().join(&name)).unwrap());
    }
}

#[test]
fn bench_missing_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = dimcf(&["bench", "--config", path_str(&dir.path().join("nope.json"))]);
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn shipped_configs_match_schema_and_parse() {
    let mut n = 0;
    for entry in std::fs::read_dir(repo_root().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let value: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_valid("experiment-config", &value);
        serde_json::from_value::<dimcf::bench::ExperimentConfig>(value)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 7);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dimcf");
    let status = Command::new(bin).arg("--version").output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    let status = Command::new(bin).args(["fit", "--data", "toy"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    let status = Command::new(bin).args(["bench", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_DATA));
}
