use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use steklov_lab::experiments::{
    ContinuityReport, ConvergenceReport, DivergenceReport, SingularityReport, StabilityReport,
};
use steklov_lab::optimizer::OptimResult;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("steklov-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

fn steklov(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_steklov")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Runs `command` on `config`, returns the written files sorted by name.
fn run_ok(command: &str, config: &Path, out: &Path) -> Vec<PathBuf> {
    let (code, _, err) = steklov(&[command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code, 0, "{command} failed: {err}");
    let mut files: Vec<PathBuf> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

fn with_ext(files: &[PathBuf], ext: &str) -> String {
    let p = files.iter().find(|p| p.extension().is_some_and(|e| e == ext)).expect("output file present");
    fs::read_to_string(p).unwrap()
}

#[test]
fn solve_fixture_matches_the_square_closed_form() {
    let out = scratch("solve");
    let files = run_ok("solve", &fixture("solve"), &out);
    assert_eq!(files.len(), 3);
    let v: serde_json::Value = serde_json::from_str(&with_ext(&files, "json")).unwrap();
    let lam = v["result"]["lambda"][0].as_f64().unwrap();
    let exact = PI / PI.tanh();
    assert!((lam - exact).abs() / exact < 2e-3, "lambda_1 = {lam}");
    assert!(with_ext(&files, "csv").starts_with("vertex,x,y,u1,u2,u3\n"));
    assert!(with_ext(&files, "log").lines().all(|l| l.starts_with('[')));
}

#[test]
fn every_study_fixture_runs_and_reparses() {
    for name in ["converge", "stability", "singularity", "continuity", "optimize"] {
        let out = scratch(name);
        let files = run_ok(name, &fixture(name), &out);
        let json = with_ext(&files, "json");
        let ok = match name {
            "converge" => serde_json::from_str::<ConvergenceReport>(&json).is_ok(),
            "stability" => serde_json::from_str::<StabilityReport>(&json).is_ok(),
            "singularity" => serde_json::from_str::<SingularityReport>(&json).is_ok(),
            "continuity" => serde_json::from_str::<ContinuityReport>(&json).is_ok(),
            _ => serde_json::from_str::<OptimResult>(&json).is_ok(),
        };
        assert!(ok, "{name} report does not re-parse");
        assert!(with_ext(&files, "csv").lines().count() >= 2, "{name} csv is empty");
        let stem = files[0].file_stem().unwrap().to_str().unwrap().to_string();
        assert!(stem.starts_with(name) && stem.len() == name.len() + 17);
    }
}

#[test]
fn diverge_with_default_grid() {
    let out = scratch("diverge");
    let files = run_ok("diverge", &fixture("diverge"), &out);
    let r: DivergenceReport = serde_json::from_str(&with_ext(&files, "json")).unwrap();
    assert_eq!(r.entries.iter().map(|e| e.n).collect::<Vec<_>>(), vec![2, 4, 8, 16]);
    assert_eq!(with_ext(&files, "csv").lines().count(), 5);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let fa = run_ok("optimize", &fixture("optimize"), &a);
    let fb = run_ok("optimize", &fixture("optimize"), &b);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        if x.extension().is_some_and(|e| e != "log") {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
    }
    // a different seed changes the report
    let c = scratch("det-c");
    let (code, _, _) = steklov(&[
        "optimize",
        "--config",
        fixture("optimize").to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
        "--seed",
        "99",
        "--quiet",
    ]);
    assert_eq!(code, 0);
    let fc: Vec<_> = fs::read_dir(&c).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(!fc.contains(&fa[0].file_name().unwrap().to_owned()));
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = scratch("bad");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    fs::write(&cfg, "{\"arcs\": ").unwrap();
    let out = dir.join("out");
    let (code, _, err) = steklov(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 1"), "{err}");
    assert!(!out.exists());

    fs::write(&cfg, r#"{"arcs": {"curve": {"kind": "circle", "params": {"radius": 1}}, "arcs": [[0, 1]]}, "k": 1}"#).unwrap();
    let (code, _, err) = steklov(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("missing field `h`"), "{err}");
    assert!(!out.exists());

    let (code, _, _) = steklov(&["converge", "--config", fixture("solve").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn numerical_failure_exits_1_and_names_the_stage() {
    let dir = scratch("fail");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("many.json");
    // more eigenpairs than Steklov degrees of freedom
    fs::write(&cfg, r#"{"arcs": {"curve": {"kind": "circle", "params": {"radius": 1}}, "arcs": [[0, 1]]}, "h": 0.2, "k": 500}"#).unwrap();
    let out = dir.join("out");
    let (code, _, err) = steklov(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("stage `eigensolve`"), "{err}");
}
