use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn lcd(results: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcd"))
        .args(args)
        .env("LCD_RESULTS_DIR", results)
        .output()
        .expect("spawn lcd")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// CSV text with the wall-clock column removed.
fn without_elapsed(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn ridge_full_quadratic_lcd1_one_step() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ridge");
    let ds = data("regression.libsvm");
    let o = lcd(
        tmp.path(),
        &[
            "run", "--dataset", ds.to_str().unwrap(), "--task", "ridge", "--lambda-frac-of-L", "1e-3",
            "--curvature", "full-quadratic", "--methods", "lcd1", "--out", out.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["runs"][0]["method"], "lcd1");
    assert_eq!(summary["runs"][0]["iterations_to_tol"], 1);
    assert_eq!(summary["f_star_provenance"], "normal equations");
    let side = json(&out.join("lcd1.json"));
    assert_eq!(side["metadata"]["task"], "ridge");
    assert!(side["metadata"]["dataset_hash"].as_str().unwrap().len() == 64);
    assert!(fs::read_to_string(out.join("lcd1.csv")).unwrap().starts_with("k,f_gap,"));
}

#[test]
fn lcd3_divergence_exits_with_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = data("ridge_ill_conditioned.libsvm");
    let out = tmp.path().join("ill");
    let o = lcd(
        tmp.path(),
        &[
            "run", "--dataset", ds.to_str().unwrap(), "--task", "ridge", "--lambda-frac-of-L", "1e-3",
            "--curvature", "full-quadratic", "--methods", "lcd1,lcd3", "--out", out.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("DIVERGED"));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["runs"][1]["status"]["status"], "diverged");
}

#[test]
fn verify_negative_control_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lcd(tmp.path(), &["verify", "--scope", "matrix-core", "--samples", "50", "--negative-control"]);
    assert_eq!(code(&o), 3);
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("[FAIL]")).expect("a failing suite");
    assert!(line.contains("3.600e1"), "{line}");
    assert!(line.contains("(3, 0)"), "{line}");

    let o = lcd(tmp.path(), &["verify", "--scope", "matrix-core", "--samples", "50"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn verify_with_no_samples_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lcd(tmp.path(), &["verify", "--scope", "data-io", "--samples", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("warning"));
}

#[test]
fn sweep_writes_one_trace_per_point_and_method() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let ds = data("logistic.libsvm");
    let o = lcd(
        tmp.path(),
        &[
            "sweep", "--dataset", ds.to_str().unwrap(), "--task", "logistic", "--methods", "polyak,lcd2",
            "--max-iters", "40", "--out", out.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let index = json(&out.join("index.json"));
    let points = index["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    let mut csvs = 0;
    for p in points {
        for r in p["summary"]["runs"].as_array().unwrap() {
            assert!(Path::new(r["csv"].as_str().unwrap()).is_file());
            csvs += 1;
        }
    }
    assert_eq!(csvs, 6);
}

#[test]
fn runs_are_deterministic_apart_from_timing() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = data("logistic.libsvm");
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        let o = lcd(
            tmp.path(),
            &[
                "run", "--dataset", ds.to_str().unwrap(), "--task", "logistic", "--lambda-frac-of-L", "1e-3",
                "--methods", "gd,polyak,lcd1,lcd2,lcd3", "--max-iters", "60", "--x0", "random", "--seed", "5",
                "--out", out.to_str().unwrap(),
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for stem in ["polyak", "lcd1", "lcd2", "lcd3"] {
        let f = format!("{stem}.csv");
        assert_eq!(without_elapsed(&a.join(&f)), without_elapsed(&b.join(&f)), "{stem}");
    }
}

#[test]
fn usage_and_data_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = data("logistic.libsvm");
    let o = lcd(tmp.path(), &["run", "--dataset", ds.to_str().unwrap(), "--task", "svm"]);
    assert_eq!(code(&o), 1);
    let o = lcd(tmp.path(), &["frobnicate"]);
    assert_eq!(code(&o), 1);
    // ridge needs a regularization weight
    let o = lcd(tmp.path(), &["run", "--dataset", ds.to_str().unwrap(), "--task", "ridge"]);
    assert_eq!(code(&o), 1);
    let missing = tmp.path().join("nope.libsvm");
    let o = lcd(tmp.path(), &["run", "--dataset", missing.to_str().unwrap(), "--task", "logistic"]);
    assert_eq!(code(&o), 2);
    let bad = data("parser/malformed/zero_index.libsvm");
    let o = lcd(tmp.path(), &["run", "--dataset", bad.to_str().unwrap(), "--task", "logistic"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = lcd(tmp.path(), &["--help"]);
    assert_eq!(code(&o), 0);
}
