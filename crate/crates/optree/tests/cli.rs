//! End-to-end checks of the `optree` binary: the documented workflow, file
//! formats, determinism, and failure exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn optree(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optree"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_fit_estimate_band_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = optree(
        &[
            "simulate", "--truth", "triangular", "--n", "3000", "--seed", "7", "--out",
            "samples.txt", "--truth-out", "truth.csv",
        ],
        d,
    );
    assert_ok(&out, "simulate");
    let samples = fs::read_to_string(d.join("samples.txt")).unwrap();
    assert_eq!(samples.lines().count(), 3000);
    for line in samples.lines().take(50) {
        let x: f64 = line.parse().unwrap();
        assert!((0.0..1.0).contains(&x));
    }

    let out = optree(
        &[
            "fit", "--input", "samples.txt", "--gamma-split", "1.1", "--beta-a", "1.0",
            "--flat-init", "auto", "--out", "model.json",
        ],
        d,
    );
    assert_ok(&out, "fit");
    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["n"], 3000);
    assert!(model["post_split"].is_array());
    assert!(model["counts"].is_array());

    let out = optree(
        &[
            "estimate", "--model", "model.json", "--out", "median.csv", "--tree-out",
            "tree.json", "--cdf-out", "median_cdf.csv",
        ],
        d,
    );
    assert_ok(&out, "estimate");
    let median = fs::read_to_string(d.join("median.csv")).unwrap();
    assert!(median.starts_with("left,right,height\n"));
    let tree: Vec<[usize; 2]> =
        serde_json::from_str(&fs::read_to_string(d.join("tree.json")).unwrap()).unwrap();
    assert_eq!(tree[0], [0, 0]);

    let out = optree(
        &[
            "band", "--model", "model.json", "--kind", "simple", "--level", "0.05", "--out",
            "band.csv",
        ],
        d,
    );
    assert_ok(&out, "band simple");
    let band = fs::read_to_string(d.join("band.csv")).unwrap();
    assert!(band.starts_with("left,right,center_height,lower,upper\n"));

    let out = optree(
        &[
            "band", "--model", "model.json", "--kind", "multiscale", "--level", "0.05",
            "--draws", "500", "--vn-exponent", "0.501", "--w-delta", "0.5", "--seed", "3",
            "--out", "band_ms.csv",
        ],
        d,
    );
    assert_ok(&out, "band multiscale");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("band_ms.json")).unwrap()).unwrap();
    assert!(meta["scaled_radius"].as_f64().unwrap() > 0.0);
    assert!(meta["level_max_coefficients"].is_array());

    let out = optree(
        &[
            "cdf-band", "--model", "model.json", "--level", "0.05", "--draws", "500",
            "--seed", "3", "--out", "cdf_band.csv",
        ],
        d,
    );
    assert_ok(&out, "cdf-band");
    let cdf = fs::read_to_string(d.join("cdf_band.csv")).unwrap();
    assert!(cdf.starts_with("t,center,lower,upper\n"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["a", "b"] {
        let out = optree(
            &[
                "pipeline", "--truth", "sine", "--n", "2000", "--seed", "11", "--draws",
                "300", "--out-dir", name,
            ],
            d,
        );
        assert_ok(&out, "pipeline");
    }
    let mut names: Vec<_> = fs::read_dir(d.join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        let a = fs::read(d.join("a").join(&name)).unwrap();
        let b = fs::read(d.join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs across identical runs");
    }
}

#[test]
fn reproduce_table1_small() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = optree(
        &[
            "reproduce", "table1", "--n", "2000", "--draws", "400", "--seed", "5",
            "--gammas", "0.1,0.2", "--out", "table1.json",
        ],
        d,
    );
    assert_ok(&out, "reproduce table1");
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("table1.json")).unwrap()).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 1);
    let rows = reports[0]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let sup = row["sup_band"].as_f64().unwrap();
        let ball = row["multiscale_ball"].as_f64().unwrap();
        let product = row["independence_product"].as_f64().unwrap();
        assert_eq!(product, sup * ball);
    }
}

#[test]
fn rate_study_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = optree(
        &[
            "rate-study", "--truth", "sine", "--ns", "512,1024", "--reps", "3", "--seed",
            "2", "--out", "rates.csv",
        ],
        d,
    );
    assert_ok(&out, "rate-study");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("slope"), "stdout: {stdout}");
    let rates = fs::read_to_string(d.join("rates.csv")).unwrap();
    assert!(rates.starts_with("n,median_sup_error,median_depth\n"));
    assert_eq!(rates.lines().count(), 3);
}

#[test]
fn bad_input_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    fs::write(d.join("bad.txt"), "0.5\n1.5\n").unwrap();
    let out = optree(
        &["fit", "--input", "bad.txt", "--out", "model.json"],
        d,
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("outside [0,1)"), "stderr: {stderr}");

    fs::write(d.join("garbled.txt"), "0.5\nnope\n").unwrap();
    let out = optree(
        &["fit", "--input", "garbled.txt", "--out", "model.json"],
        d,
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cannot parse"), "stderr: {stderr}");

    let out = optree(&["estimate", "--model", "missing.json", "--out", "x.csv"], d);
    assert!(!out.status.success());
}
