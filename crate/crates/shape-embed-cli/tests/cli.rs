//! End-to-end tests that drive the compiled binary the way scripts do:
//! files in, files or stdout out, exit codes as the only status channel.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use shape_embed::{read_matrix_csv, silhouette, trustworthiness};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shape-embed"))
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// 90 points, 3 well-separated clusters, 8 dimensions.
fn make_benchmark(dir: &TempDir) -> (PathBuf, PathBuf) {
    let data = dir.path().join("data.csv");
    let labels = dir.path().join("labels.csv");
    let out = bin()
        .args([
            "make-synthetic",
            "--clusters",
            "3",
            "--points",
            "90",
            "--dims",
            "8",
            "--out",
        ])
        .arg(&data)
        .arg("--labels-out")
        .arg(&labels)
        .output()
        .unwrap();
    assert!(out.status.success(), "make-synthetic failed: {}", stderr_of(&out));
    (data, labels)
}

const ANNEALED_CONFIG: &str = r#"{
  "optimizer": {
    "epochs": 60,
    "attraction": {"kind": {"umap_attr": {"a": 1.0, "b": 1.0}}},
    "repulsion": {"kind": {"umap_rep": {"a": 1.0, "b": 1.0}}},
    "schedule_a": {"kind": "linear_anneal", "lambda0": 1.0},
    "schedule_r": {"kind": "linear_anneal", "lambda0": 1.0}
  },
  "graph": {"k": 10}
}"#;

const CONSTANT_RANDOM_INIT_CONFIG: &str = r#"{
  "optimizer": {
    "epochs": 40,
    "attraction": {"kind": {"umap_attr": {"a": 1.0, "b": 1.0}}},
    "repulsion": {"kind": {"umap_rep": {"a": 1.0, "b": 1.0}}},
    "schedule_a": {"kind": "constant", "lambda0": 1.0},
    "schedule_r": {"kind": "constant", "lambda0": 1.0}
  },
  "graph": {"k": 10},
  "init": {"kind": "random", "scale": 10.0}
}"#;

#[test]
fn make_synthetic_then_embed_roundtrip() {
    let dir = TempDir::new().unwrap();
    let (data, _) = make_benchmark(&dir);
    let config = write(&dir, "config.json", ANNEALED_CONFIG);
    let emb_path = dir.path().join("emb.csv");

    let out = bin()
        .args(["embed", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&emb_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "embed failed: {}", stderr_of(&out));

    let emb = read_matrix_csv(&emb_path).unwrap();
    assert_eq!(emb.dim(), (90, 2));
    assert!(emb.iter().all(|v| v.is_finite()));

    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("emb.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "embed");
    assert_eq!(manifest["seeds"], serde_json::json!([0]));
    assert!(manifest["config_hash"].is_string());
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = TempDir::new().unwrap();
    let (data, _) = make_benchmark(&dir);
    let config = write(
        &dir,
        "config.json",
        &ANNEALED_CONFIG.replace("\"epochs\": 60,", "\"sede\": 1, \"epochs\": 60,"),
    );

    let out = bin()
        .args(["embed", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("emb.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("sede"),
        "stderr should name the bad key: {}",
        stderr_of(&out)
    );
}

#[test]
fn malformed_csv_exits_3() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "data.csv", "1.0,2.0\n3.0,4.0\n5.0,oops\n");
    let config = write(&dir, "config.json", ANNEALED_CONFIG);

    let out = bin()
        .args(["embed", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("emb.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stderr_of(&out).contains(":3"),
        "stderr should carry the 1-based line: {}",
        stderr_of(&out)
    );
}

#[test]
fn numeric_blowup_exits_4() {
    let dir = TempDir::new().unwrap();
    // axis-aligned rectangle: the projected pairs share coordinates
    // exactly, so an overflowing attraction coefficient meets a zero
    // difference and the update goes NaN on the first epoch
    let data = write(&dir, "data.csv", "0.0,0.0\n10.0,0.0\n0.0,7.0\n10.0,7.0\n");
    let config = write(
        &dir,
        "config.json",
        r#"{
          "optimizer": {
            "epochs": 1,
            "attraction": {"kind": "sne_attr", "modifiers": [{"scale": {"c": 1e308}}, {"scale": {"c": 1e308}}]},
            "repulsion": {"kind": "sne_rep"},
            "schedule_a": {"kind": "constant", "lambda0": 1.0},
            "schedule_r": {"kind": "constant", "lambda0": 1.0}
          },
          "graph": {"k": 1}
        }"#,
    );

    let out = bin()
        .args(["embed", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("emb.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(
        stderr_of(&out).contains("epoch 0"),
        "stderr should locate the failure: {}",
        stderr_of(&out)
    );
}

#[test]
fn reruns_are_idempotent() {
    let dir = TempDir::new().unwrap();
    let (data, _) = make_benchmark(&dir);
    let config = write(&dir, "config.json", ANNEALED_CONFIG);
    let emb_path = dir.path().join("emb.csv");
    let manifest_path = dir.path().join("emb.csv.manifest.json");

    let run = || {
        let out = bin()
            .args(["embed", "--data"])
            .arg(&data)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&emb_path)
            .output()
            .unwrap();
        assert!(out.status.success());
        let coords = fs::read(&emb_path).unwrap();
        let mut manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
        manifest["wall_time_ms"] = serde_json::json!(0);
        (coords, manifest)
    };
    let first = run();
    let second = run();
    assert_eq!(first.0, second.0, "coordinates must be byte-identical");
    assert_eq!(first.1, second.1, "manifests must agree apart from wall time");
}

#[test]
fn stdout_mode_writes_no_files() {
    let dir = TempDir::new().unwrap();
    let (data, _) = make_benchmark(&dir);
    let config = write(&dir, "config.json", ANNEALED_CONFIG);
    let files_before = fs::read_dir(dir.path()).unwrap().count();

    let out = bin()
        .args(["embed", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success());
    let body = stdout_of(&out);
    assert_eq!(body.lines().count(), 90);
    assert!(body.lines().all(|l| l.split(',').count() == 2));
    assert_eq!(
        fs::read_dir(dir.path()).unwrap().count(),
        files_before,
        "stdout mode must not create files"
    );
}

#[test]
fn shapes_curve_changes_sign_at_three() {
    let out = bin()
        .args([
            "shapes",
            "--spec",
            r#"{"kind":{"local_map_ar":{"k":10.0,"c":10.0}}}"#,
            "--zmin",
            "0",
            "--zmax",
            "6",
            "--points",
            "601",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let body = stdout_of(&out);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("zeta,f,clamped"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let zeta: f64 = cells[0].parse().unwrap();
        let f: f64 = cells[1].parse().unwrap();
        if zeta < 3.0 {
            assert!(f < 0.0, "expected attraction at zeta = {zeta}, got {f}");
        } else if zeta > 3.0 {
            assert!(f > 0.0, "expected repulsion at zeta = {zeta}, got {f}");
        } else {
            assert_eq!(f, 0.0, "expected the exact flip at zeta = 3, got {f}");
        }
    }
}

#[test]
fn fit_ab_prints_default_pair() {
    let out = bin().args(["fit-ab", "0.1", "1.0"]).output().unwrap();
    assert!(out.status.success());
    let body = stdout_of(&out);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("a,b"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((row[0] - 1.58).abs() / 1.58 < 0.02, "a = {}", row[0]);
    assert!((row[1] - 0.89).abs() / 0.89 < 0.02, "b = {}", row[1]);
}

#[test]
fn oracle_rows_all_pass() {
    let out = bin().args(["oracle"]).output().unwrap();
    assert!(out.status.success(), "oracle failed: {}", stderr_of(&out));
    let body = stdout_of(&out);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("check,status,detail"));
    let mut rows = 0;
    for line in lines {
        let status = line.split(',').nth(1).unwrap();
        assert!(
            status == "pass" || status == "info",
            "unexpected row: {line}"
        );
        rows += 1;
    }
    assert!(rows >= 10, "only {rows} oracle rows");
}

#[test]
fn single_cell_sweep_matches_embed_plus_metrics() {
    let dir = TempDir::new().unwrap();
    let (data, labels) = make_benchmark(&dir);
    let config = write(&dir, "config.json", CONSTANT_RANDOM_INIT_CONFIG);
    let emb_path = dir.path().join("emb.csv");

    // same init and seed on both paths; rates set by flag on one side
    // and by the grid on the other
    let out = bin()
        .args(["embed", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&config)
        .args(["--lambda-a", "0.3", "--lambda-r", "0.6", "--out"])
        .arg(&emb_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "embed failed: {}", stderr_of(&out));

    let out = bin()
        .args(["sweep", "--data"])
        .arg(&data)
        .arg("--labels")
        .arg(&labels)
        .arg("--config")
        .arg(&config)
        .args(["--lambda-a", "0.3", "--lambda-r", "0.6"])
        .output()
        .unwrap();
    assert!(out.status.success(), "sweep failed: {}", stderr_of(&out));
    let body = stdout_of(&out);
    let rows: Vec<&str> = body.lines().collect();
    assert_eq!(rows.len(), 2);
    let cells: Vec<f64> = rows[1].split(',').map(|c| c.parse().unwrap()).collect();

    let x = read_matrix_csv(&data).unwrap();
    let y = read_matrix_csv(&emb_path).unwrap();
    let label_values = shape_embed::read_labels_csv(&labels).unwrap();
    let trust = trustworthiness(&x, &y, 5, None, 0).unwrap();
    let sil = silhouette(&y, &label_values).unwrap();
    assert_eq!(cells[0], 0.3);
    assert_eq!(cells[1], 0.6);
    assert_eq!(cells[2], trust, "trustworthiness drifted between paths");
    assert_eq!(cells[3], sil, "silhouette drifted between paths");
}

#[test]
fn sweep_grid_emits_every_cell() {
    let dir = TempDir::new().unwrap();
    let (data, labels) = make_benchmark(&dir);
    let config = write(&dir, "config.json", CONSTANT_RANDOM_INIT_CONFIG);

    let out = bin()
        .args(["sweep", "--data"])
        .arg(&data)
        .arg("--labels")
        .arg(&labels)
        .arg("--config")
        .arg(&config)
        .args(["--lambda-a", "0.1,1.0", "--lambda-r", "0.5,1.0", "--epochs", "20"])
        .output()
        .unwrap();
    assert!(out.status.success(), "sweep failed: {}", stderr_of(&out));
    let body = stdout_of(&out);
    let rows: Vec<&str> = body.lines().collect();
    assert_eq!(rows[0], "lambda_a,lambda_r,trustworthiness,silhouette");
    assert_eq!(rows.len(), 5);
    let firsts: Vec<&str> = rows[1..]
        .iter()
        .map(|r| r.split_once(',').unwrap().0)
        .collect();
    assert_eq!(firsts, ["0.1", "0.1", "1", "1"], "rows must come out grid-ordered");
}

#[test]
fn consistency_writes_aligned_runs() {
    let dir = TempDir::new().unwrap();
    let (data, _) = make_benchmark(&dir);
    let config = write(&dir, "config.json", ANNEALED_CONFIG);

    let run_into = |name: &str, runs: &str| {
        let out_dir = dir.path().join(name);
        let out = bin()
            .args(["consistency", "--data"])
            .arg(&data)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out_dir)
            .args(["--runs", runs, "--epochs", "30"])
            .output()
            .unwrap();
        assert!(out.status.success(), "consistency failed: {}", stderr_of(&out));
        out_dir
    };

    let a = run_into("a", "2");
    for name in ["reference.csv", "run_00.csv", "run_01.csv", "matrix.csv", "manifest.json"] {
        assert!(a.join(name).exists(), "missing {name}");
    }
    let matrix = fs::read_to_string(a.join("matrix.csv")).unwrap();
    let lines: Vec<&str> = matrix.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("# "), "missing summary row: {matrix}");

    // same seeds, fresh directory: the alignment table reproduces exactly
    let b = run_into("b", "2");
    assert_eq!(
        fs::read(a.join("matrix.csv")).unwrap(),
        fs::read(b.join("matrix.csv")).unwrap()
    );

    // a single run still yields a 1x1 table; no pairs means a 0,0 summary
    let single = run_into("single", "1");
    let matrix = fs::read_to_string(single.join("matrix.csv")).unwrap();
    let lines: Vec<&str> = matrix.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(!lines[0].contains(','), "1x1 table should be a lone value: {matrix}");
    assert_eq!(lines[1], "# 0,0");
}

#[test]
fn parallel_flag_still_converges() {
    let dir = TempDir::new().unwrap();
    let (data, _) = make_benchmark(&dir);
    let config = write(&dir, "config.json", ANNEALED_CONFIG);
    let emb_path = dir.path().join("emb.csv");

    let out = bin()
        .args(["embed", "--data"])
        .arg(&data)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&emb_path)
        .arg("--parallel")
        .env("SHAPE_EMBED_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "parallel embed failed: {}", stderr_of(&out));
    let emb = read_matrix_csv(&emb_path).unwrap();
    assert_eq!(emb.dim(), (90, 2));
    assert!(emb.iter().all(|v| v.is_finite()));
}
