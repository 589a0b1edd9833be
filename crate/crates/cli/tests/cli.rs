use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sleepsig::nn::ModelParams;

fn sleepsig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sleepsig"))
        .args(args)
        .env("SLEEPSIG_LOG", "error")
        .output()
        .expect("run sleepsig")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_json(o: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let line = stderr.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|_| panic!("stderr is not a JSON error: {stderr}"))
}

fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.to_str().unwrap();
    let mut args = vec![
        "synth",
        "--sessions",
        "12",
        "--frames",
        "1",
        "--seed",
        "7",
        "--out",
        out,
    ];
    args.extend_from_slice(extra);
    let o = sleepsig(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir.join("manifest.json")
}

const QUICK: [&str; 8] = [
    "--epochs",
    "1",
    "--rounds",
    "2",
    "--train-fraction",
    "0.5",
    "--batch-size",
    "4",
];

#[test]
fn help_exits_zero() {
    for args in [&["--help"][..], &["train", "--help"], &["mask-sweep", "--help"]] {
        let o = sleepsig(args);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("Usage"));
    }
    assert!(stdout(&sleepsig(&["train", "--help"])).contains("--seed"));
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(sleepsig(&[]).status.code(), Some(2));
    assert_eq!(sleepsig(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        sleepsig(&[
            "mask-sweep",
            "--data",
            "m.json",
            "--task",
            "memory_recall",
            "--seed",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        sleepsig(&["train", "--data", "m.json", "--seed", "1", "--task", "nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sleepsig(&["train", "--data", "m.json", "--seed", "1", "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn conflicting_and_missing_settings_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), &[]);
    let m = manifest.to_str().unwrap();

    let o = sleepsig(&[
        "train",
        "--data",
        m,
        "--seed",
        "1",
        "--task",
        "memory_recall",
        "--mask",
        "free_speech",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = sleepsig(&["train", "--data", m]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "usage");

    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"seed": 3, "technique": {"kind": "separate_sweep"}}"#).unwrap();
    let o = sleepsig(&[
        "mask-sweep",
        "--data",
        m,
        "--config",
        config.to_str().unwrap(),
        "--dry-run",
    ]);
    assert_eq!(o.status.code(), Some(2));

    // a seed in the config is enough
    fs::write(&config, r#"{"seed": 3, "epochs": 1}"#).unwrap();
    let o = sleepsig(&["train", "--data", m, "--config", config.to_str().unwrap(), "--dry-run"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let plan: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(plan["config"]["seed"], 3);
    assert_eq!(plan["config"]["epochs"], 1);
}

#[test]
fn validate_reports_the_violated_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), &["--features"]);
    let m = manifest.to_str().unwrap();
    let features = dir.path().join("features.csv");

    let o = sleepsig(&["validate", "--data", m, "--features", features.to_str().unwrap()]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["dataset"]["sessions"], 12);
    assert_eq!(summary["complete_sessions"], 12);
    assert_eq!(summary["feature_rows"], 12 * 48);

    let text = fs::read_to_string(&manifest).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["sessions"][0]["sss"] = 9.into();
    fs::write(&manifest, value.to_string()).unwrap();
    let o = sleepsig(&["validate", "--data", m]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["error"], "invalid_sss_score");

    fs::write(&manifest, text).unwrap();
    let blob = fs::read_dir(dir.path().join("blobs"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    fs::write(&blob, [0u8; 12]).unwrap();
    let o = sleepsig(&["validate", "--data", m]);
    assert_eq!(o.status.code(), Some(1));
    let err = error_json(&o);
    assert_eq!(err["error"], "blob_size");
    assert!(err["message"]
        .as_str()
        .unwrap()
        .contains(blob.file_name().unwrap().to_str().unwrap()));

    let o = sleepsig(&["validate", "--data", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synth_then_mask_sweep_is_a_13_row_deterministic_report() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("data"), &[]);
    let m = manifest.to_str().unwrap();
    let run = |out: &Path, parallel: &str| {
        let mut args = vec![
            "mask-sweep",
            "--data",
            m,
            "--seed",
            "7",
            "--parallel",
            parallel,
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(&QUICK);
        let o = sleepsig(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let a = run(&dir.path().join("a.json"), "1");
    let b = run(&dir.path().join("b.json"), "2");
    assert_eq!(a, b);
    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 13);
    assert_eq!(rows[12]["kind"], "baseline");
    assert!(rows[..12].iter().all(|r| r["kind"] == "masking"));

    let o = sleepsig(&[
        "report",
        dir.path().join("a.json").to_str().unwrap(),
        "--format",
        "table",
    ]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert_eq!(table.lines().count(), 2 + 13);
    assert!(table.contains("Baseline (all tasks)"));
    assert!(table.contains("T12. Memory recall"));
    let o = sleepsig(&["report", dir.path().join("a.json").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 13 * 3);
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("never");
    let o = sleepsig(&[
        "synth",
        "--sessions",
        "12",
        "--seed",
        "1",
        "--out",
        target.to_str().unwrap(),
        "--dry-run",
    ]);
    assert!(o.status.success());
    assert!(!target.exists());

    let manifest = synth(&dir.path().join("data"), &["--features"]);
    let m = manifest.to_str().unwrap();
    let features = dir.path().join("data/features.csv");
    let out = dir.path().join("report.json");
    let model = dir.path().join("model.slpn");
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "train",
            "--data",
            m,
            "--seed",
            "1",
            "--save-model",
            model.to_str().unwrap(),
        ],
        vec!["mask-sweep", "--data", m, "--seed", "1"],
        vec!["separate-sweep", "--data", m, "--seed", "1"],
        vec![
            "baseline-classical",
            "--data",
            m,
            "--seed",
            "1",
            "--features",
            features.to_str().unwrap(),
        ],
    ];
    for mut args in cases {
        args.extend(["--out", out.to_str().unwrap(), "--dry-run"]);
        let o = sleepsig(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let plan: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(plan["dry_run"], true);
        assert!(!out.exists() && !model.exists());
    }

    // dry run still validates
    let o = sleepsig(&["mask-sweep", "--data", m, "--seed", "1", "--rounds", "0", "--dry-run"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["error"], "invalid_config");
}

#[test]
fn train_saves_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("data"), &[]);
    let model = dir.path().join("head.slpn");
    let mut args = vec![
        "train",
        "--data",
        manifest.to_str().unwrap(),
        "--seed",
        "2",
        "--task",
        "memory_recall",
        "--task",
        "free_speech",
        "--format",
        "csv",
        "--save-model",
        model.to_str().unwrap(),
    ];
    args.extend_from_slice(&QUICK);
    let o = sleepsig(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("technique,task,round"));
    assert!(stdout(&o).contains("separate,free_speech+memory_recall,mean"));
    let params = ModelParams::load(&model).unwrap();
    assert_eq!(params.config().input_channels, 2 + 1);
}

#[test]
fn classical_baseline_runs_from_synthetic_features() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("data"), &["--features"]);
    let features = dir.path().join("data/features.csv");
    let out = dir.path().join("nested/classical.json");
    let o = sleepsig(&[
        "baseline-classical",
        "--data",
        manifest.to_str().unwrap(),
        "--features",
        features.to_str().unwrap(),
        "--seed",
        "4",
        "--rounds",
        "2",
        "--train-fraction",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    // 6 training sessions per fold cannot fill 3-fold model selection
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_json(&o)["error"], "insufficient_data");
    assert!(!out.exists());

    let big = dir.path().join("big");
    let o = sleepsig(&[
        "synth",
        "--sessions",
        "40",
        "--frames",
        "1",
        "--seed",
        "7",
        "--features",
        "--out",
        big.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = sleepsig(&[
        "baseline-classical",
        "--data",
        big.join("manifest.json").to_str().unwrap(),
        "--features",
        big.join("features.csv").to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 13);
    assert!(report["rows"][0]["rounds"][0]["model"].is_string());
}
