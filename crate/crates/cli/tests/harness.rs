//! Orchestration-level integration tests: partial failure handling, report
//! idempotence, and the binary's exit-code contract.

use std::process::Command;

use pullback_lab_cli::config::ExperimentConfig;
use pullback_lab_cli::report::{export_report, ReportError};
use pullback_lab_cli::runner::{run_experiment, TaskStatus};

fn reduced_config(extra: &str) -> ExperimentConfig {
    let base = format!(
        r#"
        [grid]
        dimension = 1
        radius = 8.0
        points_per_axis = 63

        [solver]
        dt = 0.02

        [family]
        ensemble = 4
        seed = 7

        [tasks]
        horizons = [3.0, 6.0, 12.0]
        ladder = [3.0, 6.0, 12.0, 24.0]
        radii = [1.0, 2.0, 4.0]
        simulate_time = 3.0
        cauchy_pairs = [[3.0, 6.0]]
        structure_samples = 500
        {extra}
        "#
    );
    toml::from_str(&base).unwrap()
}

#[test]
fn tampered_model_fails_structure_but_pipeline_continues() {
    // Sign-flipped cubic: structure check must fail; the huge family radius
    // then drives the growing reaction into blow-up, which later tasks must
    // report as errors while still being attempted.
    let mut cfg = reduced_config("");
    cfg.model.beta = -1.0;
    cfg.family.base_radius = 12.0;
    let dir = tempfile::tempdir().unwrap();
    let summary = run_experiment(&cfg, dir.path(), None, None).unwrap();

    let names: Vec<&str> = summary.results.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(
        names,
        vec![
            "verify-structure",
            "simulate",
            "verify-estimates",
            "attractor",
            "report"
        ]
    );
    assert_eq!(summary.results[0].status, TaskStatus::Failed);
    assert!(summary
        .results
        .iter()
        .skip(1)
        .take(3)
        .any(|r| matches!(r.status, TaskStatus::Errored(_))));
    assert_ne!(summary.exit_code(), 0);
    // The structure verdict is still on disk for inspection.
    assert!(dir.path().join("structure.json").exists());
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn report_regeneration_is_idempotent() {
    let cfg = reduced_config("run = [\"verify-structure\", \"simulate\"]");
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path(), None, None).unwrap();
    let first = export_report(dir.path()).unwrap();
    let bytes_first = std::fs::read(dir.path().join("summary.txt")).unwrap();
    let second = export_report(dir.path()).unwrap();
    let bytes_second = std::fs::read(dir.path().join("summary.txt")).unwrap();
    assert_eq!(first, second);
    assert_eq!(bytes_first, bytes_second);
}

#[test]
fn report_on_empty_directory_lists_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    match export_report(dir.path()) {
        Err(ReportError::Empty { expected, .. }) => {
            assert!(expected.iter().any(|f| f == "structure.json"));
            assert!(expected.iter().any(|f| f.contains("estimates/")));
        }
        other => panic!("expected empty-directory error, got {other:?}"),
    }
}

#[test]
fn report_flags_corrupt_artifacts_per_entry() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("structure.json"), "{not json").unwrap();
    std::fs::create_dir_all(dir.path().join("estimates")).unwrap();
    std::fs::write(
        dir.path().join("estimates/absorbing_l2.json"),
        "also not json",
    )
    .unwrap();
    let text = export_report(dir.path()).unwrap();
    assert!(text.contains("structure.json: unreadable"));
    assert!(text.contains("estimates/absorbing_l2.json: unreadable"));
}

#[test]
fn seed_override_changes_sampled_artifacts() {
    let cfg = reduced_config("run = [\"attractor\"]");
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir_a.path(), Some(1), None).unwrap();
    run_experiment(&cfg, dir_b.path(), Some(2), None).unwrap();
    let a = std::fs::read_to_string(dir_a.path().join("attractor/manifest.json")).unwrap();
    let b = std::fs::read_to_string(dir_b.path().join("attractor/manifest.json")).unwrap();
    assert!(a.contains("\"seed\": 1"));
    assert!(b.contains("\"seed\": 2"));
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pullback-lab"))
}

#[test]
fn binary_exit_code_2_on_config_errors() {
    // Unparseable config file.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[grid]\ndimension = \"one\"\n").unwrap();
    let status = binary()
        .args(["run", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Valid TOML violating the temperedness rule.
    let untempered = dir.path().join("untempered.toml");
    std::fs::write(&untempered, "[forcing]\nrate = -0.6\n").unwrap();
    let status = binary()
        .args(["run", "--config"])
        .arg(&untempered)
        .arg("--out")
        .arg(dir.path().join("out2"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Missing --config entirely.
    let status = binary().arg("run").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn binary_report_on_empty_dir_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let status = binary()
        .args(["report", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn binary_full_run_exits_0_and_report_reruns_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    std::fs::write(
        &config_path,
        r#"
        [grid]
        dimension = 1
        radius = 8.0
        points_per_axis = 63

        [solver]
        dt = 0.02

        [family]
        ensemble = 4

        [tasks]
        run = ["verify-structure", "simulate", "attractor"]
        horizons = [3.0, 6.0, 12.0]
        ladder = [3.0, 6.0, 12.0, 24.0]
        simulate_time = 3.0
        "#,
    )
    .unwrap();
    let out = dir.path().join("artifacts");
    let status = binary()
        .args(["run", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .args(["--jobs", "2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("summary.txt").exists());

    let status = binary().args(["report", "--out"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn zero_forcing_run_produces_origin_attractor() {
    let mut cfg = reduced_config("");
    cfg.forcing.amplitude = 0.0;
    let dir = tempfile::tempdir().unwrap();
    let summary = run_experiment(&cfg, dir.path(), None, None).unwrap();
    assert_eq!(summary.exit_code(), 0, "{summary:?}");
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("attractor/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["converged"], serde_json::Value::Bool(true));
    assert!(manifest["diameter"].as_f64().unwrap() < 1e-6);
    // Every member field is numerically zero.
    let member = std::fs::read_to_string(dir.path().join("attractor/members/member_000.csv"))
        .unwrap();
    for line in member.lines().skip(1) {
        let v: f64 = line.split(',').next_back().unwrap().parse().unwrap();
        assert!(v.abs() < 1e-6);
    }
}

#[test]
fn two_dimensional_run_small_grid() {
    // Coarse 2D pipeline shakedown: banded solves with bandwidth N.
    let cfg: ExperimentConfig = toml::from_str(
        r#"
        [grid]
        dimension = 2
        radius = 4.0
        points_per_axis = 15

        [solver]
        dt = 0.05

        [family]
        base_radius = 1.0
        ensemble = 3

        [tasks]
        run = ["verify-structure", "simulate", "verify-estimates", "attractor"]
        horizons = [3.0, 6.0, 12.0]
        ladder = [3.0, 6.0, 12.0, 24.0]
        radii = [1.0, 2.0]
        simulate_time = 2.0
        cauchy_pairs = [[3.0, 6.0]]
        structure_samples = 300
        "#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let summary = run_experiment(&cfg, dir.path(), None, None).unwrap();
    for r in &summary.results {
        assert_eq!(r.status, TaskStatus::Passed, "{:?}", r);
    }
    assert_eq!(summary.exit_code(), 0);
    let manifest =
        std::fs::read_to_string(dir.path().join("attractor/manifest.json")).unwrap();
    assert!(manifest.contains("\"converged\": true"));
}
