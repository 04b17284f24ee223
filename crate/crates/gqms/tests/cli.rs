//! End-to-end tests of the `gqms` binary: analyze / evolve / batch.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

fn gqms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gqms"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn analyze_thermal_mode_reports_all_true() {
    let file = models_dir().join("thermal_mode.json");
    let out = gqms(&["analyze", file.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["model_name"], "thermal_mode");
    assert_eq!(report["existence"]["exists"], true);
    assert_eq!(report["flags"]["faithful"], true);
    assert_eq!(report["flags"]["irreducible"], true);
    assert_eq!(report["gap"]["kms"]["holds"], true);
}

#[test]
fn analyze_zeta_drift_reports_obstruction_with_exit_zero() {
    let file = models_dir().join("zeta_drift.json");
    let out = gqms(&["analyze", file.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "analysis completes regardless of the verdict"
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["existence"]["exists"], false);
    assert_eq!(
        report["existence"]["reason"],
        "center_displacement_obstruction"
    );
}

#[test]
fn analyze_text_format() {
    let file = models_dir().join("harmonic_oscillator.json");
    let out = gqms(&["analyze", file.to_str().unwrap(), "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("model: harmonic_oscillator"));
    assert!(text.contains("invariant state exists: true"));
}

#[test]
fn analyze_rejects_malformed_matrix_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("odd.json");
    fs::write(
        &bad,
        r#"{"metadata": {"name": "odd"},
            "phase_space": {"z": [[0.0]], "c": [[0.0]], "zeta": [0.0]}}"#,
    )
    .unwrap();
    let out = gqms(&["analyze", bad.to_str().unwrap()]);
    assert!(!out.status.success(), "schema violations exit nonzero");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("phase_space.z"),
        "error names the field: {err}"
    );
}

#[test]
fn evolve_damped_mode_decays_to_expected_mean() {
    let file = models_dir().join("damped_mode.json");
    let out = gqms(&[
        "evolve",
        file.to_str().unwrap(),
        "--m0",
        "1,0",
        "--sigma0",
        "1,0;0,1",
        "--T",
        "3",
        "--steps",
        "6",
        "--precision",
        "12",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = table.trim_end().lines().collect();
    assert_eq!(lines.len(), 8, "header plus seven rows");
    assert_eq!(lines[0], "t,m0,m1,s00,s01,s11,eid_defect");
    let last: Vec<f64> = lines[7].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[0] - 3.0).abs() < 1e-12);
    assert!(
        (last[1] - (-3.0f64).exp()).abs() < 1e-9,
        "mean decays like e^{{-T}}"
    );
    // Stationary covariance stays at the identity.
    assert!((last[3] - 1.0).abs() < 1e-9 && (last[5] - 1.0).abs() < 1e-9);
}

#[test]
fn evolve_with_one_step_gives_two_rows() {
    let file = models_dir().join("damped_mode.json");
    let out = gqms(&[
        "evolve",
        file.to_str().unwrap(),
        "--m0",
        "0,0",
        "--sigma0",
        "1,0;0,1",
        "--T",
        "1",
        "--steps",
        "1",
    ]);
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(table.trim_end().lines().count(), 3, "header, t=0 and t=T");
}

#[test]
fn evolve_from_stationary_start_keeps_rows_identical() {
    let file = models_dir().join("thermal_mode.json");
    let out = gqms(&[
        "evolve",
        file.to_str().unwrap(),
        "--m0",
        "0,0",
        "--sigma0",
        "3,0;0,3",
        "--T",
        "5",
        "--steps",
        "5",
        "--precision",
        "8",
    ]);
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = table.trim_end().lines().collect();
    // Compare the moment columns; t and the decoherence defect depend on t.
    let moments = |line: &str| -> Vec<String> {
        line.split(',')
            .skip(1)
            .take(5)
            .map(str::to_string)
            .collect()
    };
    let first = moments(lines[1]);
    for row in &lines[2..] {
        assert_eq!(
            moments(row),
            first,
            "stationary moments match to printed precision"
        );
    }
}

#[test]
fn evolve_omits_defect_column_when_no_invariant_state() {
    let file = models_dir().join("zeta_drift.json");
    let out = gqms(&[
        "evolve",
        file.to_str().unwrap(),
        "--m0",
        "0,0",
        "--sigma0",
        "1,0;0,1",
        "--T",
        "2",
        "--steps",
        "2",
    ]);
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    let header = table.lines().next().unwrap();
    assert_eq!(header, "t,m0,m1,s00,s01,s11");
}

#[test]
fn evolve_rejects_inadmissible_initial_covariance() {
    let file = models_dir().join("damped_mode.json");
    let out = gqms(&[
        "evolve",
        file.to_str().unwrap(),
        "--m0",
        "0,0",
        "--sigma0",
        "0.2,0;0,0.2",
        "--T",
        "1",
        "--steps",
        "2",
    ]);
    assert!(!out.status.success());
}

#[test]
fn batch_analyzes_gallery_and_isolates_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let src = models_dir();
    for entry in fs::read_dir(&src).unwrap() {
        let p = entry.unwrap().path();
        fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    fs::write(dir.path().join("corrupt.json"), "{ not json").unwrap();
    let out_dir = dir.path().join("reports");
    let out = gqms(&[
        "batch",
        dir.path().to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "batch never aborts on per-model failures"
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("analyzed 6 model(s), 1 failure(s)"),
        "stdout: {stdout}"
    );
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(
        summary
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .count(),
        7
    );
    assert!(summary.contains("corrupt.json"));
    assert!(out_dir.join("thermal_mode.report.json").exists());
}

#[test]
fn batch_on_empty_directory_is_a_clean_noop() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let out = gqms(&[
        "batch",
        dir.path().to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(
        summary.trim_end(),
        "name,exists,d0,faithful,irreducible,gap_holds"
    );
}

#[test]
fn batch_on_missing_directory_fails() {
    let out = gqms(&["batch", "/nonexistent-gqms-models"]);
    assert!(!out.status.success());
}

#[test]
fn batch_reports_are_byte_identical_across_binary_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("r1");
    let out2 = dir.path().join("r2");
    for out in [&out1, &out2] {
        let res = gqms(&[
            "batch",
            models_dir().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(&out1)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7, "six reports plus the summary table");
    for name in names {
        let a = fs::read(out1.join(&name)).unwrap();
        let b = fs::read(out2.join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs between runs");
    }
}

#[test]
fn gallery_summary_matches_expected_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let out = gqms(&[
        "batch",
        models_dir().to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let row = |name: &str| -> String {
        summary
            .lines()
            .find(|l| l.starts_with(name))
            .unwrap_or_default()
            .to_string()
    };
    assert_eq!(row("thermal_mode"), "thermal_mode,true,0,true,true,true");
    assert_eq!(row("damped_mode"), "damped_mode,true,0,false,false,n/a");
    assert_eq!(row("zeta_drift"), "zeta_drift,false,n/a,n/a,n/a,n/a");
    assert_eq!(
        row("harmonic_oscillator"),
        "harmonic_oscillator,true,1,true,false,n/a"
    );
    assert_eq!(
        row("oscillator_thermal"),
        "oscillator_thermal,true,1,true,false,true"
    );
    assert_eq!(
        row("planted_roundtrip"),
        "planted_roundtrip,true,2,true,false,true"
    );
}
