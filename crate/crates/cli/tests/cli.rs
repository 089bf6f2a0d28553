use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use kawahara::periodic::PeriodicWave;
use kawahara::spectra::SpectrumReport;

fn kawahara(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kawahara"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn flat_wave_has_linear_wavenumber() {
    let d = tempfile::tempdir().unwrap();
    let o = kawahara(d.path(), &["wave", "--a", "0", "--c", "0.1", "--out", "o"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc = read_json(&d.path().join("o/wave_a0_c0.1.json"));
    assert_eq!(doc["seed"], 0);
    let w: PeriodicWave = serde_json::from_value(doc["result"].clone()).unwrap();
    let k0 = ((1.0 + 1.4f64.sqrt()) / 2.0).sqrt();
    assert!((w.k - k0).abs() <= 1e-14);
    assert_eq!(w.profile.max_abs(), 0.0);
}

#[test]
fn spectrum_reports_positive_critical_eigenvalue() {
    let d = tempfile::tempdir().unwrap();
    let o = kawahara(
        d.path(),
        &["spectrum", "--a", "0.1", "--c", "0.1", "--out", "o"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc = read_json(&d.path().join("o/spectrum_a0.1_c0.1_g0_l0.json"));
    let r: SpectrumReport = serde_json::from_value(doc["result"].clone()).unwrap();
    let nu = r.nu.expect("ν reported");
    assert!((nu / 1.713e-6 - 1.0).abs() <= 0.01, "ν = {nu}");
    // schema round trip
    assert_eq!(serde_json::to_value(&r).unwrap(), doc["result"]);
}

#[test]
fn malformed_flag_is_a_usage_error_without_output() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["wave", "--a", "zero", "--out", "o"][..],
        &["wave", "--frobnicate", "--out", "o"][..],
        &["spectrum", "--modes", "0", "--out", "o"][..],
    ] {
        let o = kawahara(d.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!d.path().join("o").exists());
    }
}

#[test]
fn numerical_failure_exits_one_with_structured_report() {
    let d = tempfile::tempdir().unwrap();
    let o = kawahara(d.path(), &["wave", "--a", "0.1,0.9", "--out", "o"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    let report: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(report["errors"][0]["point"], "wave_a0.9_c0.1");
    assert_eq!(report["errors"][0]["kind"], "range");
    let m = read_json(&d.path().join("o/manifest.json"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 1);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let d = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "bloch-sweep",
            "--a",
            "0.1",
            "--c",
            "0.1",
            "--gamma",
            "-0.25,0,0.25",
            "-n",
            "16",
            "--seed",
            "5",
            "--out",
            out,
        ]
    };
    assert!(kawahara(d.path(), &args("x")).status.success());
    assert!(kawahara(d.path(), &args("y")).status.success());
    let mut names: Vec<_> = fs::read_dir(d.path().join("x"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 3);
    for n in names {
        let a = fs::read(d.path().join("x").join(&n)).unwrap();
        let b = fs::read(d.path().join("y").join(&n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("run.cfg"),
        "# sweep\na = 0.05\nc = 0.05\nseed = 42\nout = from-file\n",
    )
    .unwrap();
    let o = kawahara(d.path(), &["--config", "run.cfg", "wave", "--c", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&d.path().join("from-file/wave_a0.05_c0.1.json"));
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["params"]["modes"], 32);
    let bad = kawahara(d.path(), &["--config", "missing.cfg", "wave", "--out", "z"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn completed_points_are_reused() {
    let d = tempfile::tempdir().unwrap();
    let args = ["wave", "--a", "0.1,0.2", "--out", "o"];
    assert!(kawahara(d.path(), &args).status.success());
    let manifest = fs::read(d.path().join("o/manifest.json")).unwrap();
    let again = kawahara(d.path(), &args);
    assert!(String::from_utf8_lossy(&again.stderr).contains("reused 2"));
    assert_eq!(
        fs::read(d.path().join("o/manifest.json")).unwrap(),
        manifest
    );
    // a corrupted output is recomputed
    fs::write(d.path().join("o/wave_a0.1_c0.1.csv"), "x").unwrap();
    let third = kawahara(d.path(), &args);
    assert!(String::from_utf8_lossy(&third.stderr).contains("reused 1"));
}

#[test]
fn csv_uses_seventeen_significant_digits() {
    let d = tempfile::tempdir().unwrap();
    assert!(kawahara(
        d.path(),
        &["wave", "--a", "0.1", "-n", "16", "--seed", "3", "--out", "o"]
    )
    .status
    .success());
    let text = fs::read_to_string(d.path().join("o/wave_a0.1_c0.1.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("seed,x,u"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "3");
    let mantissa = row[2].split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
}

#[test]
fn worker_count_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let run = |workers: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_kawahara"))
            .current_dir(d.path())
            .env("KAWAHARA_WORKERS", workers)
            .args(["wave", "--a", "0.1,0.2", "-n", "16", "--out", out])
            .output()
            .unwrap()
    };
    assert!(run("1", "one").status.success());
    assert!(run("3", "three").status.success());
    assert_eq!(
        fs::read(d.path().join("one/manifest.json")).unwrap(),
        fs::read(d.path().join("three/manifest.json")).unwrap()
    );
    assert_eq!(run("0", "zero").status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = kawahara(d.path(), &["verify-all", "--out", "o"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let doc = read_json(&d.path().join("o/verify.json"));
    assert!(doc["result"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}
