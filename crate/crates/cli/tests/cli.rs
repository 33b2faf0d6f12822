use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use msalab_cli::load_manifest;
use msalab_cli::output::verify;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_msalab"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, threads: &str) -> i32 {
    let st = bin()
        .args([cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("MSALAB_THREADS", threads)
        .output()
        .unwrap();
    st.status.code().unwrap()
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let m = load_manifest(&dir.join("manifest.json")).unwrap();
    m.files.iter().map(|f| (f.name.clone(), fs::read(dir.join(&f.name)).unwrap())).collect()
}

#[test]
fn single_sample_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), "c.json", r#"{"density": 2, "scales": [6], "trials": 1, "seed": 11}"#);
    assert_eq!(run("sample", &c, &tmp.path().join("a"), "1"), 0);
    assert_eq!(run("sample", &c, &tmp.path().join("b"), "3"), 0);
    let a = fs::read_to_string(tmp.path().join("a/samples.jsonl")).unwrap();
    assert_eq!(a.lines().count(), 1);
    assert_eq!(data_files(&tmp.path().join("a")), data_files(&tmp.path().join("b")));
    let tails = fs::read_to_string(tmp.path().join("a/tails.csv")).unwrap();
    assert!(tails.lines().skip(1).all(|l| !l.contains("violated")));
    assert!(tails.contains("holds"));
}

#[test]
fn validation_and_io_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let zero = write_config(tmp.path(), "z.json", r#"{"density": 0, "scales": [8]}"#);
    assert_eq!(run("sample", &zero, &tmp.path().join("z"), "1"), 2);
    let unknown = write_config(tmp.path(), "u.json", r#"{"scales": [8], "colour": "red"}"#);
    assert_eq!(run("msa", &unknown, &tmp.path().join("u"), "1"), 2);
    let ladder = write_config(tmp.path(), "l.json", r#"{"ladder": {"l0": 1000, "rho1": 0.8}}"#);
    let out = bin()
        .args(["msa", "--config", ladder.to_str().unwrap(), "--out", tmp.path().join("l").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ρ₁ < 3/4"));
    let ok = write_config(tmp.path(), "ok.json", r#"{"scales": [6], "trials": 1}"#);
    fs::write(tmp.path().join("file"), b"").unwrap();
    assert_eq!(run("sample", &ok, &tmp.path().join("file/sub"), "1"), 5);
    assert_eq!(run("sample", &ok, &tmp.path().join("t"), "zero"), 2);
    assert_eq!(run("sample", &tmp.path().join("missing.json"), &tmp.path().join("m"), "1"), 5);
}

#[test]
fn goodbox_summary_and_resonance() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(
        tmp.path(),
        "c.json",
        r#"{"density": 4, "scales": [8, 12], "trials": 6, "energy": {"e0": 0.25, "points": 3}, "goodbox": {"resonant": true}}"#,
    );
    assert_eq!(run("goodbox", &c, &tmp.path().join("g"), "2"), 0);
    let csv = fs::read_to_string(tmp.path().join("g/goodbox.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 2 * 3);
    for line in csv.lines().skip(1) {
        let frac: f64 = line.split(',').nth(6).unwrap().parse().unwrap();
        assert!(frac > 0.8, "{line}");
    }
    let jl = fs::read_to_string(tmp.path().join("g/goodbox.jsonl")).unwrap();
    let resonant: Vec<serde_json::Value> =
        jl.lines().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()).filter(|v| v["resonant"] == true).collect();
    assert_eq!(resonant.len(), 12);
    assert!(resonant.iter().all(|v| v["report"]["verdict"] == "bad"));
}

#[test]
fn msa_rerun_and_threads_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), "c.json", r#"{"density": 4, "scales": [8, 12], "trials": 12, "seed": 5}"#);
    assert_eq!(run("msa", &c, &tmp.path().join("a"), "1"), 0);
    assert_eq!(run("msa", &c, &tmp.path().join("b"), "4"), 0);
    let a = tmp.path().join("a");
    assert_eq!(data_files(&a), data_files(&tmp.path().join("b")));
    let m = load_manifest(&a.join("manifest.json")).unwrap();
    assert!(verify(&a, &m).unwrap().is_empty());
    for name in ["scales.csv", "wegner.csv", "trials.jsonl", "wegner.jsonl", "report.json", "config.json"] {
        assert!(m.files.iter().any(|f| f.name == name), "{name}");
    }
    // rerun from the stored configuration
    assert_eq!(run("msa", &a.join("config.json"), &tmp.path().join("c"), "2"), 0);
    let m2 = load_manifest(&tmp.path().join("c/manifest.json")).unwrap();
    assert_eq!(m.config_hash, m2.config_hash);
    assert_eq!(m.files, m2.files);
}

#[test]
fn msa_misses_targets_with_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), "c.json", r#"{"density": 0.5, "scales": [8], "trials": 8, "energy": {"e0": 2.0, "points": 1}}"#);
    assert_eq!(run("msa", &c, &tmp.path().join("o"), "1"), 3);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["all_targets_met"], false);
    assert_eq!(load_manifest(&tmp.path().join("o/manifest.json")).unwrap().exit_code, 3);
}

#[test]
fn measure_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write_config(tmp.path(), "e.json", r#"{"density": 6, "scales": [8], "trials": 2, "energy": {"e0": 0.05}}"#);
    assert_eq!(run("measure", &empty, &tmp.path().join("e"), "1"), 0);
    let fits = fs::read_to_string(tmp.path().join("e/fits.csv")).unwrap();
    assert_eq!(fits.lines().count(), 1);
    let moments = fs::read_to_string(tmp.path().join("e/moments.csv")).unwrap();
    assert_eq!(moments.lines().count(), 1 + 2 * 64);

    let synth = write_config(tmp.path(), "s.json", r#"{"scales": [32], "trials": 1, "measure": {"synthetic_mass": 0.5}}"#);
    assert_eq!(run("measure", &synth, &tmp.path().join("s"), "1"), 0);
    let fits = fs::read_to_string(tmp.path().join("s/fits.csv")).unwrap();
    let mass: f64 = fits.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!((mass - 0.5).abs() < 0.02, "{mass}");
}

#[test]
fn wegner_and_covering_check() {
    let tmp = tempfile::tempdir().unwrap();
    let c = write_config(tmp.path(), "c.json", r#"{"density": 4, "scales": [8], "trials": 10, "constants": {"c1": 1.0}}"#);
    assert_eq!(run("wegner", &c, &tmp.path().join("w"), "2"), 0);
    let csv = fs::read_to_string(tmp.path().join("w/wegner.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);

    let cov = write_config(tmp.path(), "k.json", r#"{"scales": [8], "covering": {"ratio_min": 1.5, "ratio_max": 6, "ratio_step": 0.25, "dims": [1]}}"#);
    assert_eq!(run("covering-check", &cov, &tmp.path().join("k"), "1"), 0);
    let rows = fs::read_to_string(tmp.path().join("k/coverings.csv")).unwrap();
    let incompatible: Vec<&str> = rows.lines().filter(|l| l.split(',').nth(3) == Some("false")).collect();
    assert!(incompatible.iter().any(|l| l.starts_with("1,2.0,")));
    assert!(incompatible.iter().any(|l| l.starts_with("1,3.0,")));
    assert!(!incompatible.iter().any(|l| l.starts_with("1,5.0,")));
}
