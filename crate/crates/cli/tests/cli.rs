use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use zigzag_core::basis::build_sector;
use zigzag_core::dump;
use zigzag_core::hamiltonian::build_boson;
use zigzag_core::observables::report::read_rows;
use zigzag_core::{Boundary, ModelParams};

fn zigzag(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zigzag"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg("1")
        .output()
        .expect("binary runs")
}

fn only_file(dir: &Path, prefix: &str, suffix: &str) -> std::path::PathBuf {
    let hits: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let n = p.file_name().unwrap().to_string_lossy();
            n.starts_with(prefix) && n.ends_with(suffix)
        })
        .collect();
    assert_eq!(hits.len(), 1, "{prefix}*{suffix} in {}", dir.display());
    hits[0].clone()
}

#[test]
fn ed_writes_energy_and_observables() {
    let dir = tempfile::tempdir().unwrap();
    let out = zigzag(dir.path(), &["ed", "--L", "8", "--g", "0.5", "--eta", "1", "--boundary", "obc"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = only_file(dir.path(), "ed_", ".csv");
    let rows = read_rows(fs::File::open(&csv).unwrap()).unwrap();
    let e = rows.iter().find(|r| r.quantity == "energy").unwrap().value;
    assert!((e - -14.298449359706).abs() < 1e-9, "{e}");
    assert_eq!(rows.iter().filter(|r| r.quantity == "density").count(), 8);
    // header comments carry the resolved configuration
    assert!(fs::read_to_string(&csv).unwrap().starts_with("# [model]"));
}

#[test]
fn ed_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = zigzag(dir.path(), &["ed", "--L", "8", "--g", "1", "--eta", "0", "--format", "json"]);
    assert!(out.status.success());
    let text = fs::read_to_string(only_file(dir.path(), "ed_", ".json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["model"]["L"], 8);
    assert!(v["report"]["energy"].as_f64().unwrap() < 0.0, "{text}");
}

#[test]
fn dumped_operator_decodes_to_the_same_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = zigzag(dir.path(), &["dump-operator", "--verify", "--L", "8", "--g", "0.7", "--eta", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let d = dump::decode(&fs::read(only_file(dir.path(), "operator_", ".zzop")).unwrap()).unwrap();
    let p = ModelParams::new(8, 0.7, 2.0, Boundary::Pbc);
    assert_eq!(d.params, p);
    assert_eq!(d.operator, build_boson(&p, &build_sector(8, 4).unwrap()).unwrap());
}

#[test]
fn fidelity_cut_writes_fidelity_and_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let out = zigzag(dir.path(), &["fidelity-cut", "--L", "8", "--eta", "1", "--range", "0.2,0.6,0.05"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fid = fs::read_to_string(dir.path().join("fidelity.csv")).unwrap();
    let data: Vec<&str> = fid.lines().filter(|l| !l.starts_with('#')).collect();
    // header plus one row per adjacent pair of the nine grid points
    assert_eq!(data.len(), 1 + 8);
    assert!(dir.path().join("peaks.csv").exists());
}

#[test]
fn meanfield_reports_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let out = zigzag(dir.path(), &["meanfield", "--nk", "64"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("crossing.csv")).unwrap();
    assert!(text.contains("0.366"), "{text}");
    assert!(dir.path().join("bands.csv").exists());
}

#[test]
fn micro_reports_the_level_assignment() {
    let dir = tempfile::tempdir().unwrap();
    let out = zigzag(dir.path(), &["micro", "--points", "4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("micro.json")).unwrap()).unwrap();
    let text = v.to_string();
    assert!(text.contains("slope"), "{text}");
    assert!(dir.path().join("micro_elimination.csv").exists());
}

#[test]
fn gutzwiller_scan_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = zigzag(dir.path(), &["gutzwiller", "--L", "12", "--eta", "0", "--restarts", "4", "--scan", "0.2,0.4,0.1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("gutzwiller.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3);
}

#[test]
fn invalid_parameters_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["ed", "--L", "40"][..],
        &["ed", "--L", "10", "--boundary", "pbc"],
        &["ed", "--L", "8", "--N", "9"],
        &["ed", "--g", "abc"],
        &["no-such-command"],
        &["fidelity-cut", "--range", "0.5,0.2,0.1"],
    ] {
        let out = zigzag(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_config_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[model]\nL = 8\nunknown_key = 1\n").unwrap();
    let out = zigzag(dir.path(), &["--config", cfg.to_str().unwrap(), "ed"]);
    assert_eq!(out.status.code(), Some(2));
    let out = zigzag(dir.path(), &["--config", dir.path().join("missing.toml").to_str().unwrap(), "ed"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[model]\nL = 12\ng = 0.7\n\n[solver]\nmax_iter = 1\ntol = 1e-14\nmax_basis = 4\n").unwrap();
    let out = zigzag(dir.path(), &["--config", cfg.to_str().unwrap(), "ed"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flags_override_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[model]\nL = 12\ng = 0.3\nboundary = \"obc\"\n").unwrap();
    let out = zigzag(dir.path(), &["--config", cfg.to_str().unwrap(), "ed", "--L", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = only_file(dir.path(), "ed_L8_", ".csv");
    let rows = read_rows(fs::File::open(csv).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.sites == 8 && r.g == 0.3 && r.boundary == Boundary::Obc));
}
