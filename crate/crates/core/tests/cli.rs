mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use pairvqe::cli::{metadata_path, read_csv, run_scan, shift_report, write_csv, ScanRow, ScanSpec, CSV_HEADER};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pairvqe-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn spec_text(method: &str, geometries: &[&str], output: &Path, extra: &str) -> String {
    let fx = common::fixtures_dir();
    let mut s = format!(
        "[scan]\nmolecule = lih\nmethod = {method}\nbackend = exact\nseed = 3\noutput = {}\nmanifest = {}\n\n[geometries]\n",
        output.display(),
        fx.join("manifest.json").display()
    );
    for g in geometries {
        s += &format!("{g} = {}\n", fx.join(format!("lih_{g}.fcidump")).display());
    }
    s + "\n[vqe]\nexact_engine = pair\n" + extra
}

fn row(g: &str, e: f64, s: f64) -> ScanRow {
    ScanRow {
        molecule: "lih".into(),
        geometry: g.into(),
        method: "oo-upccd".into(),
        backend: "shots:1000".into(),
        shots: 1000,
        noise_kind: "coherent".into(),
        noise_r: 0.005,
        seed: 11,
        energy_hartree: e,
        stderr_hartree: s,
        macro_iters: 7,
        converged: true,
        n_active_params: 2,
        n_orbital_params: 3,
    }
}

#[test]
fn equal_specs_give_byte_identical_csv() {
    let dir = scratch("det");
    let mut bodies = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("run{k}.csv"));
        let spec = ScanSpec::from_ini_str(&spec_text("oo-upccd", &["1.60", "3.00"], &out, ""), &dir, &[]).unwrap();
        run_scan(&spec).unwrap();
        bodies.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let rows = read_csv(&dir.join("run0.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].geometry, "1.60");
    assert_eq!(rows[1].geometry, "3.00");
}

#[test]
fn metadata_records_fixture_hashes() {
    let dir = scratch("meta");
    let out = dir.join("hf.csv");
    let spec = ScanSpec::from_ini_str(&spec_text("hf", &["1.60"], &out, ""), &dir, &[]).unwrap();
    run_scan(&spec).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(metadata_path(&out)).unwrap()).unwrap();
    let fx = &meta["fixtures"][0];
    assert_eq!(fx["sha256"], fx["manifest_sha256"]);
    assert_eq!(fx["frozen"], serde_json::json!([0]));
    assert!(meta["version"].as_str().unwrap().starts_with('v'));
    assert_eq!(meta["method"], "hf");
}

#[test]
fn csv_round_trip() {
    let dir = scratch("rt");
    let rows = vec![row("1.00", -7.123456789012345, 1.0e-4), row("1.60", -7.9, 0.0), row("5.00", -7.7 + 1e-13, 3.3e-5)];
    let p = dir.join("rt.csv");
    write_csv(&p, &rows).unwrap();
    assert_eq!(read_csv(&p).unwrap(), rows);
}

#[test]
fn empty_geometry_list_writes_header_only() {
    let dir = scratch("empty");
    let out = dir.join("empty.csv");
    let spec = ScanSpec::from_ini_str(&spec_text("upccd", &[], &out, ""), &dir, &[]).unwrap();
    assert!(spec.geometries.is_empty());
    let res = run_scan(&spec).unwrap();
    assert!(res.rows.is_empty() && res.all_converged);
    assert_eq!(std::fs::read_to_string(&out).unwrap().trim_end(), CSV_HEADER.join(","));
}

#[test]
fn shift_of_constant_offset_recovers_reference() {
    let reference = vec![row("1.00", -7.0, 1e-4), row("1.60", -7.5, 1e-4), row("3.00", -7.2, 1e-4)];
    let same = shift_report(&reference, &reference, 1.6).unwrap();
    assert!(same.iter().all(|r| r.delta_hartree == 0.0 && r.max_abs_delta_hartree == 0.0));
    let offset: Vec<ScanRow> = reference.iter().map(|r| ScanRow { energy_hartree: r.energy_hartree + 0.3, ..r.clone() }).collect();
    let shifted = shift_report(&offset, &reference, 1.6).unwrap();
    for (s, r) in shifted.iter().zip(&reference) {
        assert!((s.row.energy_hartree - r.energy_hartree).abs() < 1e-12);
    }
    assert!(shift_report(&offset, &reference, 2.0).is_err());
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pairvqe"))
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    let ok = dir.join("ok.ini");
    std::fs::write(&ok, spec_text("upccd", &["1.60"], &dir.join("ok.csv"), "")).unwrap();
    let st = binary().args(["scan", "--spec"]).arg(&ok).output().unwrap().status;
    assert_eq!(st.code(), Some(0));
    assert_eq!(read_csv(&dir.join("ok.csv")).unwrap().len(), 1);

    // one macro-iteration can never satisfy the two-in-a-row rule
    let st = binary().args(["scan", "--spec"]).arg(&ok).args(["--set", "vqe.macro_max=1"]).output().unwrap().status;
    assert_eq!(st.code(), Some(2));

    let bad = dir.join("bad.ini");
    std::fs::write(&bad, spec_text("upccd", &["1.60"], &dir.join("bad.csv"), "no_such_key = 1\n")).unwrap();
    let out = binary().args(["scan", "--spec"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));

    let missing = dir.join("missing.ini");
    std::fs::write(&missing, spec_text("upccd", &["9.99"], &dir.join("m.csv"), "")).unwrap();
    assert_eq!(binary().args(["scan", "--spec"]).arg(&missing).output().unwrap().status.code(), Some(1));
}

#[test]
fn shift_subcommand() {
    let dir = scratch("shift");
    let reference = vec![row("1.00", -7.0, 1e-4), row("1.60", -7.5, 1e-4)];
    let input: Vec<ScanRow> = reference.iter().map(|r| ScanRow { energy_hartree: r.energy_hartree - 0.01, ..r.clone() }).collect();
    write_csv(&dir.join("ref.csv"), &reference).unwrap();
    write_csv(&dir.join("in.csv"), &input).unwrap();
    let st = binary()
        .arg("shift")
        .arg("--input")
        .arg(dir.join("in.csv"))
        .arg("--reference")
        .arg(dir.join("ref.csv"))
        .args(["--geometry", "1.6", "--output"])
        .arg(dir.join("out.csv"))
        .output()
        .unwrap()
        .status;
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(dir.join("out.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().ends_with("max_abs_delta_hartree"));
    assert_eq!(lines.count(), 2);
}
