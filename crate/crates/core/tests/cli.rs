use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_qrho");

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn qrho(out: &Path, args: &[&str]) -> std::process::Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn fig5_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrho(dir.path(), &["--config", &data("fig5.toml"), "figures", "--fig", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let got = fs::read(dir.path().join("fig5.csv")).unwrap();
    let want = fs::read(data("fig5.golden.csv")).unwrap();
    assert_eq!(String::from_utf8(got).unwrap(), String::from_utf8(want).unwrap());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    // Different worker counts must not change the output.
    for (d, workers) in [(&a, "1"), (&b, "2")] {
        let o = qrho(d.path(), &["--seed", "11", "--workers", workers, "paths", "--dump"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["paths.csv", "path_00000.csv", "path_00999.csv"] {
        assert!(fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
    let hash = |d: &Path| {
        let m: serde_json::Value = serde_json::from_slice(&fs::read(d.join("manifest.json")).unwrap()).unwrap();
        m["config_sha256"].as_str().unwrap().to_string()
    };
    assert_eq!(hash(a.path()), hash(b.path()));
    let c = tempfile::tempdir().unwrap();
    assert!(qrho(c.path(), &["--seed", "12", "paths"]).status.success());
    assert!(fs::read(a.path().join("paths.csv")).unwrap() != fs::read(c.path().join("paths.csv")).unwrap());
}

#[test]
fn fig1_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrho(dir.path(), &["figures", "--fig", "1", "--lambdas", "0.5,2,8"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta_bar,density,lambda"));
    assert_eq!(lines.count(), 3 * 401);
    assert!(!text.contains('\r'));
}

#[test]
fn transition_grid_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrho(
        dir.path(),
        &["transition", "--lambda-grid", "log:0.01:100:8", "--rho-grid", "lin:0:0.95:5"],
    );
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 40);
    for line in text.lines().skip(1) {
        let p: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn manifest_records_checksums_and_config() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qrho(dir.path(), &["thermo", "--format", "json"]).status.success());
    let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["tool"], "qrho");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    let names: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["thermo.json", "fig5.json", "config.toml"]);
    let thermo: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("thermo.json")).unwrap()).unwrap();
    let row = &thermo[0];
    let (s, e, u, f) = (
        row["entropy_over_k"].as_f64().unwrap(),
        row["epsilon"].as_f64().unwrap(),
        row["internal_energy"].as_f64().unwrap(),
        row["free_energy"].as_f64().unwrap(),
    );
    assert!((s - e * (u - f)).abs() < 1e-8);
    // The written config reproduces the run.
    let again = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.toml");
    assert!(qrho(again.path(), &["--config", cfg.to_str().unwrap(), "thermo", "--format", "json"]).status.success());
    assert!(fs::read(dir.path().join("thermo.json")).unwrap() == fs::read(again.path().join("thermo.json")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrho(dir.path(), &["transition", "--rho-grid", "0.2,1.2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grids.rho"));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[sde]\ndt = 0.5\n").unwrap();
    assert_eq!(qrho(dir.path(), &["--config", bad.to_str().unwrap(), "paths"]).status.code(), Some(1));
    // λ beyond the range of the Airy evaluation is a numerical failure.
    let o = qrho(dir.path(), &["figures", "--fig", "5", "--lambdas", "1,2e4"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(qrho(dir.path(), &["figures", "--fig", "0"]).status.code(), Some(1));
}

#[test]
fn wavefunction_ground_state_is_normalised() {
    let dir = tempfile::tempdir().unwrap();
    let o = qrho(dir.path(), &["wavefunction", "--x-grid", "lin:-8:8:801"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("wavefunction.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let h = rows[1][0] - rows[0][0];
    let norm: f64 = rows.iter().map(|r| r[3]).sum::<f64>() * h;
    assert!((norm - 1.0).abs() < 1e-6, "{norm}");
}
