use std::fs;
use std::path::Path;

use beamhom_cli::run_cli;

fn out(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().expect("utf-8 path").to_string()
}

#[test]
fn verify_passes_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = out(dir.path(), "v");
    let outcome = run_cli(["beamhom", "verify", "--n", "16,32", "--trials", "20", "--out", &o]).unwrap();
    assert!(outcome.passed, "{}", outcome.summary);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("v/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["tool"], "beamhom");
    assert_eq!(manifest["config"]["n_list"], serde_json::json!([16, 32]));
    assert!(dir.path().join("v/verify.csv").exists());
}

#[test]
fn solve_without_loads_gives_zero_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = out(dir.path(), "s");
    run_cli(["beamhom", "solve", "--n", "6", "--format", "csv", "--out", &o]).unwrap();
    let csv = fs::read_to_string(dir.path().join("s/solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("i,j,u_x,u_y,theta"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 36);
    for r in rows {
        assert!(r.split(',').skip(2).all(|v| v.parse::<f64>().unwrap() == 0.0), "{r}");
    }
}

#[test]
fn constant_torque_rotates_uniformly() {
    let dir = tempfile::tempdir().unwrap();
    let o = out(dir.path(), "t");
    run_cli(["beamhom", "solve", "--n", "5", "--load", "0,0,0,0,1.8", "--format", "csv", "--out", &o]).unwrap();
    let csv = fs::read_to_string(dir.path().join("t/solution.csv")).unwrap();
    for r in csv.lines().skip(1) {
        let v: Vec<f64> = r.split(',').skip(2).map(|x| x.parse().unwrap()).collect();
        assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
        assert!((v[2] - 1.8 / 36.0).abs() < 1e-12);
    }
}

#[test]
fn err_maps_writes_one_panel_per_grid_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let o = out(dir.path(), "e");
    let outcome = run_cli(["beamhom", "err-maps", "--n", "5,7", "--rho-star", "1,100", "--format", "csv,svg", "--out", &o]).unwrap();
    assert!(outcome.summary.contains("4 panels"), "{}", outcome.summary);
    let summary = fs::read_to_string(dir.path().join("e/err_maps_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4 * 6);
    for k in 0..3 {
        let svg = fs::read_to_string(dir.path().join(format!("e/err{k}.svg"))).unwrap();
        assert!(svg.starts_with("<svg"));
    }
}

#[test]
fn diff_sweep_flags_override_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = out(dir.path(), "d");
    run_cli(["beamhom", "diff-sweep", "--preset", "paper-fig3", "--n", "4,8", "--rho-star", "1", "--format", "json", "--out", &o])
        .unwrap();
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("d/diff_sweep.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["pair"], "discrete-km");
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert!(!dir.path().join("d/diff_sweep.csv").exists());
}

#[test]
fn config_file_sits_between_preset_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n_list = [4, 8, 16, 32]\nrho_star_list = [2.0]\nformats = [\"csv\"]\n").unwrap();
    let o = out(dir.path(), "c");
    run_cli(["beamhom", "convergence", "--config", cfg.to_str().unwrap(), "--rho-star", "3", "--out", &o]).unwrap();
    let csv = fs::read_to_string(dir.path().join("c/convergence.csv")).unwrap();
    let ns: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["4", "8", "16", "32"]);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("3")));
}

#[test]
fn invalid_inputs_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = out(dir.path(), "x");
    let cases: [&[&str]; 6] = [
        &["beamhom", "diff-sweep", "--n", "8,4"],
        &["beamhom", "diff-sweep", "--rho-star", "-1"],
        &["beamhom", "solve", "--n", "4", "--load", "0,0,1,0,0"],
        &["beamhom", "solve", "--n", "4", "--load", "3,0,1,0,0"],
        &["beamhom", "err-maps", "--preset", "paper-fig2"],
        &["beamhom", "diff-sweep", "--lattice", "rectangular", "--model", "km"],
    ];
    let fields = ["n_list", "rho_star_list", "loads", "loads", "preset", "model"];
    for (args, field) in cases.iter().zip(fields) {
        let mut a: Vec<&str> = args.to_vec();
        a.extend(["--out", &o]);
        let err = run_cli(a).unwrap_err();
        assert!(format!("{err:#}").contains(&format!("invalid `{field}`")), "{args:?}: {err:#}");
    }
    assert!(run_cli(["beamhom", "verify", "--format", "png", "--out", &o]).is_err());
    assert!(!dir.path().join("x").exists());
}
