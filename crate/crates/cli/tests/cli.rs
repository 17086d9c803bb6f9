use std::path::Path;
use std::process::{Command, Output};

fn nlac(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlac"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("NLAC_OUT_DIR")
        .output()
        .expect("nlac runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_E2: &str = "eps = 0.02\nT = 1\ngrid.points = 32\ngrid.transverse_points = 8\n";

#[test]
fn compare_writes_a_series_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e2.cfg", SMALL_E2);
    let o = nlac(dir.path(), &["compare", "E2", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run = dir.path().join("compare_E2_westervelt_eps_0.02");
    let series = nlac_core::harness::read_error_series(&run.join("series.csv")).unwrap();
    assert_eq!(series.eps, 0.02);
    assert!(series.len() > 10);
    let manifest = nlac_core::harness::Manifest::read(&run.join("manifest.json")).unwrap();
    assert_eq!(manifest.config["grid.points"], "32");
    assert!(manifest.outputs.contains(&"series.csv".to_string()));
    assert!(String::from_utf8_lossy(&o.stdout).contains("manifest.json"));
}

#[test]
fn identity_reports_its_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlac(dir.path(), &["identity", "kzk", "--levels", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("identity_kzk/identity_kzk.csv")).unwrap();
    assert!(csv.starts_with("kind,points,step,max_defect,l2_defect,order"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn sweep_writes_one_series_per_eps_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("experiment = E2\neps_list = 0.04, 0.02, 0.01\nworkers = 2\n{SMALL_E2}");
    let cfg = write_config(dir.path(), "sweep.cfg", &text);
    let o = nlac(dir.path(), &["sweep", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run = dir.path().join("sweep_E2_westervelt");
    let summary = std::fs::read_to_string(run.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    for eps in ["0.04", "0.02", "0.01"] {
        assert!(run.join(format!("series_eps_{eps}.csv")).exists());
    }
}

#[test]
fn dispersion_writes_one_row_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "d.cfg", "experiment = dispersion\n");
    let o = nlac(dir.path(), &["dispersion", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("dispersion/dispersion.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.cfg");
    let bad_key = write_config(dir.path(), "bad.cfg", "bogus = 1\n");
    let bad_eps = write_config(dir.path(), "eps.cfg", "eps = 0.7\n");
    let other = write_config(dir.path(), "other.cfg", "experiment = E1\n");
    let cases: Vec<Vec<&str>> = vec![
        vec!["compare", "E2", "--config", missing.to_str().unwrap()],
        vec!["compare", "E2", "--config", &bad_key],
        vec!["compare", "E2", "--config", &bad_eps],
        vec!["compare", "E2", "--config", &other],
        vec!["compare", "E7", "--config", &bad_key],
        vec!["identity", "kzk", "--levels", "9"],
        vec!["simulate", "burgers"],
        vec!["sweep", "--config", &other],
    ];
    for args in cases {
        let o = nlac(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    let o = nlac(dir.path(), &["compare", "E2", "--config", &bad_key]);
    assert!(stderr(&o).contains("accepted keys"));
}

#[test]
fn solver_aborts_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "big.cfg",
        "amplitude = 10\neps = 0.4\nT = 2\ngrid.points = 32\ngrid.transverse_points = 8\n",
    );
    let o = nlac(dir.path(), &["simulate", "kuznetsov", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("quasilinear"));
}
