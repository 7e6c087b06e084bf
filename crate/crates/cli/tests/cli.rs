use std::path::Path;
use std::process::{Command, Output};

fn wntlab(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wntlab"))
        .args(args)
        .env("WNTLAB_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const EUCLIDEAN_DUALITY: &str = r#"{
  "experiment": "duality_check",
  "name": "quick",
  "sampling": { "samples": 50, "pairs": 200, "oracle_points": 2, "oracle_samples": 101 }
}"#;

#[test]
fn euclidean_duality_exits_zero_with_a_clean_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "a.json", EUCLIDEAN_DUALITY);
    let out = wntlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = wnt_lab::Manifest::read(&tmp.path().join("quick").join("run-manifest.json")).unwrap();
    assert_eq!(m.violations(), 0);
    assert!(tmp.path().join("quick/duality.csv").exists());
}

#[test]
fn out_flag_overrides_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "a.json", EUCLIDEAN_DUALITY);
    let other = tmp.path().join("elsewhere");
    let out = wntlab(&["run", &cfg, "--out", other.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(other.join("quick/run-manifest.json").exists());
}

#[test]
fn negative_eps_is_a_schema_error_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        r#"{ "experiment": "gl_relax", "physics": { "eps": -0.1 } }"#,
    );
    let out = wntlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("physics.eps"));
}

#[test]
fn unknown_field_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", r#"{ "experiment": "dirichlet", "domian": {} }"#);
    let out = wntlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_three_and_still_writes_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // a solver budget of one iteration cannot converge
    let cfg = write(
        tmp.path(),
        "hard.json",
        r#"{
  "experiment": "dirichlet",
  "name": "starved",
  "domain": { "dim": 2, "resolution": 32 },
  "solver": { "max_iter": 1 }
}"#,
    );
    let out = wntlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let m = wnt_lab::Manifest::read(&tmp.path().join("starved/run-manifest.json")).unwrap();
    assert_eq!(m.status, wnt_lab::RunStatus::Error);
}

#[test]
fn report_needs_arguments() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wntlab(&["report"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mixed_report_is_nonzero_and_prints_every_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "a.json", EUCLIDEAN_DUALITY);
    assert_eq!(wntlab(&["run", &cfg], tmp.path()).status.code(), Some(0));
    let good = tmp.path().join("quick/run-manifest.json");
    let mut m = wnt_lab::Manifest::read(&good).unwrap();
    m.name = "broken".into();
    m.checks[0].passed = false;
    let bad_dir = tmp.path().join("broken");
    std::fs::create_dir_all(&bad_dir).unwrap();
    m.write(&bad_dir).unwrap();
    let missing = tmp.path().join("nope.json");

    let csv = tmp.path().join("summary.csv");
    let out = wntlab(
        &[
            "report",
            good.to_str().unwrap(),
            bad_dir.to_str().unwrap(),
            missing.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_ne!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("quick") && stdout.contains("PASS"));
    assert!(stdout.contains("broken") && stdout.contains("FAIL"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 3);
}

#[test]
fn passing_report_exits_zero_and_writes_default_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "a.json", EUCLIDEAN_DUALITY);
    assert_eq!(wntlab(&["run", &cfg], tmp.path()).status.code(), Some(0));
    let dir = tmp.path().join("quick");
    let out = wntlab(&["report", dir.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("report.csv").exists());
}

#[test]
fn shipped_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        wnt_lab::ScenarioConfig::load(&p).unwrap_or_else(|e| panic!("{e}"));
        n += 1;
    }
    assert!(n >= 17);
}
