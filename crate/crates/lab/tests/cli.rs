use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_otb-lab"));
    c.env_remove(otb_lab::OUT_DIR_ENV);
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_only_accepts_shipped_configs() {
    for name in ["two_state", "iid", "constant_loss"] {
        let o = bin().args(["run", "--check-only"]).arg(config(name)).output().unwrap();
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
    }
}

#[test]
fn invalid_config_exits_with_1_and_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("two_state")).unwrap().replace("[0.1, 0.9]", "[0.1, 0.8]");
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text).unwrap();
    let o = bin().arg("run").arg(&path).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("row 1"), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_file_exits_with_3_and_bad_usage_with_1() {
    let o = bin().args(["run", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(code(&o), 3);
    let o = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let (env_dir, flag_dir) = (dir.path().join("env"), dir.path().join("flag"));
    let run = |extra: &[&Path]| {
        let mut c = bin();
        c.args(["run", "--replications", "2"]).arg(config("constant_loss")).env(otb_lab::OUT_DIR_ENV, &env_dir);
        for p in extra {
            c.arg("--out").arg(p);
        }
        c.output().unwrap()
    };
    assert_eq!(code(&run(&[])), 0);
    assert!(env_dir.join("summary.csv").exists());
    assert_eq!(code(&run(&[&flag_dir])), 0);
    assert!(flag_dir.join("manifest.json").exists());
}

#[test]
fn run_writes_artifacts_and_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(config("two_state"))
        .args(["--replications", "3", "--seed", "99", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4 * 3);
    assert!(!summary.contains('\r'));
    let seeds: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(&seeds[..3], ["99", "100", "101"]);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed0"], 99);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["invariant_violations"].as_array().unwrap().is_empty());
}

#[test]
fn mixing_prints_profile() {
    let o = bin().arg("mixing").arg(config("two_state")).args(["--kmax", "5"]).output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,phi,beta");
    assert_eq!(lines.len(), 6);
    let phi1: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((phi1 - 2.0 * 0.75 * 0.6).abs() <= 1e-12);
}

#[test]
fn plotdata_round_trip_and_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(config("iid"))
        .args(["--replications", "4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = bin().arg("plotdata").arg(dir.path().join("summary.csv")).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let plot = std::fs::read_to_string(dir.path().join("plot_data.csv")).unwrap();
    assert_eq!(
        plot.lines().next().unwrap(),
        "n,mean_gen,se_gen,bound_thm42_mean,bound_thm54_mean,bound_cor56,regret_over_n_mean"
    );
    assert_eq!(plot.lines().count(), 5);

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = dir.path().join("never.csv");
    let o = bin().arg("plotdata").arg(&empty).arg("--out").arg(&out).output().unwrap();
    assert_ne!(code(&o), 0);
    assert!(!out.exists());
}
