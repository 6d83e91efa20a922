use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scf-sim"))
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml")
}

/// The default scene shrunk to 8 RBs.
fn small_config(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(default_config()).unwrap();
    let text = text
        .replace("n_rb = 133", "n_rb = 8")
        .replace("bandwidth_mhz = 25.0", "bandwidth_mhz = 1.44");
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_accepts_shipped_config() {
    let out = bin().args(["validate", "--config"]).arg(default_config()).output().unwrap();
    let stdout = ok(&out);
    assert!(stdout.contains("6 RUs, 20 UEs, 133 RBs"), "{stdout}");
}

#[test]
fn validate_rejects_bad_config() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    let text = fs::read_to_string(default_config()).unwrap().replace("ue_count = 20", "ue_count = 0");
    fs::write(&path, text).unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_config_fails() {
    let out = bin().args(["validate", "--config", "/nonexistent/scf.toml"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/scf.toml"));
}

#[test]
fn run_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("run");
    let out = bin()
        .args(["run", "--seed", "4", "--scs", "2", "--n-tti", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    let stdout = ok(&out);
    assert!(stdout.starts_with("seed 4 scs 2: RAN EE"), "{stdout}");
    for f in ["config.toml", "ran_ee.csv", "per_user_ee.csv", "cdf.csv", "o1_kpi.jsonl", "e2_cluster_config.jsonl", "summary.json"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let ran = fs::read_to_string(out_dir.join("ran_ee.csv")).unwrap();
    assert_eq!(ran.lines().count(), 2);
    assert!(ran.lines().nth(1).unwrap().starts_with("2,4,"));
}

#[test]
fn sweep_is_thread_count_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let mut dirs = Vec::new();
    for threads in ["1", "3"] {
        let dir = tmp.path().join(format!("t{threads}"));
        let out = bin()
            .args(["--threads", threads, "sweep", "--scs-list", "1..3", "--seeds", "2", "--n-tti", "2", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&dir)
            .output()
            .unwrap();
        let stdout = ok(&out);
        assert!(stdout.contains("argmax scs"), "{stdout}");
        dirs.push(dir);
    }
    for f in ["ran_ee.csv", "per_user_ee.csv", "cdf.csv", "summary.json"] {
        assert_eq!(fs::read(dirs[0].join(f)).unwrap(), fs::read(dirs[1].join(f)).unwrap(), "{f}");
    }
    let ran = fs::read_to_string(dirs[0].join("ran_ee.csv")).unwrap();
    assert_eq!(ran.lines().count(), 1 + 3 * 2);
}

#[test]
fn sweep_select_reports_choice() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = bin()
        .args(["sweep", "--rapp", "sweep_select", "--scs-list", "1,3", "--seeds", "1", "--n-tti", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("sel"))
        .output()
        .unwrap();
    let stdout = ok(&out);
    assert!(stdout.contains("rApp selected scs"), "{stdout}");
}

#[test]
fn bad_arguments_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    for args in [
        vec!["sweep", "--scs-list", "3..1"],
        vec!["sweep", "--scs-list", "0,1"],
        vec!["--threads", "0", "sweep"],
        vec!["run", "--scs", "0"],
    ] {
        let out = bin()
            .args(&args)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path().join("x"))
            .output()
            .unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
    }
}
