use std::path::Path;
use std::process::Command;

fn mpfio(args: &[&str], config: &str, out: &Path) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mpfio"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .env_remove("MPFIO_OUT_DIR")
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn unit_subspace_exits_2_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (code, err) = mpfio(&["all"], "[problem]\nlayout = [1, 3]\n", &out);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("line 2"), "{err}");
    assert!(!out.exists());
}

#[test]
fn partition_check_writes_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (code, err) = mpfio(&["partition-check", "--seed", "3"], "[partition-check]\nsamples = 500\n", &out);
    assert_eq!(code, 0, "{err}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 3);
    assert_eq!(summary["pass"], true);
    assert!(out.join("partition.csv").exists());
}

#[test]
fn empty_experiment_list_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (code, err) = mpfio(&["all"], "experiments = []\n", &out);
    assert_eq!(code, 0, "{err}");
    assert!(out.join("summary.json").exists());
}
