use std::path::Path;
use std::process::{Command, Output};

fn rsma(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsma")).args(args).current_dir(dir).env_remove("RSMA_JOBS").output().unwrap()
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn unknown_flag_prints_usage_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--bogus"][..], &["sweep", "--frobnicate"], &["launch"]] {
        let out = rsma(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(text(&out.stderr).contains("Usage"), "{args:?}: {}", text(&out.stderr));
    }
    let help = rsma(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    for sub in ["sweep", "dof", "optimize", "codec-selftest", "emit-plot"] {
        assert!(text(&help.stdout).contains(sub));
    }
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sweep", "--set", "colour=blue"][..],
        &["sweep", "--set", "alpha"],
        &["sweep", "--set", "alpha=2.5"],
        &["sweep", "--config", "missing.cfg"],
        &["dof", "--set", "snr_db=[0, 10]"],
    ] {
        let out = rsma(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", text(&out.stderr));
        assert!(!text(&out.stderr).is_empty());
    }
}

#[test]
fn runtime_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = rsma(&["emit-plot", "nothing.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(dir.path().join("bad.csv"), "not,a,result\n").unwrap();
    assert_eq!(rsma(&["emit-plot", "bad.csv"], dir.path()).status.code(), Some(2));
}

#[test]
fn codec_selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rsma(&["codec-selftest"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("0 decode failures"));
}

#[test]
fn sweep_output_is_independent_of_jobs_flag_and_variable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig2.cfg");
    let cfg = cfg.to_str().unwrap();
    let base = ["sweep", "--config", cfg, "--set", "trials=3", "--set", "snr_db=[5, 25]"];
    let a = rsma(&[&base[..], &["--out", "a/out.csv", "--jobs", "1"]].concat(), dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", text(&a.stderr));
    let b = Command::new(env!("CARGO_BIN_EXE_rsma"))
        .args([&base[..], &["--out", "b.csv"]].concat())
        .env("RSMA_JOBS", "3")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(b.status.code(), Some(0));
    let ca = std::fs::read(dir.path().join("a/out.csv")).unwrap();
    let cb = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(ca, cb);
    let csv = text(&ca);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("strategy,snr_db,alpha,r0,mode,trials,sum_rate,throughput,ci95,seed,fingerprint"));
    assert_eq!(lines.count(), 3 * 2);
    assert!(dir.path().join("a/out.csv.ndjson").exists());
}

#[test]
fn seed_flag_beats_set_and_changes_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["sweep", "--set", "mode=\"shannon\"", "--set", "trials=2", "--set", "snr_db=[10]", "--set", "seed=4"];
    assert_eq!(rsma(&[&common[..], &["--out", "x.csv"]].concat(), dir.path()).status.code(), Some(0));
    assert_eq!(rsma(&[&common[..], &["--out", "y.csv", "--seed", "5"]].concat(), dir.path()).status.code(), Some(0));
    let rows = |f: &str| text(&std::fs::read(dir.path().join(f)).unwrap());
    let (x, y) = (rows("x.csv"), rows("y.csv"));
    let field = |csv: &str, i: usize| csv.lines().nth(1).unwrap().split(',').nth(i).unwrap().to_string();
    assert_eq!(field(&x, 9), "4");
    assert_eq!(field(&y, 9), "5");
    assert_ne!(field(&x, 10), field(&y, 10));
}

#[test]
fn qos_config_runs_and_records_floor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig3.cfg");
    let out = rsma(&["sweep", "--config", cfg.to_str().unwrap(), "--set", "trials=2", "--set", "snr_db=[0, 30]", "--out", "f3.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = text(&std::fs::read(dir.path().join("f3.csv")).unwrap());
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[3], "0.1");
        assert!(f[4] == "lls" || f[4].starts_with("lls[infeasible="), "{line}");
    }
}

#[test]
fn emit_plot_writes_series_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = rsma(&["sweep", "--set", "trials=2", "--set", "snr_db=[0, 10, 20]", "--out", "r.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let out = rsma(&["emit-plot", "r.csv", "--out", "fig"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    for name in ["rsma.dat", "sdma.dat", "noma.dat", "plot.py"] {
        assert!(dir.path().join("fig").join(name).exists(), "{name}");
    }
    let series = text(&std::fs::read(dir.path().join("fig/rsma.dat")).unwrap());
    let snrs: Vec<&str> = series.lines().skip(1).map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(snrs, ["0", "10", "20"]);
}

#[test]
fn dof_uses_high_snr_grid_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = rsma(&["dof", "--set", "trials=4", "--set", "alpha=1.0", "--out", "d.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("sdma: slope") && stdout.contains("rsma: slope"), "{stdout}");
    let csv = text(&std::fs::read(dir.path().join("d.csv")).unwrap());
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(4) == Some("dof")));
}

#[test]
fn optimize_prints_json_for_each_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out = rsma(&["optimize", "--snr", "15", "--trial", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let s = v["strategies"].as_array().unwrap();
    assert_eq!(s.len(), 3);
    assert_eq!(s[0]["strategy"], "rsma");
    let rates: Vec<f64> = s.iter().map(|x| x["held_out_sum_rate"].as_f64().unwrap()).collect();
    assert!(rates.iter().all(|r| *r > 0.0));
    assert_eq!(v["trial"], 3);
}
