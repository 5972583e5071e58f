use std::path::Path;
use std::process::{Command, Output};

fn fbvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbvol")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const INTERVAL: &str = "problem = \"interval_1d\"\nalpha = 0.5\nepsilon_list = [0.36, 0.1]\nboundary.left = 1\ngeometry.n = 64\n";

#[test]
fn oracle1d_prints_the_minimizer() {
    let o = fbvol(&["oracle1d", "--epsilon", "0.36"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s_star,lambda_star,energy,branch"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let s: f64 = row[0].parse().unwrap();
    assert!((s - 0.6).abs() < 1e-3, "{s}");
}

#[test]
fn sweep_writes_the_table_and_run_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", INTERVAL);
    let out = dir.path().join("out");
    let o = fbvol(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("epsilon,positivity,vol_gap,lambda_mean,lambda_std,energy,iters,converged\n"));
    assert!(text.contains("# epsilon_attained = 0.1"));
    for eps in ["eps_0.36", "eps_0.1"] {
        assert!(out.join(eps).join("field.txt").exists());
    }
}

#[test]
fn solve_accepts_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", INTERVAL);
    let out = dir.path().join("out");
    let o = fbvol(&["solve", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "p=3", "--epsilon", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("summary.csv").exists());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let empty = write(dir.path(), "empty.toml", &format!("{INTERVAL}checks = []\n"));
    assert_eq!(fbvol(&["verify", "--config", &empty, "--out", out]).status.code(), Some(0));

    let flat = "problem = \"halfdisk\"\nalpha = 0.5\nepsilon_list = [0.1]\nboundary.arc = \"y\"\nflatness.n = 32\nchecks = [\"flatness\"]\n";
    let ok = write(dir.path(), "flat.toml", flat);
    let o = fbvol(&["verify", "--config", &ok, "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // no improvement is possible from an already flat start
    let o = fbvol(&["verify", "--config", &ok, "--out", out, "--set", "flatness.delta0=1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("check,status,measured,threshold,detail\n"));
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &format!("{INTERVAL}alpha_typo = 1\n"));
    let o = fbvol(&["sweep", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha_typo"));
    let o = fbvol(&["sweep", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
