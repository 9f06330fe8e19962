use std::path::Path;
use std::process::{Command, Output};

fn wavelab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsp-wavelab")).current_dir(dir).args(args).output().expect("binary runs")
}

const SHORT_RUN: [&str; 8] = ["--set", "L_dom=20", "--set", "dxi=0.1", "--set", "t_final=0.5", "--set", "report_interval=0.25"];

#[test]
fn riemann_prints_the_fan() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavelab(dir.path(), &["riemann", "--output-dir", "o", "--v-plus", "1.2", "--u-plus", "0.011697"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("v_mid"), "{text}");
    assert!(dir.path().join("o/riemann.csv").exists());
}

#[test]
fn simulate_is_deterministic() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut args = vec!["simulate", "--output-dir", "o"];
    args.extend(SHORT_RUN);
    for d in &dirs {
        let out = wavelab(d.path(), &args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dirs[0].path().join("o/report.csv")).unwrap();
    let b = std::fs::read(dirs[1].path().join("o/report.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "t_finl = 1\n").unwrap();
    let out = wavelab(dir.path(), &["simulate", "--config", "run.cfg", "--output-dir", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_finl"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn end_states_outside_the_region_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavelab(dir.path(), &["riemann", "--output-dir", "o", "--v-plus", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Γ"));
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(wavelab(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(wavelab(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn profile_and_poisson_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = wavelab(dir.path(), &["profile", "--output-dir", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("o/profile.csv").exists() && dir.path().join("o/profile_report.jsonl").exists());
    let out = wavelab(dir.path(), &["poisson-test", "--output-dir", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
