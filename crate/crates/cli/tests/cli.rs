use std::path::Path;
use std::process::{Command, Output};

use cutofflab::table::validate_csv;

fn run_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cutofflab"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CUTOFFLAB_THREADS", t),
        None => cmd.env_remove("CUTOFFLAB_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Small-sized invocations of every subcommand producing a curve table.
const SMALL: &[&[&str]] = &[
    &["ou-curves", "--n", "10", "--t-grid", "0:3:7"],
    &["ou-profile", "--n", "10000", "--b-grid", "-1:1:3"],
    &["dou-sim", "--n", "4", "--replicas", "200", "--t-grid", "0:1:3"],
    &["equilibrium-check", "--n", "8", "--samples", "500"],
    &["matrix-check", "--n", "3", "--replicas", "200"],
    &["coupling", "parallel", "--n", "4", "--t-grid", "0:1:5"],
    &["coupling", "merge", "--n", "4", "--replicas", "100", "--dt", "0.005"],
    &["coupling", "tail", "--n", "4", "--replicas", "100", "--dt", "0.005"],
    &["cutoff-sweep", "--ns", "6", "--betas", "0,2", "--t-grid", "0:2:5", "--replicas", "200"],
];

#[test]
fn every_subcommand_emits_a_valid_table() {
    for args in SMALL {
        let o = run(args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(validate_csv(&text).unwrap() > 0, "{args:?} produced no rows");
    }
}

#[test]
fn output_is_byte_deterministic() {
    for args in SMALL {
        let seeded: Vec<&str> = args.iter().copied().chain(["--seed", "17"]).collect();
        let a = run_env(&seeded, Some("1"));
        let b = run_env(&seeded, Some("2"));
        let c = run_env(&seeded, Some("2"));
        assert_eq!(a.stdout, b.stdout, "{args:?}: thread count changed the output");
        assert_eq!(b.stdout, c.stdout, "{args:?}: repeated run changed the output");
    }
}

#[test]
fn seed_changes_monte_carlo_output() {
    let args = ["dou-sim", "--n", "4", "--replicas", "200", "--t-grid", "0:1:3"];
    let a = run(&[&args[..], &["--seed", "1"]].concat());
    let b = run(&[&args[..], &["--seed", "2"]].concat());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    // Excluded regime.
    let o = run(&["dou-sim", "--beta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    // Unknown flag and malformed grid.
    assert_eq!(run(&["ou-curves", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(run(&["ou-curves", "--t-grid", "1:2"]).status.code(), Some(2));
    // Bad thread count.
    assert_eq!(run_env(&["ou-curves", "--n", "4", "--t-grid", "1"], Some("zero")).status.code(), Some(2));
    // Missing config file.
    assert_eq!(run(&["ou-curves", "--config", "/nonexistent/cutofflab.conf"]).status.code(), Some(2));
    // Empty grid is fine: header only.
    let o = run(&["cutoff-sweep", "--t-grid", ""]);
    assert!(o.status.success());
    assert_eq!(validate_csv(&stdout(&o)).unwrap(), 0);
}

#[test]
fn config_file_defaults_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# small run\nn = 10\nt_grid = 0:1:3\n").unwrap();
    let conf = conf.to_str().unwrap();
    let from_file = run(&["ou-curves", "--config", conf]);
    let direct = run(&["ou-curves", "--n", "10", "--t-grid", "0:1:3"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, direct.stdout);
    let overridden = run(&["ou-curves", "--config", conf, "--n", "5"]);
    assert_eq!(overridden.stdout, run(&["ou-curves", "--n", "5", "--t-grid", "0:1:3"]).stdout);
}

#[test]
fn json_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves.json");
    let o = run(&["ou-curves", "--n", "10", "--t-grid", "0:1:3", "--format", "json", "--plot", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.trim_start().starts_with('['));
    let svg = std::fs::read_to_string(dir.path().join("curves.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    // --plot without --out is a usage error.
    assert_eq!(run(&["ou-curves", "--plot"]).status.code(), Some(2));
}

#[test]
fn figures_write_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figures", "--horizon", "1", "--plot", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let read = |name: &str| std::fs::read_to_string(Path::new(dir.path()).join(name)).unwrap();
    for name in ["oudou_beta0.csv", "oudou_beta2.csv"] {
        let csv = read(name);
        assert!(csv.starts_with("t,x1,x2,x3\n"));
        assert_eq!(csv.lines().count(), 102);
    }
    assert!(validate_csv(&read("hellinger.csv")).unwrap() > 0);
    let svgs = std::fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg")).count();
    assert!(svgs >= 2);
}
