use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lvspde_cli::{execute, CliError, Experiment, Flags};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lvspde"));
    c.env_remove("LVSPDE_OUT_DIR");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

const SMALL_MODEL: &str = r#"
[run]
name = "small"
n_paths = 8

[model]
grid_size = 16
m1 = 1.0
m2 = 1.0
a1 = 1.0
a2 = 1.0
b1 = 0.5
b2 = 0.5
sigma1 = 0.5
sigma2 = 0.5
u0 = "0.5 + 0.25*cos(pi*x)"
v0 = 0.5

[solver]
scheme = "finite-difference"
dt = 1e-3
horizon = 0.2
snapshot_interval = 0.05

[noise]
representation = "sheet"
master_seed = 9
"#;

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn every_shipped_config_loads() {
    let mut n = 0;
    for e in fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            Experiment::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 12, "only {n} configs");
}

#[test]
fn type_error_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_MODEL.replace("dt = 1e-3", "dt = \"fast\"");
    let line = body.lines().position(|l| l.starts_with("dt =")).unwrap() + 1;
    let cfg = write(dir.path(), "bad.toml", &body);
    let out = run(&["simulate"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(&format!("bad.toml:{line}:")), "{err}");
}

#[test]
fn semantic_error_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_MODEL.replace("grid_size = 16", "grid_size = 0");
    let line = body
        .lines()
        .position(|l| l.starts_with("grid_size"))
        .unwrap()
        + 1;
    let cfg = write(dir.path(), "bad.toml", &body);
    match Experiment::load(&cfg) {
        Err(CliError::Config {
            line: Some(l),
            message,
            ..
        }) => {
            assert_eq!(l, line);
            assert!(message.contains("grid_size"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
    let body = SMALL_MODEL.replace("u0 = \"0.5 + 0.25*cos(pi*x)\"", "u0 = \"cos(pi*x)\"");
    let line = body.lines().position(|l| l.starts_with("u0")).unwrap() + 1;
    let cfg = write(dir.path(), "neg.toml", &body);
    match Experiment::load(&cfg) {
        Err(CliError::Config { line: Some(l), .. }) => assert_eq!(l, line),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unknown_key_is_rejected_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_MODEL.replace("horizon = 0.2", "horizon = 0.2\nhorizn = 1.0");
    let line = body.lines().position(|l| l.starts_with("horizn")).unwrap() + 1;
    let cfg = write(dir.path(), "bad.toml", &body);
    match Experiment::load(&cfg) {
        Err(CliError::Config {
            line: Some(l),
            message,
            ..
        }) => {
            assert_eq!(l, line);
            assert!(message.contains("horizn"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn bad_expression_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_MODEL.replace("m2 = 1.0", "m2 = \"1 + \"");
    let line = body.lines().position(|l| l.starts_with("m2")).unwrap() + 1;
    let cfg = write(dir.path(), "bad.toml", &body);
    match Experiment::load(&cfg) {
        Err(CliError::Config { line: Some(l), .. }) => assert_eq!(l, line),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["ensemble"], &dir.path().join("absent.toml"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("absent.toml"));
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    let out = bin().arg("simulate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn command_without_its_table_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_MODEL);
    let out = run(&["holder"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_MODEL);
    for cmd in ["simulate", "ensemble"] {
        let a = dir.path().join(format!("{cmd}_a"));
        let b = dir.path().join(format!("{cmd}_b"));
        assert_eq!(
            run(&[cmd, "--reproducible"], &cfg, &a).status.code(),
            Some(0)
        );
        assert_eq!(
            run(&[cmd, "--reproducible"], &cfg, &b).status.code(),
            Some(0)
        );
        let (fa, fb) = (files_of(&a), files_of(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{cmd} outputs differ");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_MODEL);
    let a = dir.path().join("one");
    let b = dir.path().join("four");
    run(&["ensemble", "--reproducible", "--threads", "1"], &cfg, &a);
    run(&["ensemble", "--reproducible", "--threads", "4"], &cfg, &b);
    assert_eq!(files_of(&a), files_of(&b));
}

#[test]
fn seed_override_changes_output_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_MODEL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&["simulate", "--reproducible"], &cfg, &a);
    run(&["simulate", "--reproducible", "--seed", "10"], &cfg, &b);
    let sa = fs::read_to_string(a.join("simulate.ndjson")).unwrap();
    let sb = fs::read_to_string(b.join("simulate.ndjson")).unwrap();
    assert!(sa.lines().next().unwrap().contains("\"seed\":9"));
    assert!(sb.lines().next().unwrap().contains("\"seed\":10"));
    assert_eq!(
        sa.lines().nth(1),
        sb.lines().nth(1),
        "initial snapshots agree"
    );
    assert_ne!(sa.lines().last(), sb.lines().last());
}

#[test]
fn headers_carry_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_MODEL);
    let out = dir.path().join("o");
    run(&["ensemble", "--paths", "3"], &cfg, &out);
    let text = fs::read_to_string(out.join("ensemble.csv")).unwrap();
    let exp = Experiment::load(&cfg).unwrap();
    assert!(text.contains(&format!("# config_sha256 {}", exp.hash)));
    assert!(text.contains("# seed 9"));
    assert!(text.contains(&format!("# version lvspde {}", env!("CARGO_PKG_VERSION"))));
    let runtime = text
        .lines()
        .find(|l| l.starts_with("# runtime_s "))
        .unwrap();
    assert!(runtime[12..].parse::<f64>().is_ok(), "{runtime}");
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "time,mean_lnmassU,mean_lnmassV,mean_supnorm_p,se_lnmassU,se_lnmassV,se_supnorm_p,n_paths"
    );
    assert_eq!(rows.len(), 1 + 5);
    assert!(rows[1..].iter().all(|r| r.ends_with(",3")));
}

#[test]
fn output_dir_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_MODEL);
    let env_out = dir.path().join("from_env");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .env("LVSPDE_OUT_DIR", &env_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(env_out.join("simulate.ndjson").exists());
    assert!(env_out.join("verdicts.csv").exists());
}

#[test]
fn zero_initial_data_gives_zero_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_MODEL
        .replace("u0 = \"0.5 + 0.25*cos(pi*x)\"", "u0 = 0.0")
        .replace("v0 = 0.5", "v0 = 0.0");
    let cfg = write(dir.path(), "z.toml", &body);
    let out = dir.path().join("o");
    assert!(run(&["simulate"], &cfg, &out).status.success());
    let text = fs::read_to_string(out.join("simulate.ndjson")).unwrap();
    let mut n = 0;
    for line in text.lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["U", "V"] {
            assert!(v[key]
                .as_array()
                .unwrap()
                .iter()
                .all(|x| x.as_f64() == Some(0.0)));
        }
        n += 1;
    }
    assert_eq!(n, 5);
}

#[test]
fn snapshot_lines_have_time_and_both_species() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL_MODEL);
    let out = dir.path().join("o");
    run(&["simulate"], &cfg, &out);
    let text = fs::read_to_string(out.join("simulate.ndjson")).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first["meta"]["config_sha256"].is_string());
    let times: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| {
            assert!(l.starts_with("{\"t\":"));
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            assert_eq!(v["U"].as_array().unwrap().len(), 16);
            assert_eq!(v["V"].as_array().unwrap().len(), 16);
            v["t"].as_f64().unwrap()
        })
        .collect();
    assert_eq!(times.len(), 5);
    assert!((times[4] - 0.2).abs() < 1e-12);
}

#[test]
fn zero_tolerance_makes_kernel_check_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "k.toml",
        "[run]\nname = \"k\"\n\n[kernel_check]\ntolerance = 0.0\nlattice = 4\nsweep_points = 2\n",
    );
    let out = dir.path().join("o");
    let o = run(&["kernel-check"], &cfg, &out);
    assert_eq!(o.status.code(), Some(1));
    let verdicts = fs::read_to_string(out.join("verdicts.csv")).unwrap();
    assert!(verdicts
        .lines()
        .any(|l| l.starts_with("kernel_representation_agreement,") && l.contains(",false,")));
    assert!(verdicts.contains("kernel_mass_conservation,neumann heat kernel,true"));
}

#[test]
fn zero_integrand_rows_are_exact_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "n.toml",
        "[run]\nname = \"n\"\n\n[noise_check]\nn_reps = 200\nfunctions = [\"0\", \"cos(pi*x)\"]\n",
    );
    let flags = Flags {
        config: Some(cfg),
        out: Some(dir.path().join("o")),
        reproducible: true,
        ..Flags::default()
    };
    let outcome = execute(lvspde_cli::Command::NoiseCheck, &flags).unwrap();
    let text = fs::read_to_string(outcome.dir.join("noise_check.csv")).unwrap();
    let zero_rows: Vec<&str> = text.lines().filter(|l| l.starts_with("0,")).collect();
    assert_eq!(zero_rows.len(), 2);
    for r in zero_rows {
        let cols: Vec<&str> = r.split(',').collect();
        assert_eq!(&cols[3..7], &["0", "0", "0", "0"], "{r}");
        assert_eq!(cols[7], "true");
    }
    let again = execute(lvspde_cli::Command::NoiseCheck, &flags).unwrap();
    assert_eq!(
        fs::read(again.dir.join("noise_check.csv")).unwrap(),
        text.into_bytes()
    );
}

#[test]
fn logistic_oracle_table_is_matched() {
    let dir = tempfile::tempdir().unwrap();
    let flags = Flags {
        config: Some(configs().join("c04_logistic.toml")),
        out: Some(dir.path().to_path_buf()),
        ..Flags::default()
    };
    let outcome = execute(lvspde_cli::Command::Simulate, &flags).unwrap();
    let v = outcome
        .report
        .verdicts
        .iter()
        .find(|v| v.check == "oracle_max_error")
        .unwrap();
    assert!(v.pass && v.statistic < 5e-3, "{v:?}");
    assert!(outcome.written.iter().any(|p| p.ends_with("oracle.csv")));
}
