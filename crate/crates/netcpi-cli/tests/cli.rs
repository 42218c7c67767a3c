//! End-to-end tests of the command-line interface: exit-code contract,
//! deterministic outputs, and the documented file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netcpi"))
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn fixture_table() -> &'static str {
    "\
#table,FIX,2014
#sectors,s1,s2
#factors,labor
#imports,m1
OMEGA,s1,s1,0.2
OMEGA,s1,s2,0.1
OMEGA,s2,s2,0.3
FACTOR,s1,labor,0.5
FACTOR,s2,labor,0.4
IMPORT,s1,m1,0.2
IMPORT,s2,m1,0.3
CONS_D,s1,,0.3
CONS_D,s2,,0.4
CONS_M,m1,,0.3
EXPORT,s1,,0.1
EXPORT,s2,,0.05
"
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn stats_emits_fixture_values_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fix.csv", fixture_table());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let result = run(&[
            "stats",
            "--input",
            input.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_success(&result);
    }
    let domar = std::fs::read_to_string(out_a.join("stats_domar.csv")).unwrap();
    assert!(domar.contains("FIX,s1,0.5,0.4,0.375"), "got: {domar}");

    // Byte-identical outputs on rerun.
    for name in [
        "stats_domar.csv",
        "stats_factor.csv",
        "stats_import.csv",
        "stats.meta.json",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn validate_reports_failures_with_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = "\
#table,BAD,2014
#sectors,s1
#factors,labor
OMEGA,s1,s1,0.55
FACTOR,s1,labor,0.5
CONS_D,s1,,1.0
";
    let input = write(dir.path(), "bad.csv", bad);
    let out = run(&[
        "validate",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_code_contract() {
    let dir = tempfile::tempdir().unwrap();

    // Usage error: unknown flag.
    let usage = run(&["simulate", "--scenario", "continental"]);
    assert_eq!(usage.status.code(), Some(3));

    // Data error: missing input file.
    let data = run(&[
        "stats",
        "--input",
        "/definitely/not/here.csv",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(data.status.code(), Some(1));

    // Numeric error: a factor nobody pays leaves its wage undetermined in
    // the share system.
    let singular = "\
#table,SGL,2014
#sectors,s1
#factors,labor,ghost
OMEGA,s1,s1,0.3
FACTOR,s1,labor,0.7
CONS_D,s1,,1.0
";
    let input = write(dir.path(), "singular.csv", singular);
    let params = write(
        dir.path(),
        "params.json",
        r#"{"theta_consumer": 1.0, "theta_producers": [1.0]}"#,
    );
    let shocks = write(dir.path(), "shocks.json", r#"{"m_hat": 0.01}"#);
    let numeric = run(&[
        "solve-shares",
        "--input",
        input.to_str().unwrap(),
        "--params",
        params.to_str().unwrap(),
        "--shocks",
        shocks.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(numeric.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&numeric.stderr);
    assert!(stderr.contains("condition"), "stderr: {stderr}");
}

#[test]
fn decompose_zero_shocks_gives_zero_series() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fix.csv", fixture_table());
    let shocks = write(
        dir.path(),
        "shocks.csv",
        "\
date,series,id,value
t0,Z,s1,0
t0,Z,s2,0
t0,PM,m1,0
t1,Z,s1,0
t1,Z,s2,0
t1,PM,m1,0
",
    );
    let out = run(&[
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--shocks",
        shocks.to_str().unwrap(),
        "--base",
        "t0",
        "--variant",
        "all",
        "--lag",
        "1",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_success(&out);
    let body = std::fs::read_to_string(dir.path().join("decompose.csv")).unwrap();
    for line in body.lines().skip(1) {
        let value = line.rsplit(',').next().unwrap();
        assert_eq!(value, "0", "nonzero value in zero-shock run: {line}");
    }
    // Three variants present.
    for variant in ["closed", "soe-no-network", "soe-network"] {
        assert!(body.contains(variant), "missing variant {variant}");
    }
}

#[test]
fn decompose_matches_fixture_price_change() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fix.csv", fixture_table());
    let shocks = write(
        dir.path(),
        "shocks.csv",
        "\
date,series,id,value
2018Q4,Z,s1,0
2018Q4,Z,s2,0
2018Q4,W,labor,0
2018Q4,PM,m1,0
2019Q1,Z,s1,0.01
2019Q1,Z,s2,0
2019Q1,W,labor,0.02
2019Q1,PM,m1,0.05
",
    );
    let out = run(&[
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--shocks",
        shocks.to_str().unwrap(),
        "--base",
        "2018Q4",
        "--variant",
        "soe-network",
        "--lag",
        "1",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_success(&out);
    let body = std::fs::read_to_string(dir.path().join("decompose.csv")).unwrap();
    assert!(
        body.contains("2019Q1,FIX,soe-network,p_hat,0.033125"),
        "got: {body}"
    );
}

#[test]
fn simulate_zero_size_writes_zero_irf() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--scenario",
        "island",
        "--shock",
        "zN",
        "--size",
        "0",
        "--horizon",
        "40",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_success(&out);
    let body = std::fs::read_to_string(dir.path().join("irf.csv")).unwrap();
    let mut rows = 0;
    for line in body.lines().skip(1) {
        for field in line.split(',').skip(1) {
            assert_eq!(field, "0", "nonzero IRF entry in zero-size run: {line}");
        }
        rows += 1;
    }
    assert_eq!(rows, 40);
}

#[test]
fn simulate_inflation_orderings_across_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let mut impact = std::collections::BTreeMap::new();
    for scenario in ["island", "network"] {
        let out_dir = dir.path().join(scenario);
        let out = run(&[
            "simulate",
            "--scenario",
            scenario,
            "--shock",
            "pM",
            "--size",
            "0.01",
            "--horizon",
            "40",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_success(&out);
        let body = std::fs::read_to_string(out_dir.join("irf.csv")).unwrap();
        let first = body.lines().nth(1).unwrap();
        let pi0: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
        impact.insert(scenario.to_string(), pi0);
    }
    assert!(impact["network"] > impact["island"]);
    assert!(impact["island"] > 0.0);
}

#[test]
fn regress_noiseless_panel_has_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "diffs.csv",
        "\
country,sector,y
AUT,agr,0.125
AUT,man,0.095
BEL,agr,0.115
BEL,man,0.085
",
    );
    let out = run(&[
        "regress",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_success(&out);
    let residuals = std::fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    for line in residuals.lines().skip(1) {
        let r: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(r.abs() < 1e-12, "nonzero residual: {line}");
    }
    let fe = std::fs::read_to_string(dir.path().join("fe.csv")).unwrap();
    assert!(fe.contains("intercept,,0.105"));
    assert!(fe.contains("sector,agr,0.015"));
}

#[test]
fn classify_emits_boolean_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "macro.csv",
        "\
country,year,cgdpo,csh_x,csh_m
AUT,2014,400,0.45,-0.41
USA,2014,17000,0.1,-0.12
",
    );
    let out = run(&[
        "classify",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_success(&out);
    let body = std::fs::read_to_string(dir.path().join("classify.csv")).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "country,year,alpha_c,openness,is_small,is_open,is_soe"
    );
    let aut = lines.next().unwrap();
    assert!(aut.starts_with("AUT,2014,"));
    assert!(aut.ends_with("true,true,true"), "got: {aut}");
    let usa = lines.next().unwrap();
    assert!(usa.ends_with("false,false,false"), "got: {usa}");
}

#[test]
fn solve_shares_routes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fix.csv", fixture_table());
    let params = write(
        dir.path(),
        "params.json",
        r#"{"theta_consumer": 1.5, "theta_producers": [0.8, 1.2]}"#,
    );
    let shocks = write(
        dir.path(),
        "shocks.json",
        r#"{"z_hat": [0.01, 0.0], "pm_hat": [0.05], "m_hat": 0.02}"#,
    );
    let out = run(&[
        "solve-shares",
        "--input",
        input.to_str().unwrap(),
        "--params",
        params.to_str().unwrap(),
        "--shocks",
        shocks.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_success(&out);
    let body = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let grab = |key: &str| -> f64 {
        body.lines()
            .find(|l| l.contains(key))
            .unwrap_or_else(|| panic!("missing {key}"))
            .rsplit(',')
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    let via_shares = grab("p_hat_factor_shares");
    let via_wages = grab("p_hat_factor_prices");
    assert!((via_shares - via_wages).abs() < 1e-8);
}
