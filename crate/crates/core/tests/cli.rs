use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn escrate(dir: &Path, config: Option<&str>, args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_escrate"));
    cmd.args(args).env_remove("ESCRATE_THREADS");
    if let Some(text) = config {
        let path = dir.join("run.ini");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    Run {
        code: status.code().unwrap(),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn run(config: &str, args: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    escrate(dir.path(), Some(config), args, &[])
}

fn field(line: &str, i: usize) -> f64 {
    line.split(',').nth(i).unwrap().parse().unwrap()
}

#[test]
fn rate_diri1_row() {
    let r = run("[model]\ncase = diri1\nfamily = constant\nn = 2\n[solver]\nt_grid = 100\n", &["rate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "t,psi,psi_tilde");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1.0000000000000000e2,"));
    // Constant coefficient: both radii coincide.
    assert_eq!(field(lines[1], 1), field(lines[1], 2));
}

#[test]
fn empty_grid_prints_header_only() {
    let r = run("[model]\nfamily = constant\n", &["rate"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout, "t,psi,psi_tilde\n");
}

#[test]
fn finite_total_integral_exits_3() {
    let r = run("[model]\nfamily = power\nalpha = 3\nn = 2\n[solver]\nt_grid = 1, 10\n", &["rate"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("FiniteTotalIntegral"), "{}", r.stderr);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = escrate(dir.path(), None, &["rate", "--config", "/nonexistent/escrate.ini"], &[]);
    assert_eq!(missing.code, 2);
    assert!(missing.stderr.contains("ConfigError"));

    let unknown = run("[model]\nfamily = constant\nspeed = 3\n", &["rate"]);
    assert_eq!(unknown.code, 2);
    assert!(unknown.stderr.contains("speed"), "{}", unknown.stderr);

    let bad_section = run("[plots]\nx = 1\n", &["conserve"]);
    assert_eq!(bad_section.code, 2);

    let no_config = escrate(dir.path(), None, &["simulate"], &[]);
    assert_eq!(no_config.code, 2);

    let bad_flag = escrate(dir.path(), None, &["rate", "--bogus"], &[]);
    assert_eq!(bad_flag.code, 2);
}

#[test]
fn bad_thread_cap_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let r = escrate(dir.path(), None, &["catalogue"], &[("ESCRATE_THREADS", "zero")]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("ESCRATE_THREADS"));
}

#[test]
fn conserve_lines() {
    let power = run("[model]\nfamily = power\nalpha = 0\n", &["conserve"]);
    assert_eq!(power.code, 0);
    assert_eq!(power.stdout, "verdict=Conservative family=power params=alpha=0\n");
    let log = run("[model]\nfamily = squared_log\nbeta = 2\n", &["conserve"]);
    assert!(log.stdout.starts_with("verdict=NonConservative family=squared_log "), "{}", log.stdout);
    let tab = run("[model]\nfamily = tabulated\nradii = 0, 1, 10, 100\nvalues = 1, 2, 5, 9\n", &["conserve"]);
    assert_eq!(tab.code, 0, "{}", tab.stderr);
    assert!(tab.stdout.starts_with("verdict=Inconclusive family=tabulated "), "{}", tab.stdout);
    assert!(tab.stdout.contains(" leaning="), "{}", tab.stdout);
}

#[test]
fn deterministic_ode_rows() {
    let r = run(
        "[simulation]\ndrift = constant:1\nsigma = 0\nx0 = 3\nhorizon = 2\ndt = 1\n",
        &["simulate"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let xs: Vec<f64> = r.stdout.lines().skip(1).map(|l| field(l, 3)).collect();
    assert_eq!(xs, [3.0, 4.0, 5.0]);
    assert_eq!(r.stdout.lines().next(), Some("path,step,t,x"));
}

#[test]
fn non_finite_state_exits_4() {
    let r = run("[simulation]\ndrift = power:1:3\nx0 = 10\nhorizon = 10\ndt = 0.5\n", &["simulate"]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("NonFiniteState"), "{}", r.stderr);
}

#[test]
fn simulate_is_byte_identical_across_threads() {
    let cfg = "[model]\nmanifold = hyperbolic\nn = 2\n[simulation]\nhorizon = 2\ndt = 0.01\nn_paths = 300\nseed = 5\n";
    let dir = TempDir::new().unwrap();
    let a = escrate(dir.path(), Some(cfg), &["simulate"], &[("ESCRATE_THREADS", "1")]);
    let b = escrate(dir.path(), Some(cfg), &["simulate"], &[("ESCRATE_THREADS", "3")]);
    let c = escrate(dir.path(), Some(cfg), &["simulate"], &[]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn seed_flag_overrides_config() {
    let cfg = "[simulation]\ndrift = constant:0\nhorizon = 1\ndt = 0.1\nn_paths = 3\nseed = 1\noutput = summary\n";
    let base = run(cfg, &["simulate"]);
    let same = run(&cfg.replace("seed = 1", "seed = 2"), &["simulate"]);
    let flagged = run(cfg, &["simulate", "--seed", "2"]);
    assert_ne!(base.stdout, same.stdout);
    assert_eq!(same.stdout, flagged.stdout);
}

#[test]
fn hyperbolic_summary_escapes_linearly() {
    let r = run(
        "[model]\nmanifold = hyperbolic\nn = 2\ncurvature = 1\n[simulation]\nhorizon = 50\ndt = 0.01\nn_paths = 1000\nfloor = 0.1\noutput = summary\n",
        &["simulate"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let finals: Vec<f64> = r.stdout.lines().skip(1).map(|l| field(l, 1)).collect();
    assert_eq!(finals.len(), 1000);
    let speed = finals.iter().sum::<f64>() / 1000.0 / 50.0;
    assert!((speed - 1.0).abs() <= 0.1, "{speed}");
}

#[test]
fn barrier_exit_times_in_summary() {
    let r = run(
        "[simulation]\ndrift = constant:1\nsigma = 0\nx0 = 0\nfloor = 0\nhorizon = 5\ndt = 1\nbarrier = 2.5\noutput = summary\n",
        &["simulate"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().nth(1), Some("0,5.0000000000000000e0,3.0000000000000000e0"));
}

#[test]
fn compare_identical_drifts_passes() {
    let r = run(
        "[simulation]\nx0 = 1\ndt = 0.01\nn_paths = 500\nhorizon = 1\n[verify]\ndominating = bessel:1\ndominated = bessel:1\nt = 1\ndelta = 0.5\nradius = 5\n",
        &["verify", "compare"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("coupled_dominance_fraction,1.0000000000000000e0"));
    assert!(r.stderr.starts_with("PASS "), "{}", r.stderr);
}

#[test]
fn compare_rejects_misordered_drifts() {
    let r = run(
        "[simulation]\nx0 = 1\ndt = 0.01\nn_paths = 10\nhorizon = 1\n[verify]\ndominating = constant:0\ndominated = constant:1\nt = 1\ndelta = 0.5\nradius = 5\n",
        &["verify", "compare"],
    );
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("DriftOrderViolated"), "{}", r.stderr);
}

#[test]
fn dyadic_passes_on_diri1() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("dyadic.csv");
    let r = escrate(
        dir.path(),
        Some("[model]\nfamily = constant\nn = 2\n[verify]\ndyadic_levels = 30\n"),
        &["verify", "dyadic", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("PASS sum_bound="), "{}", r.stdout);
    let sum: f64 = r.stdout["PASS sum_bound=".len()..].split_whitespace().next().unwrap().parse().unwrap();
    assert!(sum.is_finite());
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().next(), Some("n,R_n,r_n,t_n,T_n,bound,partial_sum,check,summand"));
    assert_eq!(csv.lines().count(), 31);
    assert!(csv.lines().skip(1).all(|l| field(l, 7) >= 0.0));
}

#[test]
fn envelope_zero_sentinel_fails_with_fraction_one() {
    let r = run(
        "[simulation]\ndrift = constant:0\nx0 = 1\nhorizon = 20\ndt = 0.1\nn_paths = 50\n[solver]\nrate = zero\n",
        &["verify", "envelope"],
    );
    assert_eq!(r.code, 5, "{}", r.stderr);
    assert!(r.stderr.starts_with("FAIL C=8 exceedance=1 "), "{}", r.stderr);
}

#[test]
fn envelope_infinite_sentinel_passes() {
    let r = run(
        "[simulation]\ndrift = constant:0\nx0 = 1\nhorizon = 20\ndt = 0.1\nn_paths = 50\n[solver]\nrate = infinity\n",
        &["verify", "envelope", "--quiet"],
    );
    assert_eq!(r.code, 0);
    assert!(r.stderr.is_empty());
    assert!(r.stdout.lines().skip(1).all(|l| field(l, 1) == 0.0));
}

#[test]
fn lil_mode_reports_nested_fractions() {
    let r = run("[simulation]\nhorizon = 100\ndt = 0.1\nn_paths = 400\n", &["verify", "lil"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let fr: Vec<f64> = r.stdout.lines().skip(1).map(|l| field(l, 1)).collect();
    assert_eq!(fr.len(), 4);
    assert!(fr.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn catalogue_lists_standard_cases() {
    let dir = TempDir::new().unwrap();
    let r = escrate(dir.path(), None, &["catalogue"], &[]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.lines().next(), Some("case,params,t,psi,psi_tilde"));
    assert!(r.stdout.contains("\ndiri1,,1.0000000000000000e2,"));
}
