//! Binary-level contract: exit statuses, diagnostics on standard error, and
//! re-parseability of emitted artifacts by the crate's own readers.

use std::process::{Command, Output};

use disperse::cli;
use disperse::criteria::DispersionVerdict;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disperse"))
        .args(args)
        .output()
        .expect("failed to launch binary")
}

#[test]
fn verdicts_do_not_affect_exit_status() {
    // a Dies verdict is a completed computation: exit 0
    let out = run(&["criterion", "--mu", "point:1", "--nu", "det:5"]);
    assert!(out.status.success(), "{out:?}");
    let report = cli::criterion_from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.dispersion_verdict, DispersionVerdict::Dies);
    assert!((report.m.value() - 1.0).abs() < 1e-12);
}

#[test]
fn malformed_inputs_exit_nonzero_with_diagnostic() {
    for args in [
        &["criterion", "--mu", "two_point:0.5", "--nu", "exp:1"][..],
        &["criterion", "--mu", "point:1", "--nu", "exp:abc"][..],
        &["survival", "--model", "warp", "--mu", "point:1", "--nu", "exp:1"][..],
        &["sweep", "--model", "dispersion", "--mu", "point:1", "--nu", "exp:1", "--sweep", "a=2:1:0.5"][..],
        &["survival", "--model", "dispersion", "--mu", "point:1", "--nu", "exp:1", "--seed", "nope"][..],
    ] {
        let out = run(args);
        assert!(!out.status.success(), "expected failure for {args:?}");
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert!(!stderr.trim().is_empty(), "no diagnostic for {args:?}");
    }
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["survival", "--warp-speed", "9"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("--warp-speed") || stderr.contains("unexpected"), "{stderr}");
    assert!(stderr.to_lowercase().contains("usage"), "{stderr}");
}

#[test]
fn help_exits_zero_and_lists_subcommands() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for sub in ["criterion", "simulate", "survival", "sweep", "compare", "trajectory"] {
        assert!(stdout.contains(sub), "--help misses {sub}");
    }
}

#[test]
fn io_failures_carry_path_context() {
    let out = run(&[
        "criterion",
        "--mu",
        "point:1",
        "--nu",
        "exp:1",
        "--out",
        "/nonexistent-dir/report.csv",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("/nonexistent-dir/report.csv"), "{stderr}");
}

#[test]
fn sweep_diagnostics_go_to_stderr_and_rows_to_stdout() {
    let out = run(&[
        "sweep",
        "--model",
        "dispersion",
        "--mu",
        "two_point:0.5,1.5,0.8",
        "--nu",
        "exp:1",
        "--sweep",
        "p=0.5,1.5",
        "--trials",
        "20",
        "--max-gen",
        "5",
        "--pop-cap",
        "50",
    ]);
    assert!(out.status.success(), "{out:?}");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("p=1.5"), "missing rejection diagnostic: {stderr}");
    let rows = cli::sweep_from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].value, 0.5);
}

#[test]
fn emitted_artifacts_reparse_and_reserialize_identically() {
    // criterion, survival, compare, trajectory and sweep in both formats
    let criterion_csv = run(&["criterion", "--mu", "two_point:0,2,0.5", "--nu", "exp:1.5"]);
    let text = String::from_utf8(criterion_csv.stdout).unwrap();
    let report = cli::criterion_from_csv(&text).unwrap();
    assert_eq!(cli::criterion_to_csv(&report), text);

    let criterion_json = run(&[
        "criterion", "--mu", "two_point:0,2,0.5", "--nu", "exp:1", "--format", "json",
    ]);
    let text = String::from_utf8(criterion_json.stdout).unwrap();
    let report = cli::criterion_from_json(&text).unwrap();
    assert!(report.m.is_infinite());

    let survival = run(&[
        "survival", "--model", "fixed", "--rate", "0.5", "--trials", "200", "--pop-cap", "500",
    ]);
    let text = String::from_utf8(survival.stdout).unwrap();
    let estimate = cli::survival_from_csv(&text).unwrap();
    assert_eq!(cli::survival_to_csv(&estimate), text);
    // the interval is reproducible from (n_survived, n_trials) alone
    let (lo, hi) = disperse::montecarlo::wilson_interval(estimate.n_survived, estimate.n_trials);
    assert_eq!((estimate.ci_low, estimate.ci_high), (lo, hi));

    let compare = run(&[
        "compare", "--mu", "two_point:0,2,0.5", "--nu", "exp:1.5", "--trials", "50",
        "--pop-cap", "200", "--max-gen", "20",
    ]);
    let text = String::from_utf8(compare.stdout).unwrap();
    let rows = cli::compare_from_csv(&text).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(cli::compare_to_csv(&rows), text);

    let sweep = run(&[
        "sweep", "--model", "dispersion", "--mu", "two_point:0.5,1.5,0.8", "--nu", "exp:1",
        "--sweep", "a=0.6,1.0", "--trials", "50", "--pop-cap", "200", "--max-gen", "20",
        "--format", "json",
    ]);
    let text = String::from_utf8(sweep.stdout).unwrap();
    let rows = cli::sweep_from_json(&text).unwrap();
    assert_eq!(rows.len(), 2);

    let trajectory = run(&[
        "trajectory", "--model", "fixed", "--rate", "2", "--horizon", "2", "--pop-cap", "40",
    ]);
    let text = String::from_utf8(trajectory.stdout).unwrap();
    let (events, termination) = cli::trajectory_from_csv(&text).unwrap();
    assert!(!events.is_empty());
    assert_eq!(cli::trajectory_to_csv(&events, &termination), text);
}

#[test]
fn seed_random_draws_entropy() {
    let a = run(&[
        "survival", "--model", "fixed", "--rate", "2", "--trials", "50", "--pop-cap", "100",
        "--horizon", "10", "--seed", "random",
    ]);
    let b = run(&[
        "survival", "--model", "fixed", "--rate", "2", "--trials", "50", "--pop-cap", "100",
        "--horizon", "10", "--seed", "random",
    ]);
    assert!(a.status.success() && b.status.success());
    let ea = cli::survival_from_csv(&String::from_utf8(a.stdout).unwrap()).unwrap();
    let eb = cli::survival_from_csv(&String::from_utf8(b.stdout).unwrap()).unwrap();
    assert_ne!(ea.master_seed, eb.master_seed);
}
