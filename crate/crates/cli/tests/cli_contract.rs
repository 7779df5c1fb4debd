use std::path::Path;
use std::process::{Command, Output};

use gauss_deficit::{ReportBundle, Verdict};

fn bin(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gauss-deficit"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("GAUSS_DEFICIT_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn bundle_at(path: &Path) -> ReportBundle {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timing(mut b: ReportBundle) -> ReportBundle {
    b.timing_ms = 0.0;
    b
}

#[test]
fn passing_suite_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lsi.json");
    let o = bin(&["verify-lsi", "--beta", "0.5,2", "--count", "2", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b = bundle_at(&out);
    assert_eq!(b.reports.len(), 6);
    assert!(b.reports.iter().all(|r| r.verdict == Verdict::Pass));
    assert!(b.summary.max_abs_slack_at_extremisers.unwrap() < 1e-7);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "beta = 2\nwidth = 4\n").unwrap();
    assert_eq!(bin(&["verify-lsi", "--config", cfg.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(bin(&["verify-lsi", "--bogus"], None).status.code(), Some(2));
    assert_eq!(bin(&["no-such-command"], None).status.code(), Some(2));
    assert_eq!(bin(&["verify-beckner", "--p", "3"], None).status.code(), Some(2));
    assert_eq!(bin(&["verify-lsi", "--count", "1"], Some("zero")).status.code(), Some(2));
}

#[test]
fn failed_checks_exit_one_and_still_write() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.json");
    // far too narrow for γ_4: the mass check errors, the other item still runs
    let o = bin(
        &[
            "verify-lsi",
            "--beta",
            "4",
            "--count",
            "1",
            "--grid-lo",
            "-3",
            "--grid-hi",
            "3",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    let b = bundle_at(&out);
    assert_eq!(b.reports.len(), 2);
    assert!(b.summary.errors + b.summary.failed >= 1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("hc.json");
    std::fs::write(&cfg, "# hc run\nbeta = 4\ncount = 1\nseed = 11\ninputs = random\n").unwrap();
    let o = bin(&["verify-hc", "--config", cfg.to_str().unwrap(), "--beta", "2", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let b = bundle_at(&out);
    assert_eq!(b.config.beta, Some(vec![2.0]));
    assert_eq!((b.config.seed, b.config.count), (11, 1));
    assert_eq!(b.reports.len(), 1);
}

#[test]
fn identical_seed_gives_identical_bundle_for_any_pool_size() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o =
            bin(&["verify-talagrand", "--count", "4", "--seed", "3", "--out", out.to_str().unwrap()], Some(threads));
        assert_eq!(o.status.code(), Some(0));
        let mut b = without_timing(bundle_at(&out));
        b.config.out = None;
        b
    };
    let one = run("a.json", "1");
    assert_eq!(one, run("b.json", "4"));
    assert_eq!(one, run("c.json", "1"));
    let labels: Vec<usize> = one.reports.iter().map(|r| r.item).collect();
    assert_eq!(labels, (0..one.reports.len()).collect::<Vec<_>>());
}

#[test]
fn csv_follows_extension() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mix.csv");
    let o = bin(&["counterexample-mixture", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap().iter().next(), Some("item"));
    assert_eq!(rows.records().count(), 4);
}

#[test]
fn flow_trace_csv_has_the_series_and_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = bin(&["flow-trace", "--beta", "2", "--seed", "5", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,Q,margin,mass"));
    assert_eq!(lines.clone().filter(|l| !l.starts_with('#')).count(), 8);
    assert!(text.lines().last().unwrap().starts_with("# verdict: flow-trace"));
    assert!(text.trim_end().ends_with("pass"));
}
