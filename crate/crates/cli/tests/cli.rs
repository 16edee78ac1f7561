use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bellnet_cli::report::{RunReport, Status};

fn network(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("networks").join(name)
}

fn bellnet(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bellnet"));
    cmd.args(args).env_remove("BELLNET_DENSE_CAP");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn report(out: &Output) -> RunReport {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn path(name: &str) -> String {
    network(name).to_string_lossy().into_owned()
}

#[test]
fn bounds_for_two_quantum_sources() {
    let out = bellnet(&["bounds", "--ma", "2", "--uvw", "0,2,0", "--p", "0.5"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.schema, 1);
    assert!((r.bounds["b_max"] - 8f64.sqrt()).abs() < 1e-12);
}

#[test]
fn bounds_rejects_split_of_wrong_size() {
    let out = bellnet(&["bounds", "--ma", "3", "--uvw", "0,2,0"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_reports_single_particle_b_observer() {
    let out = bellnet(&["validate", &path("bad-nb1.json")], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_B ≥ 2 violated"));
    let r = report(&out);
    assert_eq!(r.verdicts[0].status, Status::Fail);
}

#[test]
fn bruteforce_star_reaches_linear_bound() {
    let out = bellnet(&["bruteforce", &path("star2.json"), "--p", "1"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.bounds["max"], 1.0);
    assert_eq!(r.bounds["classical_bound"], 1.0);
    assert_eq!(r.details["linear_exact"], 1);
}

#[test]
fn bruteforce_mixture_prints_seed() {
    let out = bellnet(&["bruteforce", &path("star1.json"), "--p", "0.5", "--mixture", "--seed", "7"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.seed, Some(7));
    assert!((r.bounds["max"] - 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn unknown_command_is_usage_error() {
    let out = bellnet(&["frobnicate"], &[]);
    assert_eq!(out.status.code(), Some(64));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_file_fails() {
    let out = bellnet(&["operators", "/nonexistent/net.json"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn quantum_dense_check_and_sos() {
    let out = bellnet(&["quantum", &path("ghz3-star.json"), "--dense-check", "--sos"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.per_l.len(), 8);
    for row in &r.per_l {
        assert!((row.values["quantum"] - row.values["dense"]).abs() < 1e-9);
        assert!(row.values["sos_residual"] < 1e-9);
    }
    assert!(r.verdicts.iter().all(|v| v.status == Status::Pass));
}

#[test]
fn dense_cap_guard_exits_two() {
    let out = bellnet(&["quantum", &path("star3.json"), "--dense-check"], &[("BELLNET_DENSE_CAP", "4")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource guard"));
}

#[test]
fn bad_dense_cap_is_usage_error() {
    let out = bellnet(&["bounds", "--ma", "1"], &[("BELLNET_DENSE_CAP", "many")]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn sweep_finds_balanced_angles() {
    let out = bellnet(&["sweep", &path("star2.json"), "--p", "1", "--grid", "21", "--jobs", "2"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!((r.bounds["max"] - 2.0).abs() < 1e-9);
}

#[test]
fn ns_star_reaches_no_signaling_maximum() {
    let out = bellnet(&["ns", &path("ns-star2.json"), "--p", "0.5"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.details["exact_sum"], "4");
}

#[test]
fn classify_file_and_split_agree() {
    let a = report(&bellnet(&["classify", &path("hybrid-111.json"), "--p", "0.5"], &[]));
    let b = report(&bellnet(&["classify", "--uvw", "1,1,1", "--p", "0.5"], &[]));
    assert_eq!(a.bounds, b.bounds);
    assert!((a.bounds["achieved"] - a.bounds["b_max"]).abs() < 1e-9);
}

#[test]
fn operators_lists_settings_and_digest_is_stable() {
    let a = bellnet(&["operators", &path("ghz3-star.json")], &[]);
    let b = bellnet(&["operators", &path("ghz3-star.json"), "--output", "json"], &[]);
    assert_eq!(a.status.code(), Some(0));
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(ra.spec_digest, rb.spec_digest);
    assert_eq!(ra.per_l, rb.per_l);
    assert_eq!(ra.per_l[0].settings["B"], "00");
}

#[test]
fn report_round_trips_through_json() {
    let out = bellnet(&["quantum", &path("star2.json")], &[]);
    let r = report(&out);
    let again: RunReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(again, r);
}

#[test]
fn table_output_lists_verdicts() {
    let out = bellnet(&["quantum", &path("star2.json"), "--output", "table"], &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS product formula"), "{text}");
}

fn verdicts(out: &Output) -> Vec<(String, Status)> {
    report(out).verdicts.into_iter().map(|v| (v.name, v.status)).collect()
}

#[test]
fn reproduce_paper_passes_on_bundled_networks() {
    let out = bellnet(&["reproduce-paper"], &[]);
    let rows = verdicts(&out);
    assert!(rows.iter().all(|(_, s)| *s == Status::Pass), "{rows:?}");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reproduce_paper_flags_zero_angle() {
    let dir = tempfile::tempdir().unwrap();
    let doc = std::fs::read_to_string(network("star2.json")).unwrap();
    let corrupted = doc.replacen("0.7853981633974483", "0.0", 1);
    assert_ne!(doc, corrupted);
    std::fs::write(dir.path().join("star2.json"), corrupted).unwrap();
    let out = bellnet(
        &["reproduce-paper", "--networks", &dir.path().to_string_lossy()],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let rows = verdicts(&out);
    let failed: Vec<_> = rows.iter().filter(|(_, s)| *s == Status::Fail).collect();
    assert_eq!(failed.len(), 1, "{rows:?}");
    assert_eq!(failed[0].0, "validate star2.json");
}

#[test]
fn reproduce_paper_skips_rows_over_dense_cap() {
    let out = bellnet(&["reproduce-paper"], &[("BELLNET_DENSE_CAP", "4")]);
    assert_eq!(out.status.code(), Some(0));
    let rows = verdicts(&out);
    let skipped: Vec<&str> = rows
        .iter()
        .filter(|(_, s)| *s == Status::Skip)
        .map(|(n, _)| n.as_str())
        .collect();
    assert_eq!(skipped.len(), 6, "{rows:?}");
    assert!(skipped.iter().all(|n| n.starts_with("dense") || n.starts_with("sos")));
    assert!(rows.iter().all(|(_, s)| *s != Status::Fail));
}
