use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lawson(args: &[&str]) -> Output {
    lawson_env(args, &[])
}

fn lawson_env(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lawson"));
    cmd.args(args).env_remove("LAWSON_CACHE_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn lawson")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn cache_records(dir: &Path) -> usize {
    std::fs::read_to_string(dir.join("mzv-cache-v1.tsv")).map(|s| s.lines().skip(1).count()).unwrap_or(0)
}

#[test]
fn mzv_json_carries_schema_and_closed_form() {
    let v = json(&lawson(&["mzv", "--index", "-1,2", "--digits", "30"]));
    assert_eq!(v["schema"], "1");
    assert_eq!(v["weight"], 3);
    assert_eq!(v["depth"], 2);
    assert!(v["closed_form"].as_str().unwrap().contains("zeta(3)"));
    let re: f64 = v["value"]["re"].as_str().unwrap().parse().unwrap();
    let want = 1.2020569031595942 - std::f64::consts::PI.powi(2) / 4.0 * std::f64::consts::LN_2;
    assert!((re - want).abs() < 1e-14);
}

#[test]
fn omega_depth_two_matches_log_sin() {
    let v = json(&lawson(&["omega", "--word", "2,1", "--phi", "pi/3", "--digits", "30"]));
    let im: f64 = v["value"]["im"].as_str().unwrap().parse().unwrap();
    let want = 2.0 * std::f64::consts::PI * (std::f64::consts::FRAC_PI_3).sin().ln();
    assert!((im - want).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(lawson(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(lawson(&["--digits", "5", "mzv", "--index", "2"]).status.code(), Some(3));
    assert_eq!(lawson(&["ift-genus"]).status.code(), Some(3));
    assert_eq!(lawson(&["mzv", "--index", "x,y"]).status.code(), Some(3));
    assert_eq!(lawson(&["--help"]).status.code(), Some(0));
    // ζ(1) diverges.
    assert_eq!(lawson(&["mzv", "--index", "1"]).status.code(), Some(1));
    assert_eq!(lawson(&["--format", "csv", "mzv", "--index", "2"]).status.code(), Some(3));
}

#[test]
fn text_and_csv_formats() {
    let out = lawson(&["--format", "text", "--digits", "30", "mzv", "--index", "2"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.lines().any(|l| l.starts_with("schema = 1")));
    let re = s.lines().find_map(|l| l.strip_prefix("value.re = ")).unwrap();
    assert!((re.parse::<f64>().unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);

    let out = lawson(&["--format", "csv", "--digits", "30", "alpha", "--order", "3"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("k,"));
    let a1: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((a1 - std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn out_file_replaces_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.json");
    let out = lawson(&["--digits", "30", "--out", path.to_str().unwrap(), "mzv", "--index", "3"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["index"], "3");
}

#[test]
fn identical_runs_give_identical_json() {
    let a = lawson(&["--digits", "30", "alpha", "--order", "3"]);
    let b = lawson(&["--digits", "30", "alpha", "--order", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cache_flag_wins_over_environment() {
    let (env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out = lawson_env(&["--digits", "30", "mzv", "--index", "-2,-1"], &[("LAWSON_CACHE_DIR", env_dir.path())]);
    assert!(out.status.success());
    assert!(cache_records(env_dir.path()) > 0);

    let before = cache_records(env_dir.path());
    let out = lawson_env(
        &["--digits", "32", "--cache-dir", flag_dir.path().to_str().unwrap(), "mzv", "--index", "-2,-1"],
        &[("LAWSON_CACHE_DIR", env_dir.path())],
    );
    assert!(out.status.success());
    assert!(cache_records(flag_dir.path()) > 0);
    assert_eq!(cache_records(env_dir.path()), before);
}

#[test]
fn warm_cache_reproduces_the_cold_value() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cold = json(&lawson(&["--digits", "30", "--cache-dir", d, "mzv", "--index", "-1,-1,-1"]));
    let n = cache_records(dir.path());
    let warm = json(&lawson(&["--digits", "30", "--cache-dir", d, "mzv", "--index", "-1,-1,-1"]));
    assert_eq!(cold, warm);
    assert_eq!(cache_records(dir.path()), n);
}

#[test]
fn genus2_from_published_parameters() {
    let v = json(&lawson(&["genus2-bound", "--seed", "paper", "--no-optimize"]));
    assert!(v["seed_bound"].as_f64().unwrap() <= 22.46);
}

#[test]
fn ift_optimize_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n1.json");
    let out = lawson(&["--out", path.to_str().unwrap(), "ift-genus", "--n", "1", "--optimize"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(first["constants"]["feasible"], true);
    let g = first["constants"]["genus"].as_f64().unwrap();
    assert!((g / 94.697 - 1.0).abs() < 0.05);

    let again = json(&lawson(&["ift-genus", "--verify", path.to_str().unwrap()]));
    assert_eq!(again["constants"]["feasible"], true);
    assert_eq!(again["constants"]["genus"], first["constants"]["genus"]);

    // An infeasible point verifies as infeasible rather than failing.
    let mut bad = first["params"].clone();
    bad["t"] = Value::from(first["params"]["t"].as_f64().unwrap() * 50.0);
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, bad.to_string()).unwrap();
    let out = lawson(&["ift-genus", "--verify", bad_path.to_str().unwrap()]);
    if out.status.success() {
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["constants"]["feasible"], false);
    } else {
        assert_eq!(out.status.code(), Some(1));
    }
}

#[test]
fn quick_selftest_passes() {
    let out = lawson(&["--digits", "40", "selftest", "--quick"]);
    let s = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{s}");
    assert!(s.lines().all(|l| l.starts_with("PASS")));
}
