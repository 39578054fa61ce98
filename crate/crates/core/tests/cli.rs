use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_reppower"));
    cmd.env_remove("REPPOWER_DATA");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn reppower")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = run(&full);
    assert!(
        out.status.success(),
        "{:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn num(v: &Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for key in path {
        cur = &cur[*key];
    }
    cur.as_f64()
        .unwrap_or_else(|| panic!("{path:?} is not a number in {v}"))
}

#[test]
fn cp_is_one_half_at_the_significance_threshold() {
    let v = json(&["power", "--method", "cp", "--po", "0.05", "--dir", "+", "--c", "1"]);
    assert_eq!(v["command"], "power");
    assert!((num(&v, &["results", "CP"]) - 0.5).abs() < 1e-12);
    assert!(v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn pp_is_near_one_half_where_it_meets_cp() {
    let v = json(&["power", "--method", "pp", "--po", "0.046", "--dir", "+", "--c", "0.96"]);
    assert!((num(&v, &["results", "PP"]) - 0.5).abs() < 0.01);
}

#[test]
fn bayesian_methods_report_the_pooled_level() {
    let v = json(&["power", "--method", "fbp", "--zo", "2", "--c", "1"]);
    assert!((num(&v, &["inputs", "alpha_tilde"]) - 0.00125).abs() < 1e-15);
    assert_eq!(v["results"]["feasible_100"], false);
}

#[test]
fn interim_with_nothing_observed_is_design_power() {
    let fixed = json(&["power", "--method", "cp", "--zo", "2.3", "--c", "1.7"]);
    let interim = json(&[
        "interim", "--method", "cpi", "--zo", "2.3", "--zi", "0.4", "--f", "0", "--c", "1.7",
    ]);
    let a = num(&fixed, &["results", "CP"]);
    let b = num(&interim, &["results", "CPi"]);
    assert!((a - b).abs() < 1e-14, "{a} vs {b}");
}

#[test]
fn ppi_stays_above_its_floor() {
    for c in ["0.1", "1", "50"] {
        let v = json(&[
            "interim", "--method", "ppi", "--zo", "2", "--zi", "2.0537", "--f", "0.5", "--c", c,
        ]);
        assert!(num(&v, &["results", "PPi"]) >= 0.73, "c={c}");
    }
}

#[test]
fn interim_accepts_p_values_with_direction() {
    let v = json(&[
        "interim", "--method", "ippi", "--po", "0.01", "--dir", "+", "--pi", "0.2", "--dir-i", "-",
        "--f", "0.4", "--c", "2",
    ]);
    assert!(num(&v, &["inputs", "t_i"]) < 0.0);
}

#[test]
fn solve_round_trips_through_power() {
    let v = json(&["solve", "--method", "cp", "--zo", "2", "--target", "0.8"]);
    let c = num(&v, &["results", "c"]).to_string();
    let back = json(&["power", "--method", "cp", "--zo", "2", "--c", &c]);
    assert!((num(&back, &["results", "CP"]) - 0.8).abs() < 1e-9);
}

#[test]
fn infeasible_target_exits_with_compute_error() {
    let out = run(&["solve", "--method", "pp", "--zo", "2", "--target", "0.99"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("infeasible"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["power", "--method", "cp", "--zo", "2", "--c", "1", "--bogus"],
        &["power", "--method", "cp", "--po", "0.05", "--c", "1"],
        &["power", "--method", "cpi", "--zo", "2", "--c", "1"],
        &["power", "--method", "cp", "--zo", "2", "--c", "1", "--alpha", "1.5"],
        &["power", "--method", "cp", "--zo", "2", "--c", "-1"],
        &["nonsense"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn curve_csv_is_rectangular() {
    let out = run(&[
        "--format", "csv", "curve", "--method", "cp", "--zo", "2", "--c-range", "0.5:2:0.5",
    ]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "c");
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let powers: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(powers.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn futility_replay_counts() {
    let ippi = json(&["ssrp", "--report", "futility"]);
    assert_eq!(ippi["results"]["stopped_failed"], 4);
    assert_eq!(ippi["results"]["stopped_replicated"], 0);
    assert_eq!(ippi["results"]["failed"], 8);
    let ppi = json(&["ssrp", "--report", "futility", "--futility-method", "ppi"]);
    assert_eq!(ppi["results"]["stopped_failed"], 6);
}

#[test]
fn published_interim_powers_reproduce() {
    let v = json(&["ssrp", "--report", "table3"]);
    assert_eq!(v["results"]["within_tolerance"], true);
    assert_eq!(v["results"]["rows"].as_array().unwrap().len(), 10);
}

#[test]
fn simulate_is_reproducible_for_a_seed() {
    let args = [
        "--format", "json", "simulate", "--method", "ippi", "--zo", "2.2", "--zi", "1.1", "--f",
        "0.4", "--c", "1.5", "--nsims", "5000", "--seed", "17",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(num(&v, &["results", "z_discrepancy"]).abs() < 4.0);
}

fn copy_of_bundled_data() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(include_bytes!("../data/ssrp.csv")).unwrap();
    f
}

#[test]
fn dataset_path_from_flag_and_environment() {
    let file = copy_of_bundled_data();
    let path = file.path().to_str().unwrap();
    let v = json(&["ssrp", "--report", "futility", "--data", path]);
    assert_eq!(v["inputs"]["data"], path);
    assert_eq!(v["results"]["stopped_failed"], 4);

    let out = bin()
        .env("REPPOWER_DATA", path)
        .args(["--format", "json", "ssrp", "--report", "design-powers"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["inputs"]["data"], path);
}

#[test]
fn unreadable_dataset_is_not_a_usage_error() {
    let out = run(&["ssrp", "--report", "table3", "--data", "/nonexistent/ssrp.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn text_output_is_key_value() {
    let out = run(&["power", "--method", "cp", "--zo", "2", "--c", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("CP") && l.contains("0.5159")), "{text}");
}
