use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magkit"))
        .args(args)
        .env("MAGKIT_THREADS", "2")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const CLUSTER: &str = "0,2,100\n2,0,100\n100,100,0\n";
const K32: &str = "0,2,2,1,1\n2,0,2,1,1\n2,2,0,1,1\n1,1,1,0,2\n1,1,1,2,0\n";

#[test]
fn compute_two_points() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "two.csv", "0,1\n1,0\n");
    let out = run(&["compute", "--input", p(&input), "--t", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let expected = 1.0 + 0.25f64.tanh();
    assert!((v["magnitude"].as_f64().unwrap() - expected).abs() <= 1e-14);
    assert_eq!(v["definiteness"], "PositiveDefinite");
    assert_eq!(v["identities"]["all_pass"], true);
}

#[test]
fn json_input_with_points() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "pts.json", r#"{"points": [[0, 0], [3, 4]]}"#);
    let v = json(&run(&["compute", "--input", p(&input)]));
    assert!((v["magnitude"].as_f64().unwrap() - (1.0 + 2.5f64.tanh())).abs() <= 1e-14);
}

#[test]
fn malformed_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.csv", "0,1\n1,x\n");
    assert_eq!(run(&["compute", "--input", p(&bad)]).status.code(), Some(1));
    let asym = write(dir.path(), "asym.csv", "0,1\n2,0\n");
    assert_eq!(run(&["compute", "--input", p(&asym)]).status.code(), Some(1));
    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["compute", "--input", p(&missing)]).status.code(), Some(1));
    assert_eq!(run(&["compute"]).status.code(), Some(1));
}

#[test]
fn missing_weighting_exits_two() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "k32.csv", K32);
    let t = format!("{}", 0.5 * 2f64.ln());
    let out = run(&["compute", "--input", p(&input), "--t", &t]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["error"], "NoSolution");
    assert_eq!(v["definiteness"], "Singular");
}

#[test]
fn spd_on_discrete_space() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "d4.csv", "0,1,1,1\n1,0,1,1\n1,1,0,1\n1,1,1,0\n");
    let out = run(&["spd", "--input", p(&input), "--t", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["consistent"], true);
}

#[test]
fn spd_threshold_on_cluster() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "cluster.csv", CLUSTER);
    let v = json(&run(&["spd", "--input", p(&input), "--t-max", "1000"]));
    let t_star = v["threshold"]["t_star"].as_f64().unwrap();
    assert!(t_star.is_finite() && t_star > 0.0);
}

#[test]
fn submodular_on_spd_space_has_no_violations() {
    let dir = TempDir::new().unwrap();
    let points = r#"{"points": [[0,0],[1.3,0.2],[0.4,1.5],[2.1,1.9],[3.0,0.4],[1.2,3.1]]}"#;
    let input = write(dir.path(), "six.json", points);
    let spd = json(&run(&["spd", "--input", p(&input), "--t", "3"]));
    assert_eq!(spd["verdict"], true);
    let out = run(&["submodular", "--input", p(&input), "--t", "3", "--kind", "inverse", "--alpha", "-2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["hypothesis_holds"], true);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    assert_eq!(v["monotonicity_violations"].as_array().unwrap().len(), 0);
}

#[test]
fn subspace_removal_matches_two_point_closed_form() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "cluster.csv", CLUSTER);
    let out = run(&["subspace", "--input", p(&input), "--remove", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["points"], serde_json::json!([1, 2]));
    assert!((v["magnitude"].as_f64().unwrap() - (1.0 + 1f64.tanh())).abs() <= 1e-12);
    let kept = json(&run(&["subspace", "--input", p(&input), "--subset", "1,2"]));
    assert!((kept["magnitude"].as_f64().unwrap() - v["magnitude"].as_f64().unwrap()).abs() <= 1e-14);
}

#[test]
fn subspace_index_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "cluster.csv", CLUSTER);
    assert_eq!(run(&["subspace", "--input", p(&input), "--remove", "4"]).status.code(), Some(1));
    assert_eq!(run(&["subspace", "--input", p(&input), "--subset", "0"]).status.code(), Some(1));
}

#[test]
fn delete_chain_reaches_single_point() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "cluster.csv", CLUSTER);
    let out = run(&["delete-chain", "--input", p(&input), "--remove", "3,1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let last = v.as_array().and_then(|a| a.last()).or_else(|| v["steps"].as_array().and_then(|a| a.last()));
    let last = last.expect("chain output lists steps");
    assert!((last["magnitude"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn sweep_writes_csv_file() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "cluster.csv", CLUSTER);
    let output = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--input", p(&input), "--t-min", "0.01", "--t-max", "10", "--grid", "25", "--output", p(&output),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&output).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert!(text.starts_with("t,magnitude,q,R_squared,asymptote,definiteness"));
}

#[test]
fn identities_and_embed_report() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "cluster.csv", CLUSTER);
    let out = run(&["identities", "--input", p(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["embed", "--input", p(&input)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out).is_object());
}

#[test]
fn reproduce_targets() {
    let fig1 = run(&["reproduce", "fig1"]);
    assert_eq!(fig1.status.code(), Some(0));
    let text = String::from_utf8(fig1.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 202);
    assert!(text.starts_with("t,magnitude,approx_magnitude,exact_q,approx_q,relative_error"));

    let fig2 = run(&["reproduce", "fig2"]);
    assert_eq!(fig2.status.code(), Some(0));
    assert!(String::from_utf8(fig2.stdout).unwrap().starts_with("t,magnitude,weight_1,weight_2,weight_3"));

    let example = run(&["reproduce", "example-2-3"]);
    assert_eq!(example.status.code(), Some(0));
    let v = json(&example);
    assert!(v["gram_max_deviation"].as_f64().unwrap() <= 1e-12);

    assert_eq!(run(&["reproduce", "example-fb-2pt"]).status.code(), Some(0));
    assert_eq!(run(&["reproduce", "example-fb-2pt", "--delta", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["reproduce", "unknown"]).status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["reproduce", "fig2"]);
    let b = run(&["reproduce", "fig2"]);
    assert_eq!(a.stdout, b.stdout);
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "k32.csv", K32);
    let single = Command::new(env!("CARGO_BIN_EXE_magkit"))
        .args(["submodular", "--input", p(&input), "--alpha", "-2"])
        .env("MAGKIT_THREADS", "1")
        .output()
        .unwrap();
    let multi = run(&["submodular", "--input", p(&input), "--alpha", "-2"]);
    assert_eq!(single.stdout, multi.stdout);
}

#[test]
fn bad_thread_count_exits_one() {
    let out = Command::new(env!("CARGO_BIN_EXE_magkit"))
        .args(["reproduce", "fig1"])
        .env("MAGKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
