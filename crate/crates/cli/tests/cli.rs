use std::path::PathBuf;
use std::process::{Command, Output};

use cgdp::problems::RoutingInstance;
use cgdp_cli::{RunReport, RunStatus};
use serde_json::Value;

fn cgdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> RunReport {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad report ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn scratch_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cgdp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_time");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn single_customer_route_costs_out_and_back() {
    let out = cgdp(&["solve", "--problem", "vrptw", "--generate", "n=1,seed=0", "--pricer", "labeling"]);
    assert_eq!(out.status.code(), Some(0));
    let inst = RoutingInstance::random(1, 0);
    let r = report(&out);
    assert_eq!(r.status, RunStatus::Optimal);
    assert_eq!(r.objective, Some(inst.dist[0][1] + inst.dist[1][2]));
}

#[test]
fn missing_problem_is_a_usage_error() {
    let out = cgdp(&["solve", "--generate", "n=3"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn instance_and_generator_are_exclusive() {
    let path = scratch_file("excl.txt", "1\n5\n3\n");
    let out = cgdp(&["solve", "--problem", "bpp", "--generate", "n=3", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn malformed_file_is_a_data_error() {
    let path = scratch_file("bad.txt", "2\n6\nthree\n");
    let out = cgdp(&["solve", "--problem", "bpp", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn preprocessing_infeasibility_exits_with_three() {
    // the delivery closes before the vehicle can get there
    let path = scratch_file(
        "pd.txt",
        "2 10 1\n0 0 0 0 0 100 0 0 0\n1 10 0 5 0 100 0 0 2\n2 20 0 -5 0 5 0 1 0\n",
    );
    let out = cgdp(&["solve", "--problem", "pdptw", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out).status, RunStatus::Infeasible);
}

#[test]
fn bpplib_root_lp_reports_bound_and_columns() {
    let inst = cgdp::problems::BppInstance::falkenauer_uniform(30, 4);
    let path = scratch_file("u30.txt", &inst.to_text());
    let out = cgdp(&[
        "solve",
        "--problem",
        "bpp",
        "--instance",
        path.to_str().unwrap(),
        "--pricer",
        "caasdy",
        "--mode",
        "root-lp",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.status, RunStatus::RootSolved);
    let lp = r.root_lp.unwrap();
    let volume: f64 = inst.weights.iter().sum::<f64>() / inst.capacity;
    assert!(lp >= volume - 1e-6 && lp <= inst.len() as f64);
    assert!(r.columns_generated > 0);
}

#[test]
fn pricing_only_returns_the_best_reduced_cost() {
    // three items of size 3, capacity 6, unit duals: two items per bin
    let path = scratch_file("b3.txt", "3\n6\n3\n3\n3\n");
    let out = cgdp(&[
        "solve",
        "--problem",
        "bpp",
        "--instance",
        path.to_str().unwrap(),
        "--mode",
        "pricing-only",
        "--duals",
        "1,1,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out).objective, Some(-1.0));
}

#[test]
fn pricing_only_checks_the_dual_count() {
    let out = cgdp(&["solve", "--problem", "bpp", "--generate", "n=3", "--mode", "pricing-only", "--duals", "1,1"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn report_round_trips() {
    let out = cgdp(&["solve", "--problem", "gcp", "--generate", "n=6,density=0.5,seed=2"]);
    let r = report(&out);
    let again: RunReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(again, r);
    let raw: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(raw["status"], "optimal");
    assert_eq!(raw["objective"].as_f64(), r.objective);
}

#[test]
fn same_seed_gives_the_same_report() {
    let args = ["solve", "--problem", "pms", "--generate", "n=6,m=2,config=1,seed=5"];
    let mut a: Value = serde_json::from_slice(&cgdp(&args).stdout).unwrap();
    let mut b: Value = serde_json::from_slice(&cgdp(&args).stdout).unwrap();
    strip_timing(&mut a);
    strip_timing(&mut b);
    assert_eq!(a, b);
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let path = std::env::temp_dir().join(format!("cgdp-cli-out-{}.json", std::process::id()));
    let out = cgdp(&[
        "solve",
        "--problem",
        "mrasp",
        "--generate",
        "n=4,m=2,seed=1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: RunReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r.status, RunStatus::Optimal);
    let _ = std::fs::remove_file(path);
}

#[test]
fn time_limit_zero_reports_a_limit() {
    let out = cgdp(&["solve", "--problem", "bpp", "--generate", "n=40,config=2", "--time-limit", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert!(matches!(r.status, RunStatus::Feasible | RunStatus::LimitReached));
}
