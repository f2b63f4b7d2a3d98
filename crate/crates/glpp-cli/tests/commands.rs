use std::process::{Command, Output};

use serde_json::Value;

fn glpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glpp"))
        .args(args)
        .env_remove("GLPP_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exact_l2_geometric_split() {
    let v = json(&glpp(&["exact", "--L", "2", "--mu0", "geometric:0.5"]));
    let nu = v["law"]["nu"].as_object().unwrap();
    assert_eq!(nu.len(), 6);
    for (code, e) in nu {
        let want = if code == "+-+-" || code == "-+-+" { 0.25 } else { 0.125 };
        assert!((e["p"].as_f64().unwrap() - want).abs() < 1e-12, "{code}");
    }
    assert_eq!(v["provenance"]["cap"], 60);
    assert_eq!(v["provenance"]["family"]["kind"], "geometric");
}

#[test]
fn exact_speed_reports_both_routes() {
    let v = json(&glpp(&["exact", "--L", "1", "--mu0", "geometric:0.5", "--speed"]));
    let c = v["speed"]["c_int_speed"].as_f64().unwrap();
    assert!((c - 1.0 / 3.0).abs() < 1e-12);
    assert!(v["speed"]["c_alt"].is_number());
}

#[test]
fn exit_codes() {
    let zero_steps = glpp(&["simulate", "--L", "1", "--family", "geometric:0.5", "--steps", "0"]);
    assert_eq!(zero_steps.status.code(), Some(2));
    let bad_family = glpp(&["simulate", "--L", "1", "--family", "nope:1"]);
    assert_eq!(bad_family.status.code(), Some(2));
    let missing_flag = glpp(&["exact", "--mu0", "geometric:0.5"]);
    assert_eq!(missing_flag.status.code(), Some(2));
    let divergent = glpp(&["exact", "--L", "1", "--mu0", "zeta:1.5"]);
    assert_eq!(divergent.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&divergent.stderr).contains("sqrt"));
    let loose_cap = glpp(&["exact", "--L", "2", "--mu0", "geometric:0.3", "--cap", "5"]);
    assert_eq!(loose_cap.status.code(), Some(3));
    let perturbed = glpp(&["pca-check", "--mu0", "edge_lpp(geometric:0.5)"]);
    assert_eq!(perturbed.status.code(), Some(3));
}

#[test]
fn same_seed_same_json() {
    let args = ["simulate", "--L", "2", "--family", "poisson:1", "--steps", "20000", "--seed", "11"];
    let a = glpp(&args);
    let b = glpp(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = glpp(&["simulate", "--L", "2", "--family", "poisson:1", "--steps", "20000", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn replicas_do_not_depend_on_jobs() {
    let run = |jobs: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_glpp"))
            .args(["simulate", "--L", "2", "--family", "geometric:0.5", "--steps", "20000", "--replicas", "3", "--jobs", jobs])
            .env("GLPP_SEED", "5")
            .output()
            .unwrap();
        json(&out)
    };
    let (a, b) = (run("1"), run("3"));
    assert_eq!(a, b);
    assert_eq!(a["provenance"]["seed"], 5);
}

#[test]
fn trajectory_csv_has_one_row_per_measured_step() {
    let dir = tempdir();
    let path = dir.join("traj.csv");
    let out = glpp(&[
        "simulate", "--L", "1", "--family", "geometric:0.5", "--steps", "5000", "--burn-in", "100", "--trajectory",
        path.to_str().unwrap(),
    ]);
    json(&out);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,bridge,t1,flips"));
    assert_eq!(lines.count(), 4900);
}

#[test]
fn pca_check_poisson_passes() {
    let v = json(&glpp(&["pca-check", "--mu0", "poisson:1"]));
    assert_eq!(v["passed"], true);
    assert!(v["stable"]["max_residual"].as_f64().unwrap() <= 1e-10);
    assert!(v["belyaev"]["max_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn quarterplane_writes_svg_and_csv() {
    let dir = tempdir();
    let (svg, csv) = (dir.join("shape.svg"), dir.join("shape.csv"));
    let v = json(&glpp(&[
        "quarterplane", "--N", "120", "--family", "geometric:0.5", "--until", "150", "--seed", "3", "--svg",
        svg.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]));
    assert_eq!(v["profile"]["reference"]["law"], "geometric");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("x_over_n,y_over_n"));
    let small = glpp(&["quarterplane", "--N", "10", "--family", "geometric:0.5", "--until", "1000"]);
    assert_eq!(small.status.code(), Some(2));
}

#[test]
fn verify_single_criterion() {
    let out = glpp(&["verify", "--suite", "desk", "--only", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("[PASS] #7"), "{text}");
    assert_eq!(glpp(&["verify", "--suite", "nightly"]).status.code(), Some(2));
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("glpp-cli-{}-{:?}", std::process::id(), std::thread::current().id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
