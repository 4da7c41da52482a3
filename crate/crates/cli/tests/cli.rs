use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uavdeploy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const TWO: &str = r#"{"beta": 4, "d": 0, "metric": "euclidean",
  "uavs": [{"id": 0, "x": 0, "r": 1, "h": 0, "v": 1}, {"id": 1, "x": 1, "r": 1, "h": 0, "v": 1}]}"#;

#[test]
fn centred_single_agent_only_climbs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "one.json", r#"{"beta": 2, "d": 0, "uavs": [{"id": 0, "x": 1, "r": 1, "h": 3, "v": 2}]}"#);
    let out = run(&["solve", "minmax", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["objective"].as_f64().unwrap(), 1.5);
    assert_eq!(v["method"], "common_origin_exact");
    assert!(v["bounds"]["t_u"].as_f64().is_some());
}

#[test]
fn malformed_input_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "bad.json", r#"{"beta": 4, "d": 0, "uavs": [{"id": 0, "x": 0, "r": 1, "h": -1, "v": 1}]}"#);
    let out = run(&["solve", "minmax", "--instance", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("uavs[0].h"));

    let broken = write(dir.path(), "broken.json", r#"{"beta": 4, "d": 0, "uavs": [{"id": 0, "x": 0, "r": 1, "h": "a", "v": 1}]}"#);
    let out = run(&["solve", "minsum", "--instance", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("uavs[0].h"));

    let out = run(&["solve", "minmax"]);
    assert_eq!(out.status.code(), Some(1), "missing flag is a usage error");
}

#[test]
fn feasibility_verdict_sets_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "tight.json", TWO);
    let out = run(&["solve", "minsum", "--instance", inst.to_str().unwrap(), "--method", "greedy"]);
    assert_eq!(out.status.code(), Some(1), "greedy needs a shared origin");
    let out = run(&["feasible", "--instance", inst.to_str().unwrap(), "--deadline", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["feasible"], false);
    let out = run(&["feasible", "--instance", inst.to_str().unwrap(), "--deadline", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["feasible"], true);
}

#[test]
fn solver_output_verifies_and_edits_are_caught() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "two.json", TWO);
    for objective in ["minmax", "minsum"] {
        let sol = dir.path().join(format!("{objective}.json"));
        let out = run(&["solve", objective, "--instance", inst.to_str().unwrap(), "--out", sol.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let out = run(&["verify", "--instance", inst.to_str().unwrap(), "--deployment", sol.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{objective}: {}", String::from_utf8_lossy(&out.stdout));
    }

    let sol: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("minmax.json")).unwrap()).unwrap();
    let mut gap = sol.clone();
    let y = gap["placements"][0]["y"].as_f64().unwrap();
    gap["placements"][0]["y"] = Value::from(y - 0.5);
    let id = gap["placements"][0]["id"].as_u64().unwrap().to_string();
    let gap_path = write(dir.path(), "gap.json", &gap.to_string());
    let out = run(&["verify", "--instance", inst.to_str().unwrap(), "--deployment", gap_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let report = json(&out);
    assert_eq!(report["status"], "gap");
    assert!(report["gap"].as_array().unwrap().len() == 2);

    let mut lie = sol.clone();
    let d = lie["per_delay"][&id].as_f64().unwrap();
    lie["per_delay"][&id] = Value::from(d + 0.25);
    let lie_path = write(dir.path(), "lie.json", &lie.to_string());
    let out = run(&["verify", "--instance", inst.to_str().unwrap(), "--deployment", lie_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["status"], "delay_mismatch");
}

#[test]
fn gadget_feasibility_matches_partition_verdict() {
    let dir = tempfile::tempdir().unwrap();
    for (items, expect) in [("5,4,4,3,3,3", true), ("4,4,4,4,4,6", false)] {
        let inst = dir.path().join("g.json");
        let meta = dir.path().join("meta.json");
        let out = run(&[
            "gadget",
            "--items",
            items,
            "--variant",
            "minmax",
            "--out",
            inst.to_str().unwrap(),
            "--meta",
            meta.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let meta: Value = serde_json::from_str(&std::fs::read_to_string(&meta).unwrap()).unwrap();
        assert_eq!(meta["partition_exists"], expect);
        let k = meta["k"].as_f64().unwrap().to_string();
        let out = run(&["feasible", "--instance", inst.to_str().unwrap(), "--deadline", &k, "--any-order"]);
        assert_eq!(json(&out)["feasible"], expect, "{items}");
        assert_eq!(out.status.code(), Some(if expect { 0 } else { 2 }));
    }
}

#[test]
fn generated_instances_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let out = run(&["gen", "--n", "12", "--seed", "9", "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&a).unwrap();
    let inst = uavdeploy_cli::io::parse_instance(&text).unwrap();
    assert_eq!(uavdeploy_cli::io::instance_to_json(&inst), text);
    let cfg = write(dir.path(), "cfg.json", r#"{"n": 5, "bogus": 1}"#);
    let out = run(&["gen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn sweep_csv_is_byte_stable_and_svg_renders() {
    let dir = tempfile::tempdir().unwrap();
    let csv = |name: &str, jobs: &str| {
        let p = dir.path().join(name);
        let out = run(&[
            "sweep", "--param", "n", "--values", "10,20", "--solvers", "exact,greedy", "--runs", "3", "--seed", "4",
            "--shared-origin", "0", "--jobs", jobs, "--csv", p.to_str().unwrap(), "--svg",
            dir.path().join("s.svg").to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(p).unwrap()
    };
    let a = csv("a.csv", "1");
    let b = csv("b.csv", "3");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("param,value,solver,runs,infeasible,mean_objective"));
    assert!(std::fs::read_to_string(dir.path().join("s.svg")).unwrap().contains("<polyline"));

    let out = run(&["sweep", "--param", "n", "--values", "20,10", "--solvers", "exact", "--runs", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_reports_percentiles_and_rejects_zero_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "two.json", TWO);
    let out = run(&["bench", "--instance", inst.to_str().unwrap(), "--solver", "fptas", "--repeat", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["seconds"]["samples"], 5);
    assert!(v["seconds"]["p50"].as_f64().unwrap() <= v["seconds"]["max"].as_f64().unwrap());
    let out = run(&["bench", "--instance", inst.to_str().unwrap(), "--solver", "fptas", "--repeat", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_agrees_with_solver_on_a_small_fleet() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "two.json", TWO);
    let oracle = json(&run(&["oracle", "minmax", "--instance", inst.to_str().unwrap()]));
    let solved = json(&run(&["solve", "minmax", "--instance", inst.to_str().unwrap(), "--epsilon", "1e-6"]));
    let (o, s) = (oracle["objective"].as_f64().unwrap(), solved["objective"].as_f64().unwrap());
    assert!((o - 2.0).abs() < 1e-9);
    assert!(s >= o * (1.0 - 1e-9) && s <= o * (1.0 + 1e-6) + 1e-12);
}

#[test]
fn planar_solution_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let side = std::f64::consts::SQRT_2;
    let text = format!(
        r#"{{"beta": {b}, "d": {side}, "target": "grid", "uavs": [
            {{"id": 0, "x": 0.1, "z": 0.2, "r": 1, "h": 0.3, "v": 2}},
            {{"id": 1, "x": 2.5, "z": 1.0, "r": 1.2, "h": 0.1, "v": 3}},
            {{"id": 2, "x": 1.0, "z": 0.0, "r": 1.1, "h": 0.2, "v": 1}}]}}"#,
        b = 2.0 * side
    );
    let inst = write(dir.path(), "plane.json", &text);
    let sol = dir.path().join("sol.json");
    let out = run(&["solve", "minmax2d", "--instance", inst.to_str().unwrap(), "--out", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["verify", "--instance", inst.to_str().unwrap(), "--deployment", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
