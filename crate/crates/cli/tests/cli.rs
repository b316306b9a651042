use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

fn fkc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fkc_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fkc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| {
        panic!("not JSON ({e}): {}", String::from_utf8_lossy(bytes))
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn center_xs(report: &Value) -> Vec<f64> {
    let mut xs: Vec<f64> = report["centers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["coords"][0].as_f64().unwrap())
        .collect();
    xs.sort_by(f64::total_cmp);
    xs
}

const AUX_GRAPH_EXAMPLE: &str = "x,group\n0,1\n100,1\n0.5,2\n100.5,2\n";

#[test]
fn known_radius_auxiliary_graph_example() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.csv", AUX_GRAPH_EXAMPLE);
    let out = fkc(&["known", "--input", &input, "--caps", "1,1", "--radius", "0.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    assert_eq!(report["schema"], "fair-kcenter.report/v1");
    assert_eq!(center_xs(&report), vec![0.0, 100.5]);
    assert_eq!(report["cost"], 0.5);
    assert_eq!(report["per_group_counts"], serde_json::json!([1, 1]));
}

#[test]
fn stdin_input_has_no_cost() {
    let out = fkc_stdin(&["known", "--caps", "1,1", "--radius", "0.5"], AUX_GRAPH_EXAMPLE);
    assert!(out.status.success());
    let report = json(&out.stdout);
    assert!(report.get("cost").is_none());
    assert_eq!(center_xs(&report), vec![0.0, 100.5]);
}

#[test]
fn known_radius_too_small_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.csv", "x,group\n0,1\n10,2\n20,1\n30,2\n");
    let out = fkc(&["known", "--input", &input, "--caps", "1,1", "--radius", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = json(&out.stderr);
    assert_eq!(err["kind"], "infeasible");
}

#[test]
fn gen_then_oracle_recovers_planted_radius() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("planted.csv");
    let data = data.to_str().unwrap();
    let out = fkc(&[
        "gen", "--caps", "1,1", "--n", "10", "--planted-radius", "1", "--seed", "3", "--out", data,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let planted = json(&out.stdout);
    assert_eq!(planted["planted_r"], 1.0);
    let out = fkc(&["oracle", "--input", data, "--caps", "1,1", "--groups", "1,2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r_opt = json(&out.stdout)["r_hat"].as_f64().unwrap();
    assert!((r_opt - 1.0).abs() <= 1e-9, "{r_opt}");
}

#[test]
fn solve_on_planted_data_within_ratio() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("planted.csv");
    let data = data.to_str().unwrap();
    let out = fkc(&["gen", "--caps", "3,2", "--n", "300", "--seed", "9", "--out", data]);
    assert!(out.status.success());
    for cmd in ["solve", "semi"] {
        let input = if cmd == "semi" {
            // group-sorted copy of the generated file
            let text = fs::read_to_string(data).unwrap();
            let mut lines: Vec<&str> = text.lines().collect();
            let header = lines.remove(0);
            lines.sort_by_key(|l| l.rsplit(',').next().unwrap().to_string());
            write(&dir, "sorted.csv", &format!("{header}\n{}\n", lines.join("\n")))
        } else {
            data.to_string()
        };
        let out = fkc(&[cmd, "--input", &input, "--caps", "3,2", "--groups", "1,2"]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let report = json(&out.stdout);
        let cost = report["cost"].as_f64().unwrap();
        let bound = if cmd == "semi" { 3.3 } else { 5.5 };
        assert!(cost <= bound, "{cmd}: cost {cost}");
        assert!(report["points_stored_peak"].as_u64().unwrap() <= 3 * 5 + 2);
        assert_eq!(report["n_points"], 300);
        let counts = report["per_group_counts"].as_array().unwrap();
        assert!(counts[0].as_u64().unwrap() <= 3 && counts[1].as_u64().unwrap() <= 2);
    }
}

#[test]
fn empty_input_is_a_structured_error() {
    let dir = TempDir::new().unwrap();
    for text in ["", "x,group\n"] {
        let input = write(&dir, "empty.csv", text);
        let out = fkc(&["solve", "--input", &input, "--caps", "1,1"]);
        assert_eq!(out.status.code(), Some(2));
        let err = json(&out.stderr);
        assert_eq!(err["schema"], "fair-kcenter.error/v1");
        assert_eq!(err["kind"], "input");
    }
}

#[test]
fn parse_error_names_the_line() {
    let out = fkc_stdin(&["solve", "--caps", "1,1"], "x,y,group\na,0,1\n");
    assert_eq!(out.status.code(), Some(2));
    let err = json(&out.stderr);
    assert_eq!(err["line"], 2);
    assert!(err["message"].as_str().unwrap().contains("line 2"));
}

#[test]
fn semi_rejects_unsorted_groups_at_third_record() {
    let out = fkc_stdin(&["semi", "--caps", "1,1"], "x,group\n0,1\n1,2\n2,1\n");
    assert_eq!(out.status.code(), Some(2));
    // the third record sits on line 4, after the header
    assert_eq!(json(&out.stderr)["line"], 4);
}

#[test]
fn mismatched_k_is_rejected() {
    let out = fkc_stdin(&["solve", "--caps", "1,1", "--k", "3"], AUX_GRAPH_EXAMPLE);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out.stderr)["kind"], "usage");
}

fn strip_wall_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("planted.csv");
    let data = data.to_str().unwrap();
    assert!(fkc(&["gen", "--caps", "2,2", "--n", "200", "--seed", "1", "--out", data])
        .status
        .success());
    let a = fkc(&["solve", "--input", data, "--caps", "2,2", "--metric", "manhattan"]);
    let b = fkc(&["solve", "--input", data, "--caps", "2,2", "--metric", "manhattan"]);
    assert!(a.status.success());
    assert_eq!(strip_wall_time(json(&a.stdout)), strip_wall_time(json(&b.stdout)));

    let copy = dir.path().join("again.csv");
    assert!(fkc(&["gen", "--caps", "2,2", "--n", "200", "--seed", "1", "--out", copy.to_str().unwrap()])
        .status
        .success());
    assert_eq!(fs::read(data).unwrap(), fs::read(Path::new(&copy)).unwrap());
}

#[test]
fn report_written_to_out_path() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.csv", AUX_GRAPH_EXAMPLE);
    let report = dir.path().join("report.json");
    let out = fkc(&[
        "solve", "--input", &input, "--caps", "1,1", "--out", report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report = json(&fs::read(report).unwrap());
    assert_eq!(report["mode"], "general");
    assert!(report["instances"]["total"].as_u64().unwrap() >= 1);
}

#[test]
fn bench_rows() {
    let out = fkc(&["bench", "--caps", "2,1", "--sizes", "12,200", "--reps", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out.stdout);
    let rows = rows.as_array().unwrap();
    let algorithms: Vec<&str> = rows.iter().map(|r| r["algorithm"].as_str().unwrap()).collect();
    assert_eq!(
        algorithms,
        vec![
            "brute-force", "ladder-general", "ladder-semi", "gonzalez",
            "ladder-general", "ladder-semi", "gonzalez",
        ]
    );
    assert!((rows[0]["ratio"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    for r in rows {
        if r["algorithm"] == "ladder-general" {
            assert!(r["ratio"].as_f64().unwrap() <= 5.5);
        }
    }
}
