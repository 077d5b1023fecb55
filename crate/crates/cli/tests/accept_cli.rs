//! End-to-end behaviour of the `flatzone` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn flatzone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatzone")).args(args).output().unwrap()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("flatzone-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).display().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn json_file(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows (no comments, no header) of the CSV block starting at `header`.
fn block<'a>(text: &'a str, header: &str) -> Vec<Vec<&'a str>> {
    text.lines()
        .skip_while(|l| *l != header)
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| l.split(',').collect())
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn transform_blocks() {
    let out = flatzone(&["transform", "--A", "1", "--gamma", "1", "--sigma", "1", "--samples", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# flatzone "));
    assert!(text.lines().nth(1).unwrap().starts_with("# config {\"command\":\"transform\""));
    let first = block(&text, "s,H,psi");
    assert_eq!(first.len(), 5);
    let row = first.iter().find(|r| (f(r[0]) - 0.8).abs() < 1e-12).unwrap();
    assert!((f(row[2]) - 0.48).abs() < 1e-14);
    let second = block(&text, "v,g,gprime");
    assert_eq!(second.len(), 5);
    assert_eq!((f(second[0][0]), f(second[0][1])), (0.0, 1.0));
}

#[test]
fn shoot_summary_and_profile() {
    let dir = Scratch::new("shoot");
    let (csv, report) = (dir.path("p.csv"), dir.path("p.json"));
    let out = flatzone(&["shoot", "--gamma", "1", "--lambda", "6", "--out", &csv, "--report", &report]);
    assert!(out.status.success());
    let j = json_file(&report);
    assert!((j["R_ell"].as_f64().unwrap() - 1.0).abs() <= 1e-8);
    assert!((j["critical_lambda_for_R"].as_f64().unwrap() - 6.0).abs() <= 1e-8);
    for key in ["ell", "lambda", "R_ell", "R_L", "critical_lambda_for_R"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = block(&text, "s,v,vprime");
    assert_eq!(rows[0].iter().map(|x| f(x)).collect::<Vec<_>>(), vec![0.0, 0.5, 0.0]);

    let out = flatzone(&["shoot", "--gamma", "2", "--lambda", "1", "--report", &report, "--out", &csv]);
    assert!(out.status.success());
    let j = json_file(&report);
    assert_eq!(j["R_L"], serde_json::json!({"infinite": true}));
    assert!(j["critical_lambda_for_R"].is_null());
}

#[test]
fn solve_reports_plateau() {
    let dir = Scratch::new("solve");
    let (csv, report) = (dir.path("s.csv"), dir.path("s.json"));
    let out = flatzone(&["solve", "--gamma", "1", "--lambda", "12", "--out", &csv, "--report", &report]);
    assert!(out.status.success());
    let j = json_file(&report);
    let h = 2.0 / 2000.0;
    let half = j["flat_radius"].as_f64().unwrap();
    assert!((half - (1.0 - 0.5_f64.sqrt())).abs() <= 2.0 * h, "{half}");
    assert!((j["plateau_density_mean"].as_f64().unwrap() - 12.0).abs() <= 0.12);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = block(&text, "coord,v,u,flat");
    assert_eq!(rows.len(), 2001);
    let flat = rows.iter().filter(|r| r[3] == "1").count();
    assert_eq!(flat as u64, j["flat_nodes"].as_u64().unwrap());

    let out = flatzone(&["solve", "--gamma", "1", "--lambda", "6", "--report", &report, "--out", &csv]);
    assert!(out.status.success());
    let j = json_file(&report);
    assert!(j["benchmark_max_error"].as_f64().unwrap() <= 1e-4);
    assert!(j["flat_nodes"].is_null() || j["flat_nodes"].as_u64() == Some(1));
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = Scratch::new("invalid");
    let (csv, report) = (dir.path("x.csv"), dir.path("x.json"));
    let out = flatzone(&["solve", "--gamma", "-1", "--lambda", "6", "--out", &csv, "--report", &report]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!Path::new(&csv).exists() && !Path::new(&report).exists());
    assert_eq!(flatzone(&["sweep", "--lambda-range", "5:1:1"]).status.code(), Some(2));
    assert_eq!(flatzone(&["solve", "--lambda", "6", "--m", "3"]).status.code(), Some(2));
    assert_eq!(flatzone(&["shoot", "--lambda", "6", "--ell", "0.9"]).status.code(), Some(2));
    let missing = dir.path("missing.csv");
    assert_eq!(flatzone(&["solve", "--lambda", "6", "--f-table", &missing]).status.code(), Some(2));
}

#[test]
fn threshold_reports() {
    let dir = Scratch::new("threshold");
    let report = dir.path("t.json");
    let out = flatzone(&["threshold", "--gamma", "1", "--report", &report]);
    assert!(out.status.success());
    let j = json_file(&report);
    assert!((j["Lambda_hat"].as_f64().unwrap() - 6.0).abs() <= 0.01);
    assert!((j["lambda_lower_linear"].as_f64().unwrap() - 2.0).abs() <= 1e-9);

    flatzone(&["threshold", "--gamma", "0.5", "--report", &report]);
    let j = json_file(&report);
    assert!(j["lambda_ne_upper"].as_f64().unwrap() >= j["Lambda_hat"].as_f64().unwrap());

    flatzone(&["threshold", "--gamma", "2", "--report", &report]);
    let j = json_file(&report);
    assert_eq!(j["regime"], "AlwaysExists");
    assert!(j.get("Lambda_hat").is_none());
    assert_eq!(j["h_sigma"], serde_json::json!({"infinite": true}));
}

#[test]
fn sweep_dichotomy() {
    let out = flatzone(&["sweep", "--gamma", "1", "--R", "1", "--lambda-range", "1:12:1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = block(&text, "lambda,max_u,flat_width,iterations");
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let (lambda, width) = (f(r[0]), f(r[2]));
        if lambda <= 6.0 {
            assert_eq!(width, 0.0, "lambda {lambda}");
        } else {
            assert!(width > 0.0, "lambda {lambda}");
        }
    }
    assert!(rows.windows(2).all(|w| f(w[1][1]) >= f(w[0][1])));
    assert!(rows.windows(2).all(|w| f(w[1][0]) > f(w[0][0])));
}

#[test]
fn tables_as_input() {
    let dir = Scratch::new("tables");
    let h = dir.path("h.csv");
    let rows: String = (0..40)
        .map(|k| {
            let s = 1.0 - 0.8_f64.powi(k);
            format!("{s},{}\n", 1.0 / (1.0 - s))
        })
        .collect();
    std::fs::write(&h, format!("s,value\n{rows}")).unwrap();
    let fpath = dir.path("f.csv");
    std::fs::write(&fpath, "s,value\n-1,1\n1,1\n").unwrap();
    let report = dir.path("r.json");
    let out = flatzone(&["solve", "--h-table", &h, "--f-table", &fpath, "--lambda", "3", "--m", "401", "--report", &report, "--out", &dir.path("o.csv")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let j = json_file(&report);
    assert_eq!(j["config"]["h"], "table");
    assert!(j["flat_nodes"].is_null());
}

#[test]
fn outputs_are_deterministic() {
    let dir = Scratch::new("determinism");
    let run = |tag: &str| {
        let (csv, report) = (dir.path(&format!("{tag}.csv")), dir.path(&format!("{tag}.json")));
        let out = flatzone(&["solve", "--gamma", "1.5", "--lambda", "9", "--m", "801", "--out", &csv, "--report", &report]);
        assert!(out.status.success());
        (std::fs::read(&csv).unwrap(), std::fs::read(&report).unwrap())
    };
    assert_eq!(run("a"), run("b"));
    let sweep = || flatzone(&["sweep", "--gamma", "0.5", "--lambda-range", "1:8:0.5", "--m", "401"]).stdout;
    assert_eq!(sweep(), sweep());
}
