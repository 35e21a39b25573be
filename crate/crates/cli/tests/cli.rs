use std::process::{Command, Output};

use serde_json::Value;

fn eftlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eftlab"))
        .args(args)
        .env_remove("EFTLAB_PAIR_BUDGET")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn round_reports_each_mode() {
    let out = eftlab(&["round", "33/2", "--fmt", "4,-10,10", "--modes", "rd,ru,ro"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["in_f"], false);
    let values: Vec<&str> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["result"]["value"].as_str().unwrap())
        .collect();
    assert_eq!(values, ["16", "18", "18"]);
    assert_eq!(v["results"][2]["result"]["M"], 9);
}

#[test]
fn fts_traces_with_negative_operand() {
    let out = eftlab(&["fts", "18", "-1/16", "--modes", "ro,ro,ro;rz,rz,rz"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v[0]["eft"], true);
    assert_eq!(v[0]["y"]["value"], "-1/16");
    assert_eq!(v[1]["eft"], false);
    assert_eq!(v[1]["x"]["value"], "16");
    assert_eq!(v[1]["z"]["value"], "-2");
}

#[test]
fn extract_control_instance_fails() {
    let out = eftlab(&["extract", "1", "1/256"]);
    assert!(out.status.success());
    assert_eq!(json(&out)[0]["exact_split"], false);
    let out = eftlab(&["extract", "9/8", "1/256", "--modes", "ro,*,*"]);
    let v = json(&out);
    assert_eq!(v.as_array().unwrap().len(), 36);
    assert!(v.as_array().unwrap().iter().all(|t| t["exact_split"] == true && t["grid_ok"] == true));
}

#[test]
fn check_post_hoc_condition() {
    let out = eftlab(&["check", "15", "1/16", "--cond", "prior_linnainmaa_h", "--modes", "ru"]);
    assert!(out.status.success());
    assert_eq!(json(&out)[0]["holds"], false);
    let out = eftlab(&["check", "15", "1/16", "--cond", "prior_linnainmaa_h"]);
    assert_eq!(out.status.code(), Some(2));
    let out = eftlab(&["check", "15", "1/16"]);
    let v = json(&out);
    let faith1 = v.as_array().unwrap().iter().find(|c| c["condition"] == "theorem_faith1").unwrap();
    assert_eq!(faith1["holds"], true);
}

#[test]
fn sweep_exit_codes() {
    let clean = eftlab(&["sweep", "--fmt", "3,-6,6", "--target", "fts-eft", "--cond", "theorem_faith2", "--modes", "mixed", "--adversarial-fr"]);
    assert_eq!(clean.status.code(), Some(0), "{}", String::from_utf8_lossy(&clean.stderr));
    let v = json(&clean);
    assert_eq!(v["violations_total"], 0);
    assert_eq!(v["spec"]["modes"]["triples"].as_array().unwrap().len(), 216);

    let dirty = eftlab(&["sweep", "--target", "fts-eft", "--modes", "rz,rz,rz", "--max-violations", "3"]);
    assert_eq!(dirty.status.code(), Some(1));
    assert_eq!(json(&dirty)["violations"].as_array().unwrap().len(), 3);

    for bad in [
        vec!["sweep", "--fmt", "1,0,0"],
        vec!["sweep", "--target", "nonsense"],
        vec!["sweep", "--cond", "no_such_condition"],
        vec!["sweep", "--cond", "theorem_rto1", "--modes", "rz,*,*"],
        vec!["sweep", "--target", "split-eft", "--k", "40"],
        vec!["round", "1/3"],
        vec!["fts", "17", "1"],
    ] {
        assert_eq!(eftlab(&bad).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn pair_budget_guard_and_overrides() {
    let big = eftlab(&["sweep", "--fmt", "11,-14,15", "--target", "delta-in-f", "--modes", "rne"]);
    assert_eq!(big.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&big.stderr).contains("budget"));

    let small = ["sweep", "--fmt", "3,-6,6", "--target", "delta-in-f", "--cond", "theorem_faith1"];
    let env = Command::new(env!("CARGO_BIN_EXE_eftlab"))
        .args(small)
        .env("EFTLAB_PAIR_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
    let flag = Command::new(env!("CARGO_BIN_EXE_eftlab"))
        .args(small)
        .args(["--pair-budget", "1e5"])
        .env("EFTLAB_PAIR_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(flag.status.code(), Some(0));
}

#[test]
fn reports_to_files_and_jobs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for jobs in ["1", "3"] {
        let path = dir.path().join(format!("r{jobs}.json"));
        let out = eftlab(&[
            "sweep", "--fmt", "3,-6,6", "--target", "delta-in-f", "--modes", "ru", "--jobs", jobs,
            "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(1));
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);

    let csv = dir.path().join("r.csv");
    let out = eftlab(&[
        "sweep", "--target", "fts-eft", "--modes", "rz,rz,rz", "--format", "csv", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("kind,index,config,modes,a,b,x,z,y,delta"));
    assert_eq!(text.lines().count(), 101);

    let out = eftlab(&["sweep", "--out", "/nonexistent-dir/r.json", "--fmt", "3,-6,6", "--cond", "theorem_rto1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/r.json"));
}

#[test]
fn split_and_double_round_sweeps() {
    let out = eftlab(&["sweep", "--target", "split-eft", "--cond", "theorem_extract_scalar", "--k", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["control"]["failures"].as_u64().unwrap() > 0);

    let out = eftlab(&["sweep", "--fmt", "3,-6,6", "--target", "double-round"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pairs_total"], 2047 * 27);
    let out = eftlab(&["sweep", "--fmt", "3,-6,6", "--target", "double-round", "--wide", "7,-30,30"]);
    assert_eq!(out.status.code(), Some(2));
}
