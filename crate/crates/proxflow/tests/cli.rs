use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn proxflow(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proxflow"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sliding_defaults_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = proxflow(dir.path(), &["sliding", "--out", "res"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("res/sliding_trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x1,x2,x3,work");
    assert_eq!(csv.lines().count(), 1026);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/sliding_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["n"], 1024);
    assert!(summary["sup_error"].as_f64().unwrap() < 0.2);
    // nothing outside the output directory
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries, vec![std::ffi::OsString::from("res")]);
}

#[test]
fn sliding_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sliding", "--n", "0"][..],
        &["sliding", "--alpha", "3.141592653589793"],
        &["sliding", "--alpha", "0"],
        &["sliding", "--d", "2"],
        &["sliding", "--C", "-1"],
        &["sliding", "--scheme", "rk4"],
        &["sliding", "--scheme", "pngs", "--abstol", "0"],
        &["sliding", "--T", "-4"],
        &["sliding", "--bogus"],
    ] {
        let o = proxflow(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn sliding_schemes_run() {
    let dir = tempfile::tempdir().unwrap();
    for s in ["pbd", "moreau", "pngs", "pgs", "penalty", "penalty:gamma=100.0"] {
        let o = proxflow(dir.path(), &["sliding", "--n", "64", "--scheme", s, "--out", "o"]);
        assert_eq!(code(&o), 0, "{s}: {}", stderr(&o));
    }
}

#[test]
fn disks_defaults_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let o = proxflow(dir.path(), &["disks", "--out", "a", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = proxflow(dir.path(), &["disks", "--out", "b", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["disks_problem.json", "disks_trajectory.csv", "disks_summary.json"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/disks_problem.json")).unwrap()).unwrap();
    assert_eq!(doc["kind"], "disks");
    assert_eq!(doc["N"], 40);
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["x0"].as_array().unwrap().len(), 80);

    // reloading the written problem reproduces the run
    let o = proxflow(
        dir.path(),
        &["disks", "--problem", "a/disks_problem.json", "--out", "c"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("a/disks_trajectory.csv")).unwrap(),
        fs::read(dir.path().join("c/disks_trajectory.csv")).unwrap()
    );
}

#[test]
fn disks_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["disks", "--N", "1"][..],
        &["disks", "--R", "0"],
        &["disks", "--n", "0"],
        &["disks", "--problem", "missing.json", "--N", "3"],
    ] {
        let o = proxflow(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
    fs::write(dir.path().join("bad.json"), "{\"kind\": \"disks\", \"N\": 2,").unwrap();
    let o = proxflow(dir.path(), &["disks", "--problem", "bad.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn study_outputs_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("problem.json"),
        r#"{"kind": "sliding", "d": 3, "C": 10.0, "alpha": 0.19634954084936207}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("study.json"),
        r#"{"problem": "problem.json", "schemes": ["pbd", "penalty"], "gamma": [10.0],
            "step_counts": [64, 128, 256], "T": 4.0, "reference": "analytic"}"#,
    )
    .unwrap();
    let o = proxflow(dir.path(), &["study", "study.json", "--out", "res"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("res/study_records.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "scheme,h,sup_error,avg_work,wall_time_s,status");
    assert_eq!(csv.lines().count(), 7);
    let orders: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/study_orders.json")).unwrap()).unwrap();
    assert_eq!(orders[0]["scheme"], "pbd");
    assert!(orders[0]["order"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("res/study_plot.gp").exists());

    fs::write(dir.path().join("broken.json"), "{\"schemes\": [\n  \"pbd\",\n}").unwrap();
    let o = proxflow(dir.path(), &["study", "broken.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    fs::write(
        dir.path().join("empty.json"),
        r#"{"problem": "problem.json", "schemes": [], "step_counts": [64], "T": 4.0, "reference": "analytic"}"#,
    )
    .unwrap();
    let o = proxflow(dir.path(), &["study", "empty.json"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = proxflow(dir.path(), &["verify", "geometry", "--out", "v"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("hypomonotonicity: checked=10000 violations=0"), "{out}");
    assert!(dir.path().join("v/verify_geometry.json").exists());

    let o = proxflow(dir.path(), &["verify", "geometry", "--out", "v", "--inject-violation", "distance_consistent"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("distance_consistent"), "{}", stderr(&o));

    let o = proxflow(dir.path(), &["verify", "physics"]);
    assert_eq!(code(&o), 2);
}
