use std::process::{Command, Output};

fn epicusp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epicusp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("not JSON: {l}: {e}")))
        .collect()
}

#[test]
fn wind_closed_form() {
    let out = epicusp(&["wind", "-a", "1", "-b", "3", "-s", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)[0]["value"], 3);
}

#[test]
fn wind_numeric_with_rational_weight() {
    let out = epicusp(&["wind", "-a", "1", "-b", "3", "-s", "-1/2", "--numeric"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &stdout_json(&out)[0];
    assert_eq!(v["value"], 1);
    assert_eq!(v["samples"], 4096);
}

#[test]
fn wind_on_curve_is_an_analysis_error() {
    let out = epicusp(&["wind", "-a", "1", "-b", "3", "-s", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)[0]["error"], "OnCurve");
}

#[test]
fn bad_arguments_exit_two() {
    for args in [
        vec!["wind", "-a", "3", "-b", "1", "-s", "0.2"],
        vec!["wind", "-a", "1", "-b", "3", "-s", "1.5"],
        vec!["wind", "-a", "1", "-b", "3"],
        vec!["frobnicate"],
    ] {
        let out = epicusp(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn cusps_of_one_three() {
    let out = epicusp(&[
        "cusps", "-a", "1", "-b", "3", "--s-grid", "128", "--t-grid", "128",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines = stdout_json(&out);
    assert_eq!(lines.len(), 2);
    for (line, t) in lines.iter().zip([0.25, 0.75]) {
        assert!((line["s"].as_f64().unwrap() + 0.5).abs() < 1e-6);
        assert!((line["t"].as_f64().unwrap() - t).abs() < 1e-6);
        assert_eq!(line["proven"], true);
    }
}

#[test]
fn predicted_locus_only() {
    let out = epicusp(&["cusps", "-a", "2", "-b", "5", "--predicted-only"]);
    let lines = stdout_json(&out);
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l["proven"] == false));
}

#[test]
fn symmetry_and_intersections() {
    let out = epicusp(&["symmetry", "-a", "1", "-b", "3", "-s", "0.4"]);
    assert_eq!(stdout_json(&out)[0]["verified"], true);
    let out = epicusp(&["intersect", "-a", "1", "-b", "3", "-s", "0"]);
    let records = stdout_json(&out);
    assert_eq!(records.len(), 3);
    assert!(records.iter().all(|r| r["on_rational_grid"] == true));
    let csv = epicusp(&[
        "intersect",
        "-a",
        "1",
        "-b",
        "3",
        "-s",
        "0",
        "--format",
        "csv",
    ]);
    assert!(String::from_utf8_lossy(&csv.stdout).starts_with("t1,t2,x,y,on_grid"));
}

#[test]
fn plots_are_written_and_reproducible() {
    let dir = std::env::temp_dir().join(format!("epicusp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let first = dir.join("one.svg");
    let second = dir.join("two.svg");
    for path in [&first, &second] {
        let out = epicusp(&[
            "plot",
            "--kind",
            "diagram",
            "-a",
            "1",
            "-b",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let svg = std::fs::read_to_string(&first).unwrap();
    assert_eq!(svg, std::fs::read_to_string(&second).unwrap());
    assert_eq!(svg.matches("class=\"cusp\"").count(), 2);

    let sweep = dir.join("sweep.svg");
    let out = epicusp(&[
        "sweep",
        "-a",
        "1",
        "-b",
        "3",
        "--steps",
        "4",
        "--out",
        sweep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&sweep).unwrap().contains("<svg "));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_single_check() {
    let out = epicusp(&["verify", "--only", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)[0]["passed"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_epicusp"))
        .args(["wind", "-a", "1", "-b", "2", "-s", "0.5"])
        .env("EPICUSP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_epicusp"))
        .args([
            "cusps", "-a", "1", "-b", "2", "--s-grid", "64", "--t-grid", "64",
        ])
        .env("EPICUSP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out).len(), 1);
}
