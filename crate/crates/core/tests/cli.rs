use std::path::Path;
use std::process::{Command, Output};

use graphsteer::sweep::read_csv;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphsteer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn sweep_csv_is_deterministic_and_parses() {
    let args = ["sweep", "--family", "fourmode", "--points", "21"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let data = read_csv(a.stdout.as_slice()).unwrap();
    assert_eq!(data.records.len(), 21);
    assert!(data.columns.iter().any(|c| c == "G(A->CD)"));
    assert!(stdout(&a).starts_with("t2,weight,G(A->B),"));
}

#[test]
fn sweep_writes_file_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let out = run(&[
        "sweep",
        "--family",
        "tripartite",
        "--points",
        "11",
        "--quantities",
        "G(A->BC),G(B->C),MONO(A|B|C),NULL(B),LN(A|BC)",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["config"]["family"], "tripartite");
    assert_eq!(json["config"]["points"], 11);
    let records = json["records"].as_array().unwrap();
    assert_eq!(records.len(), 11);
    // G(A->BC) does not depend on the weight.
    let first = records[0]["G(A->BC)"].as_f64().unwrap();
    assert!(first > 0.0);
    for rec in records {
        assert!((rec["G(A->BC)"].as_f64().unwrap() - first).abs() < 1e-9);
        assert!(rec["MONO(A|B|C)"].as_f64().unwrap() >= -1e-9);
    }
}

#[test]
fn zero_squeezing_gives_zero_steering() {
    let out = run(&["sweep", "--family", "fourmode", "--r", "0", "--points", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let data = read_csv(out.stdout.as_slice()).unwrap();
    for rec in &data.records {
        assert!(rec.values.iter().all(|&v| v == 0.0), "{rec:?}");
    }
}

#[test]
fn t2_axis_range() {
    let out = run(&[
        "sweep",
        "--family",
        "tripartite",
        "--axis",
        "t2",
        "--range",
        "0.2:0.8",
        "--points",
        "4",
        "--quantities",
        "G(B->C)",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let data = read_csv(out.stdout.as_slice()).unwrap();
    let t2: Vec<f64> = data.records.iter().map(|r| r.t2).collect();
    assert_eq!(t2, vec![0.2, 0.4, 0.6, 0.8]);
}

#[test]
fn bad_quantity_lists_grammar() {
    let out = run(&["sweep", "--family", "tripartite", "--quantities", "G(A->Q)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("MONOIN(k|i|j)"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["sweep", "--family", "fivemode"],
        vec!["sweep", "--family", "tripartite", "--range", "3:1"],
        vec!["sweep", "--family", "tripartite", "--points", "1"],
        vec!["state", "--family", "fourmode", "--t2", "1.5"],
        vec!["sweep", "--family", "tripartite", "--r", "-1"],
        vec!["sweep", "--family", "tripartite", "--format", "xml"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("error:"));
    }
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = run(&[
        "sweep",
        "--family",
        "tripartite",
        "--points",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!Path::new(&path).exists());
}

#[test]
fn verify_passes() {
    let ok = run(&["verify", "--family", "fourmode", "--points", "21"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let text = stdout(&ok);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert!(!text.contains("FAIL"));

    // Entanglement persistence cannot hold without squeezing, but r = 0
    // skips that check; nothing else should fail either.
    let vac = run(&[
        "verify",
        "--family",
        "tripartite",
        "--r",
        "0",
        "--points",
        "5",
    ]);
    assert_eq!(vac.status.code(), Some(0), "{}", stdout(&vac));
}

#[test]
fn boundaries_report_four_mode_edges() {
    let out = run(&["boundaries", "--family", "fourmode", "--points", "81"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let find = |q: &str, t: &str| -> f64 {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("{q},{t},")))
            .unwrap_or_else(|| panic!("no {q} {t} row in\n{text}"));
        line.split(',').nth(2).unwrap().parse().unwrap()
    };
    assert!((find("G(A->B)", "onset") - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02);
    assert!((find("G(B->A)", "vanish") - 1.2247).abs() < 0.02);
    assert!((find("G(A->CD)", "one_way_upper") - 1.2247).abs() < 0.02);
    assert!((find("G(B->CD)", "one_way_lower") - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02);
}

#[test]
fn state_dump_formats() {
    let out = run(&["state", "--family", "fourmode", "--t2", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["max_diff"].as_f64().unwrap() <= 1e-10);
    let nus = json["symplectic_eigenvalues"].as_array().unwrap();
    assert_eq!(nus.len(), 4);
    assert!(nus.iter().all(|v| (v.as_f64().unwrap() - 1.0).abs() < 1e-9));
    assert_eq!(json["closed_form"].as_array().unwrap().len(), 8);
    assert_eq!(json["nullifiers"].as_array().unwrap().len(), 4);

    let csv = run(&["state", "--family", "tripartite", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = stdout(&csv);
    assert!(text.starts_with("section,row,col,value\n"));
    assert!(
        text.lines()
            .filter(|l| l.starts_with("closed_form,"))
            .count()
            == 36
    );
}
