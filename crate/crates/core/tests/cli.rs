use std::path::PathBuf;
use std::process::{Command, Output};

fn surfcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfcalc"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn number_theory_subcommands() {
    let o = surfcalc(&["hj", "64", "39"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "[2, 3, 5, 3]\n");
    let o = surfcalc(&["chain", "2", "6", "2", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1/49(1,27) chain [2, 6, 2, 3] class Wahl(7,4)"));
    assert_eq!(stdout(&surfcalc(&["wahl", "24", "5"])), "[5, 7, 2, 2, 3, 2, 2, 2]\n");
    assert!(stdout(&surfcalc(&["classify", "4", "3"])).contains("class A3 milnor 3 qg_dim 3"));
    assert!(stdout(&surfcalc(&["classify", "5", "2"])).contains("class NotT"));
}

#[test]
fn invalid_input_exits_2() {
    for args in [
        &["hj", "6", "3"][..],
        &["hj", "x", "1"],
        &["chain", "1", "3"],
        &["chain"],
        &["wahl", "8", "4"],
        &["classify", "1", "0"],
        &["frobnicate"],
        &["run", "/nonexistent/file.json"],
    ] {
        let o = surfcalc(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn run_writes_report_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("out.json");
    let dots = dir.path().join("dot");
    let o = surfcalc(&[
        "run",
        &scenario("godeaux_Yprime"),
        "--report",
        report.to_str().unwrap(),
        "--dot",
        dots.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.trim_end().ends_with("35/35 assertions passed"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["summary"]["passed"], 35);
    let dot = std::fs::read_to_string(dots.join("C85.dot")).unwrap();
    assert!(dot.contains("\"l\" -- \"S\""));
    assert!(dots.join("C74.dot").exists());
}

#[test]
fn failing_assertion_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("godeaux_section6"))
        .unwrap()
        .replacen("\"Wahl(24,5)\"", "\"Wahl(24,7)\"", 1);
    let f = dir.path().join("bad.json");
    std::fs::write(&f, text).unwrap();
    let o = surfcalc(&["run", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL chain_sing"));
    assert!(out.trim_end().ends_with("6/7 assertions passed"));
}

#[test]
fn report_bytes_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = surfcalc(&["run", &scenario("campedelli_Xprime"), "--report", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
