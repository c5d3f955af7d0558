use std::path::PathBuf;
use std::process::{Command, Output};

fn ksmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksmin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ksmin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn report_json_is_byte_identical_and_verified() {
    let a = ksmin(&["--json", "report", "--dim", "3"]);
    let b = ksmin(&["--json", "report", "--dim", "3", "--threads", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["ray_count"], 13);
    let claims = v["claims"].as_array().unwrap();
    assert!(claims.iter().all(|c| c["verified"] == true));
    assert!(claims
        .iter()
        .any(|c| c["name"] == "classical_bound" && c["computed"] == "7/2"));
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(ksmin(&["report", "--dim", "2"]).status.code(), Some(2));
    assert_eq!(ksmin(&["hexagon", "--triple", "1,2,3"]).status.code(), Some(2));
    assert_eq!(
        ksmin(&["bound", "--dim", "4", "--method", "blockdp"]).status.code(),
        Some(2)
    );
    assert_eq!(ksmin(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn construct_round_trips_through_a_file() {
    let path = scratch("rays5.json");
    let o = ksmin(&["construct", "--dim", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["dimension"], 5);
    assert_eq!(v["rays"].as_array().unwrap().len(), 25);
    assert_eq!(v["aliases"]["Z1"], "z3");
}

#[test]
fn bound_methods_agree() {
    for method in ["exhaustive", "bb"] {
        let o = ksmin(&["--json", "bound", "--dim", "4", "--method", method]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["maximum"], "4", "{method}");
    }
    for method in ["blockdp", "bb"] {
        let o = ksmin(&["--json", "bound", "--dim", "7", "--method", method]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["maximum"], "21/22", "{method}");
    }
}

#[test]
fn bound_reads_an_inequality_file() {
    let path = scratch("tiny.json");
    std::fs::write(
        &path,
        r#"{"variables": ["a", "b"], "constant": "0", "linear": {"a": "1", "b": "1"},
            "quadratic": [["a", "b", "-3/2"]], "classical_bound": "1", "quantum_value": "1",
            "requires_ks_constraints": false}"#,
    )
    .unwrap();
    let o = ksmin(&[
        "--json",
        "bound",
        "--dim",
        "3",
        "--method",
        "exhaustive",
        "--form",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["maximum"], "1");
}

#[test]
fn ks_search_and_hexagon() {
    let o = ksmin(&["--json", "ks-search", "--dim", "4"]);
    assert_eq!(
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap(),
        serde_json::json!([])
    );
    let o = ksmin(&["--json", "ks-search", "--dim", "3", "--limit", "3"]);
    assert_eq!(
        serde_json::from_slice::<serde_json::Value>(&o.stdout)
            .unwrap()
            .as_array()
            .unwrap()
            .len(),
        3
    );

    let o = ksmin(&["--json", "hexagon", "--triple", "2,4,6"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["quantum_value"], "3/2");
    assert_eq!(v["constrained_maximum"], "1");
    assert!(v["fully_constrained_maximum"].is_null());
}

#[test]
fn graph_export_and_realization() {
    let dot = scratch("line.dot");
    let o = ksmin(&[
        "--json",
        "graph",
        "--dim",
        "4",
        "--line",
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("graph {"));
    let graph = scratch("line.json");
    std::fs::write(&graph, &o.stdout).unwrap();

    let o = ksmin(&[
        "--json",
        "realize",
        "--graph",
        graph.to_str().unwrap(),
        "--dim",
        "4",
        "--seeds",
        "3",
        "--seed",
        "11",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["matched"], v["usable"]);
    assert_eq!(v["runs"][0]["seed"], 11);

    let text = stdout(&ksmin(&["graph", "--dim", "3"]));
    assert!(text.starts_with("13 vertices"));
}

#[test]
fn verify_quantum_and_probe() {
    let o = ksmin(&["verify-quantum", "--dim", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("[ok]")).count(), 7);

    let a = ksmin(&["--json", "probe", "--dim", "5", "--samples", "300", "--seed", "4"]);
    let b = ksmin(&[
        "--json",
        "probe",
        "--dim",
        "5",
        "--samples",
        "300",
        "--seed",
        "4",
        "--threads",
        "1",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
