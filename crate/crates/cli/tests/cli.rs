use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn lipgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipgame")).args(args).output().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = lipgame(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn upsilon_check_prints_the_counterexample() {
    let r = json_ok(&["check-lip", "--game", &fixture("upsilon_counter"), "--function", "upsilon"]);
    assert_eq!(r["command"], "check-lip");
    assert_eq!(r["results"]["verdict"], "fails");
    let cx = &r["results"]["counterexample"];
    assert_eq!(cx["from"], serde_json::json!([0, 0]));
    assert_eq!(cx["to"], serde_json::json!([1, 0]));
    assert_eq!(cx["values_before"], serde_json::json!(["10", "0"]));
    assert_eq!(cx["values_after"], serde_json::json!(["10", "1"]));
    assert!(r["provenance"].as_array().is_some_and(|p| !p.is_empty()));
}

#[test]
fn pi_and_psi_hold_on_the_same_fixture() {
    for f in ["pi", "psi"] {
        let r = json_ok(&["check-lip", "--game", &fixture("upsilon_counter"), "--function", f]);
        assert_eq!(r["results"]["verdict"], "holds", "{f}");
    }
}

#[test]
fn example_root_price_of_stability() {
    let r = json_ok(&["efficiency", "--game", &fixture("example_root"), "--p", "1"]);
    assert_eq!(r["results"]["price_of_stability"]["value"], "2.97");
    let inf = json_ok(&["efficiency", "--game", &fixture("example_root"), "--p", "inf"]);
    assert_eq!(inf["results"]["price_of_stability"]["value"], "1");
}

#[test]
fn unbounded_anarchy_is_flagged() {
    let r = json_ok(&["efficiency", "--game", &fixture("poa_unbounded")]);
    assert_eq!(r["results"]["price_of_anarchy"]["unbounded"], true);
}

#[test]
fn missing_file_exits_with_validation_code() {
    let out = lipgame(&["sne-enum", "--game", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn axiom_violations_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"kind":"congestion","players":2,
            "facilities":[{"name":"f","cost":{"load_table":["0","3","1"]}}],
            "strategies":[[[0]],[[0]]]}"#,
    )
    .unwrap();
    let out = lipgame(&["sne-enum", "--game", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("monotonicity"));
}

#[test]
fn budget_overrun_exits_with_budget_code() {
    let out = lipgame(&["check-lip", "--game", &fixture("example_root"), "--budget", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sne_enumeration_on_routing_fixture() {
    let r = json_ok(&["sne-enum", "--game", &fixture("routing_multi_sne")]);
    let totals: std::collections::BTreeSet<String> = r["results"]["equilibria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let sum: i64 = e["costs"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| c.as_str().unwrap().parse::<i64>().unwrap())
                .sum();
            sum.to_string()
        })
        .collect();
    assert_eq!(totals, ["1".to_string(), "3".to_string()].into());
}

#[test]
fn zigzag_fixture_routing_commands() {
    let convex = json_ok(&["routing", "sne-convex", "--game", &fixture("routing_pne_not_sne")]);
    assert_eq!(convex["results"]["verified_sne"], true);
    let identical = lipgame(&["routing", "sne-identical", "--game", &fixture("routing_pne_not_sne")]);
    assert_eq!(identical.status.code(), Some(2));
}

#[test]
fn splittable_approx_is_verified() {
    let r = json_ok(&["splittable", "approx", "--game", &fixture("splittable_discontinuity"), "--alpha", "1/10"]);
    assert_eq!(r["results"]["verified"], true);
    assert_eq!(r["config"]["alpha"], "0.1");
}

#[test]
fn dynamics_and_graph_reports() {
    let run = json_ok(&["dynamics", "run", "--game", &fixture("example_root"), "--start", "1,1,0"]);
    assert_eq!(run["results"]["terminal"]["profile"], serde_json::json!([0, 0, 0]));
    let graph = json_ok(&["dynamics", "graph", "--game", &fixture("example_root")]);
    assert_eq!(graph["results"]["acyclic"], true);
    let bad = lipgame(&["dynamics", "run", "--game", &fixture("example_root"), "--start", "0,9,0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_for_equal_seeds() {
    let args = [
        "dynamics",
        "run",
        "--game",
        &fixture("routing_multi_sne"),
        "--rule",
        "random",
        "--seed",
        "9",
    ];
    let a = lipgame(&args);
    let b = lipgame(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fairness_and_text_output() {
    let r = json_ok(&["fairness", "--game", &fixture("example_root")]);
    assert_eq!(r["results"]["fair_within_minimizers"], true);
    let out = lipgame(&["potential", "--game", &fixture("example_root"), "--format", "text"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("exponent: "));
}
