//! End-to-end checks of the command-line surface: report content, flag
//! handling, stdin input, and model round-trips through the real binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qshedge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 report")
}

#[test]
fn support_report_lists_supports_and_polar_atoms() {
    let out = run(&["support", &fixture("binomial.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("supp Y = [8.0000000000000000e1, 1.2000000000000000e2]"));
    assert!(text.contains("supp dY = [-2.0000000000000000e1, 2.0000000000000000e1]"));
    assert!(text.contains("polar atoms = []"));
}

#[test]
fn support_flags_polar_atoms() {
    let model = r#"{
        "schema": 1,
        "kind": "one_period",
        "d": 1,
        "y": [100.0],
        "atoms": [{"y": [80.0]}, {"y": [120.0]}, {"y": [500.0]}],
        "priors": [[0.5, 0.5, 0.0]]
    }"#;
    let mut child = Command::new(env!("CARGO_BIN_EXE_qshedge"))
        .args(["support", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(model.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("polar atoms = [2]"), "report was: {text}");
    assert!(!text.contains("5.0000000000000000e2"), "polar value leaked into the support");
}

#[test]
fn price_report_contains_both_routes() {
    let out = run(&["price", &fixture("binomial.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("price = 1.0000000000000000e1"));
    assert!(text.contains("theta = 5.0000000000000000e-1"));
    assert!(text.contains("closedness = StrictlyClosed"));
    assert!(text.contains("route discrepancy = 0.0000000000000000e0"));
    assert!(text.contains("slack[0]"));
    assert!(text.contains("slack[1]"));
}

#[test]
fn price_flag_overrides_model_payoff() {
    // The model carries call(100); the flag reprices a call at 110:
    // chord through (80, 0) and (120, 10) at 100 gives 5.
    let out = run(&["price", &fixture("binomial.json"), "--payoff", "call:110"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("price = 5.0000000000000000e0"));
}

#[test]
fn degenerate_market_prices_table_maximum() {
    let model = r#"{
        "schema": 1,
        "kind": "one_period",
        "d": 1,
        "y": [100.0],
        "atoms": [{"y": [100.0], "claim": 1.0}, {"y": [100.0], "claim": 4.0}],
        "priors": [[0.5, 0.5]]
    }"#;
    let mut child = Command::new(env!("CARGO_BIN_EXE_qshedge"))
        .args(["price", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(model.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("price = 4.0000000000000000e0"), "report: {text}");
    assert!(text.contains("closedness = DegenerateClosed"));
    assert!(text.contains("route discrepancy = n/a (per-atom claim)"));
}

#[test]
fn oracle_flag_appends_cross_checks() {
    let out = run(&["price", &fixture("binomial.json"), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let dual_gap: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("oracle dual gap = "))
        .expect("dual gap line")
        .parse()
        .unwrap();
    assert!(dual_gap.abs() < 1e-9, "dual gap {dual_gap}");
    assert!(text.contains("oracle grid price = "));
    assert!(text.contains("oracle envelope = "));

    let out = run(&["check", &fixture("ip.json"), "--oracle"]);
    assert_eq!(out.status.code(), Some(3));
    let text = stdout(&out);
    assert!(text.contains("oracle hull membership = false"));
    assert!(text.contains("oracle interval rule = false"));

    let out = run(&["check", &fixture("tree_two_period.json"), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("oracle grid ip = false"));

    let out = run(&["hedge", &fixture("tree_two_period.json"), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("oracle worst node gap = "));
}

#[test]
fn check_reports_certificates() {
    let out = run(&["check", &fixture("vertex.json")]);
    assert_eq!(out.status.code(), Some(4));
    let text = stdout(&out);
    assert!(text.contains("classification = AIP_only"));
    assert!(text.contains("aip = true"));
    assert!(text.contains("na = false"));
    assert!(text.contains("na violation = 1.0000000000000000e0"));

    let out = run(&["check", &fixture("ip.json")]);
    assert_eq!(out.status.code(), Some(3));
    let text = stdout(&out);
    assert!(text.contains("classification = IP"));
    assert!(text.contains("ip direction = -1.0000000000000000e0"));
    assert!(text.contains("ip margin = 1.0000000000000000e1"));
}

#[test]
fn hedge_reports_nodes_depth_by_depth() {
    let out = run(&["hedge", &fixture("tree_two_period.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let root_pos = text.find("root cost = 1.1000000000000000e1").expect("root line");
    let leaf_pos = text.find("depth 2: node 3").expect("leaf line");
    assert!(leaf_pos < root_pos, "leaves print before the root");
    assert!(text.contains("depth 1: node 2 value = 2.2000000000000000e1"));
}

#[test]
fn hedge_detects_global_ip() {
    let model = r#"{
        "schema": 1,
        "kind": "tree",
        "horizon": 1,
        "nodes": [
            {"id": 0, "depth": 0, "price": [100.0], "children": [1, 2],
             "child_priors": [[0.5, 0.5]]},
            {"id": 1, "depth": 1, "price": [110.0]},
            {"id": 2, "depth": 1, "price": [120.0]}
        ],
        "payoff": {"call": {"strike": 100.0}}
    }"#;
    let mut child = Command::new(env!("CARGO_BIN_EXE_qshedge"))
        .args(["hedge", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(model.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("node 0"), "stderr: {err}");
}

#[test]
fn commands_reject_wrong_model_kind() {
    assert_eq!(
        run(&["support", &fixture("tree_two_period.json")]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["hedge", &fixture("binomial.json")]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["spectate", &fixture("binomial.json")]).status.code(), Some(2));
}

#[test]
fn tolerance_and_normalize_flags() {
    let out = run(&[
        "price",
        &fixture("binomial.json"),
        "--tolerance",
        "1e-7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("price = 1.0000000000000000e1"));

    // Unnormalized weights fail plainly and pass with --normalize.
    let model = r#"{
        "schema": 1,
        "kind": "one_period",
        "d": 1,
        "y": [100.0],
        "atoms": [{"y": [80.0]}, {"y": [120.0]}],
        "priors": [[1.0, 1.0]],
        "payoff": {"call": {"strike": 100.0}}
    }"#;
    let run_stdin = |extra: &[&str]| {
        let mut args = vec!["price", "-"];
        args.extend_from_slice(extra);
        let mut child = Command::new(env!("CARGO_BIN_EXE_qshedge"))
            .args(&args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child
            .stdin
            .take()
            .unwrap()
            .write_all(model.as_bytes())
            .unwrap();
        child.wait_with_output().unwrap()
    };
    assert_eq!(run_stdin(&[]).status.code(), Some(2));
    let ok = run_stdin(&["--normalize"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("price = 1.0000000000000000e1"));
}

#[test]
fn two_asset_market_reports_tuples() {
    let model = r#"{
        "schema": 1,
        "kind": "one_period",
        "d": 2,
        "y": [100.0, 50.0],
        "atoms": [{"y": [80.0, 40.0]}, {"y": [120.0, 60.0]}],
        "priors": [[0.5, 0.5]],
        "payoff": {"linear": {"coeffs": [1.0, 2.0]}}
    }"#;
    let run_stdin = |cmd: &str| {
        let mut child = Command::new(env!("CARGO_BIN_EXE_qshedge"))
            .args([cmd, "-"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child
            .stdin
            .take()
            .unwrap()
            .write_all(model.as_bytes())
            .unwrap();
        child.wait_with_output().unwrap()
    };
    let out = run_stdin("support");
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("supp Y = [(8.0000000000000000e1, 4.0000000000000000e1), (1.2000000000000000e2, 6.0000000000000000e1)]"),
        "report: {text}"
    );

    // Linear payoff y1 + 2 y2 is replicable: price = 100 + 2*50 = 200.
    let out = run_stdin("price");
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("price = 2.0000000000000000e2"), "report: {text}");
    assert!(text.contains("route discrepancy = 0.0000000000000000e0"));
}

#[test]
fn model_round_trips_bit_exactly() {
    use qshedge::model::{parse_model, serialize_model};
    for name in ["binomial.json", "vertex.json", "ip.json", "tree_two_period.json"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let model = parse_model(&text).unwrap();
        let json = serialize_model(&model);
        let again = parse_model(&json).unwrap();
        assert_eq!(model, again, "round-trip changed {name}");
        // And a second serialization is byte-identical.
        assert_eq!(json, serialize_model(&again));
    }
}
