//! End-to-end tests of the `qgrad` binary: happy paths for every
//! subcommand, golden budget numbers, file-format round trips, and the
//! exit-code contract (0 on success, 2 on bad input).

use std::path::PathBuf;
use std::process::{Command, Output};

const RX_PQC: &str = r#"{
  "qubits": 1,
  "gates": [ { "param": "theta_1", "generator": [[1.0, "X"]] } ],
  "observable": [[1.0, "Z"]]
}"#;

const TWO_QUBIT_PQC: &str = r#"{
  "qubits": 2,
  "input_prep": [ {"type": "pauli_rotation", "word": "YI", "angle": 0.7} ],
  "gates": [
    { "param": "a", "generator": [[0.8, "ZZ"], [0.5, "XI"]] },
    { "param": "b", "generator": [[1.0, "XX"]] }
  ],
  "epilogue": [ {"type": "pauli_rotation", "word": "IX", "angle": 0.3} ],
  "observable": [[1.0, "ZI"], [0.5, "XY"], [0.25, "ZZ"]]
}"#;

fn write_fixture(name: &str, content: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn qgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgrad"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs the binary, asserts success, and parses stdout as JSON.
fn run_json(args: &[&str]) -> serde_json::Value {
    let out = qgrad(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn grad_psr_matches_the_closed_form() {
    let pqc = write_fixture("rx_grad.json", RX_PQC);
    let doc = run_json(&[
        "grad",
        "--pqc",
        pqc.to_str().unwrap(),
        "--theta",
        "0.9",
        "--param",
        "1",
        "--method",
        "psr",
    ]);
    // d/dθ <Z> on RX(θ)|0> is -sin θ.
    let value = doc["value"].as_f64().unwrap();
    assert!((value + 0.9f64.sin()).abs() < 1e-12, "{value}");
    assert_eq!(doc["distinct_circuits"], 2);
    assert_eq!(doc["tasks"], 2);
    assert_eq!(doc["method"], "psr");
}

#[test]
fn grad_methods_agree_through_the_cli() {
    let pqc = write_fixture("two_grad.json", TWO_QUBIT_PQC);
    let path = pqc.to_str().unwrap();
    let mut values = Vec::new();
    for method in ["fd", "psr", "ht", "dht", "rht", "rdht"] {
        let doc = run_json(&[
            "grad", "--pqc", path, "--theta", "0.4,-0.2", "--param", "1", "--method", method,
        ]);
        values.push(doc["value"].as_f64().unwrap());
    }
    for v in &values[1..] {
        assert!((v - values[0]).abs() < 1e-6, "{values:?}");
    }
}

#[test]
fn grad_sampling_is_seeded_and_reports_spread() {
    let pqc = write_fixture("rx_shots.json", RX_PQC);
    let args = [
        "grad",
        "--pqc",
        pqc.to_str().unwrap(),
        "--theta",
        "0.9",
        "--param",
        "1",
        "--method",
        "ht",
        "--shots",
        "20000",
        "--seed",
        "7",
    ];
    let doc = run_json(&args);
    let value = doc["value"].as_f64().unwrap();
    let stderr = doc["stderr"].as_f64().unwrap();
    assert!(stderr > 0.0);
    assert!((value + 0.9f64.sin()).abs() < 5.0 * stderr, "{doc}");
    assert_eq!(doc["shots"], 20000);
    // Same seed, same estimate — byte-identical output.
    assert_eq!(qgrad(&args).stdout, qgrad(&args).stdout);
}

#[test]
fn higher_constructions_agree_with_the_oracle() {
    let pqc = write_fixture("rx_higher.json", RX_PQC);
    let path = pqc.to_str().unwrap();
    let second_derivative = -(0.9f64.cos());
    let kfold = run_json(&[
        "higher",
        "--pqc",
        path,
        "--theta",
        "0.9",
        "--indices",
        "1,1",
        "--method",
        "kfold",
    ]);
    let dhtk = run_json(&[
        "higher",
        "--pqc",
        path,
        "--theta",
        "0.9",
        "--indices",
        "1,1",
        "--method",
        "dhtk",
    ]);
    let oracle = run_json(&[
        "higher",
        "--pqc",
        path,
        "--theta",
        "0.9",
        "--indices",
        "1,1",
        "--method",
        "oracle",
    ]);
    for doc in [&kfold, &dhtk, &oracle] {
        let value = doc["value"].as_f64().unwrap();
        assert!((value - second_derivative).abs() < 1e-10, "{doc}");
    }
    // Single-word generator: one circuit for the folded test, 2^k for
    // the insertion variant; ancilla accounting shows in the width.
    assert_eq!(kfold["distinct_circuits"], 1);
    assert_eq!(kfold["qubits"], 3);
    assert_eq!(kfold["depth"], 3);
    assert_eq!(dhtk["distinct_circuits"], 4);
    assert_eq!(dhtk["qubits"], 1);
    assert_eq!(oracle["distinct_circuits"], serde_json::Value::Null);
}

#[test]
fn cost_emits_one_report_per_hardware_method() {
    let pqc = write_fixture("two_cost.json", TWO_QUBIT_PQC);
    let path = pqc.to_str().unwrap();
    let doc = run_json(&["cost", "--pqc", path, "--param", "1"]);
    let reports = doc.as_array().unwrap();
    let methods: Vec<&str> = reports
        .iter()
        .map(|r| r["method"].as_str().unwrap())
        .collect();
    assert_eq!(methods, ["psr", "ht", "dht", "rht", "rdht"]);
    for report in reports {
        assert!(report["distinct_circuits"].as_u64().unwrap() >= 1);
        let efr = report["efr"].as_f64().unwrap();
        assert!((0.0..1.0).contains(&efr), "{report}");
    }

    let out = qgrad(&["cost", "--pqc", path, "--param", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(
        lines[0],
        "method,distinct_circuits,qubits,depth,cnot_count,efr"
    );
    assert!(lines[1].starts_with("psr,"));
    assert!(lines[5].starts_with("rdht,"));
}

#[test]
fn qad_reports_the_assignment_in_both_formats() {
    let pqc = write_fixture("two_qad.json", TWO_QUBIT_PQC);
    let path = pqc.to_str().unwrap();
    let doc = run_json(&["qad", "--pqc", path, "--metric", "count"]);
    assert_eq!(doc["metric"], "count");
    let choices = doc["choices"].as_array().unwrap();
    assert_eq!(choices.len(), 2);
    // Parameter 1's two-term generator has a two-level spectrum, so the
    // direct shift rule (2 circuits x 2 observable groups) wins; the
    // single-word parameter 2 takes the one-circuit folded test.
    assert_eq!(choices[0]["chosen"], "psr");
    assert_eq!(choices[0]["via_decomposition"], false);
    assert_eq!(choices[1]["chosen"], "ht");
    assert_eq!(doc["total_distinct_circuits"], 6);
    for choice in choices {
        assert_eq!(choice["candidates"].as_array().unwrap().len(), 5);
    }

    let out = qgrad(&["qad", "--pqc", path, "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "param,method,via_decomposition,distinct_circuits,efr"
    );
    assert!(lines[1].starts_with("1,psr,false,4,"));
    assert!(lines[2].starts_with("2,ht,false,2,"));
}

#[test]
fn bench_qnn_reports_the_locked_budget_and_writes_a_trace() {
    let trace = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("qnn_trace.csv");
    let doc = run_json(&[
        "bench",
        "qnn",
        "--steps",
        "2",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(doc["benchmark"], "qnn");
    assert_eq!(doc["selection"], "qad-count");
    assert_eq!(doc["circuits_per_iteration"], 7);
    assert_eq!(doc["samples"], 100);
    let methods: Vec<&str> = doc["methods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m.as_str().unwrap())
        .collect();
    assert_eq!(methods, ["ht", "rht", "psr"]);
    assert!(doc["final_loss"].as_f64().unwrap() < doc["initial_loss"].as_f64().unwrap());

    let text = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iteration,loss,distinct_circuits");
    assert_eq!(lines.len(), 4); // header + iterations 0..=2
    assert!(lines[1].starts_with("0,"));
    assert!(lines[3].starts_with("2,"));
    assert!(lines[1].ends_with(",7"));
}

#[test]
fn bench_qaoa_defaults_to_the_triangle() {
    let doc = run_json(&["bench", "qaoa", "--steps", "2"]);
    assert_eq!(doc["nodes"], 3);
    assert_eq!(doc["edges"], 3);
    assert_eq!(doc["max_cut"], 2);
    assert_eq!(doc["circuits_per_iteration"], 5);
    let methods: Vec<&str> = doc["methods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m.as_str().unwrap())
        .collect();
    assert_eq!(methods, ["psr", "ht"]);
}

#[test]
fn bench_qaoa_reads_an_edge_list_file() {
    let graph = write_fixture("square.graph", "# a 4-cycle\n0 1\n1 2\n2 3\n3 0\n");
    let doc = run_json(&[
        "bench",
        "qaoa",
        "--graph",
        graph.to_str().unwrap(),
        "--method",
        "dht",
        "--steps",
        "1",
    ]);
    assert_eq!(doc["nodes"], 4);
    assert_eq!(doc["edges"], 4);
    assert_eq!(doc["max_cut"], 4);
    assert_eq!(doc["selection"], "dht");
}

#[test]
fn bench_qaqc_shows_the_three_to_one_budget_ratio() {
    let rht = run_json(&[
        "bench", "qaqc", "--target", "ising", "--method", "rht", "--steps", "1",
    ]);
    let ht = run_json(&[
        "bench", "qaqc", "--target", "ising", "--method", "ht", "--steps", "1",
    ]);
    assert_eq!(rht["circuits_per_iteration"], 4);
    assert_eq!(ht["circuits_per_iteration"], 12);
    assert_eq!(rht["topology"], "ring");
    assert_eq!(rht["parameters"], 4);
}

#[test]
fn bench_qaqc_accepts_named_targets_and_line_topology() {
    let doc = run_json(&[
        "bench",
        "qaqc",
        "--target",
        "qft",
        "--topology",
        "line",
        "--steps",
        "1",
    ]);
    assert_eq!(doc["target"], "qft");
    assert_eq!(doc["topology"], "line");
    assert_eq!(doc["benchmark"], "qaqc");
}

#[test]
fn sweep_reports_the_ratio_grid_corners() {
    let doc = run_json(&["sweep", "--n", "4"]);
    let groups: Vec<u64> = doc["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g.as_u64().unwrap())
        .collect();
    assert_eq!(groups, [4, 3, 2, 1]);
    let ratios = doc["ratios"].as_array().unwrap();
    // Fully groupable observable, ungroupable generator and vice versa.
    assert_eq!(ratios[3][0], 4.0);
    assert_eq!(ratios[0][3], 0.25);
    // Matched fractions sit on the diagonal at 1.
    for (i, row) in ratios.iter().enumerate() {
        assert_eq!(row[i], 1.0);
    }
}

#[test]
fn pqc_json_round_trips_through_the_library_writer() {
    let original: qgrad::Pqc = qgrad::Pqc::from_json_str(TWO_QUBIT_PQC).unwrap();
    let rewritten = write_fixture("round_trip.json", &original.to_json_string().unwrap());
    let path = rewritten.to_str().unwrap();
    let doc = run_json(&[
        "grad", "--pqc", path, "--theta", "0.4,-0.2", "--param", "2", "--method", "dht",
    ]);
    let direct = qgrad::build_plan(&original, &[0.4, -0.2], 2, qgrad::GradMethod::Dht)
        .unwrap()
        .evaluate()
        .unwrap();
    assert!((doc["value"].as_f64().unwrap() - direct).abs() < 1e-12);
}

#[test]
fn bad_input_exits_with_code_two() {
    let pqc = write_fixture("rx_bad.json", RX_PQC);
    let path = pqc.to_str().unwrap();
    let not_json = write_fixture("not_a_pqc.json", "edges: everywhere");
    let cases: Vec<Vec<&str>> = vec![
        // Unreadable and unparsable files.
        vec![
            "grad",
            "--pqc",
            "/nonexistent.json",
            "--param",
            "1",
            "--method",
            "ht",
        ],
        vec![
            "grad",
            "--pqc",
            not_json.to_str().unwrap(),
            "--param",
            "1",
            "--method",
            "ht",
        ],
        // Bad values.
        vec!["grad", "--pqc", path, "--param", "1", "--method", "newton"],
        vec!["grad", "--pqc", path, "--param", "9", "--method", "ht"],
        vec![
            "grad", "--pqc", path, "--theta", "abc", "--param", "1", "--method", "ht",
        ],
        vec![
            "grad", "--pqc", path, "--theta", "0.1,0.2", "--param", "1", "--method", "ht",
        ],
        vec![
            "higher",
            "--pqc",
            path,
            "--indices",
            "0",
            "--method",
            "kfold",
        ],
        vec!["higher", "--pqc", path, "--indices", "1", "--method", "qpe"],
        vec!["cost", "--pqc", path, "--param", "1", "--format", "yaml"],
        vec!["qad", "--pqc", path, "--metric", "speed"],
        vec!["bench", "qaqc", "--target", "ghz"],
        vec!["bench", "qaoa", "--graph", "/nonexistent.graph"],
        vec!["sweep", "--n", "3"],
        // Missing required arguments (handled by the parser).
        vec!["grad", "--pqc", path],
    ];
    for case in cases {
        let out = qgrad(&case);
        assert_eq!(
            out.status.code(),
            Some(2),
            "case {case:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stderr.starts_with(b"error"), "case {case:?}");
    }
}

#[test]
fn help_exits_cleanly_and_names_every_subcommand() {
    let out = qgrad(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for word in ["grad", "higher", "cost", "qad", "bench", "sweep"] {
        assert!(text.contains(word), "help misses {word}");
    }
}
