//! Command-line contract: flags, emitted files, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gcod"))
}

fn write_power_law(path: &Path, n: usize, m: usize, seed: u64) {
    let g = gcod_core::graph::synth_power_law(n, m, seed).unwrap();
    std::fs::write(path, gcod_core::graph::to_edge_list(&g)).unwrap();
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn restructure(dir: &Path, graph: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "restructure".to_string(),
        "--graph".into(),
        graph.display().to_string(),
        "--seed".into(),
        "7".into(),
        "-o".into(),
        dir.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    bin().args(&args).output().unwrap()
}

#[test]
fn restructure_writes_the_contracted_files() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = tmp.path().join("g.el");
    write_power_law(&graph, 300, 3, 1);
    let out = tmp.path().join("out");
    let result = restructure(
        &out,
        &graph,
        &[
            "--classes", "2", "--subgraphs", "8", "--groups", "2", "--prune", "0.05", "--eta",
            "10",
        ],
    );
    assert!(result.status.success(), "{result:?}");
    assert!(out.join("plan.json").exists());
    assert!(out.join("graph.el").exists());
    assert!(out.join("metrics.json").exists());

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["schema"], "gcod-metrics/1");
    assert_eq!(metrics["manifest"]["command"], "restructure");
    assert!(metrics["metrics"]["nnz_after"].as_u64().unwrap() > 0);
}

#[test]
fn identity_restructure_keeps_every_edge() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = tmp.path().join("g.el");
    write_power_law(&graph, 200, 2, 2);
    let out = tmp.path().join("out");
    let result = restructure(
        &out,
        &graph,
        &[
            "--classes", "1", "--subgraphs", "1", "--groups", "1", "--prune", "0", "--eta", "1",
        ],
    );
    assert!(result.status.success());
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(
        metrics["metrics"]["nnz_before"],
        metrics["metrics"]["nnz_after"]
    );
}

#[test]
fn bad_arguments_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = tmp.path().join("g.el");
    write_power_law(&graph, 64, 2, 3);
    let result = restructure(&tmp.path().join("out"), &graph, &["--prune", "1.5"]);
    assert_eq!(result.status.code(), Some(2));

    let result = restructure(&tmp.path().join("out"), &graph, &["--patch", "banana"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn missing_or_malformed_inputs_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let result = restructure(
        &tmp.path().join("out"),
        &tmp.path().join("nope.el"),
        &[],
    );
    assert_eq!(result.status.code(), Some(3));

    let bad = tmp.path().join("bad.el");
    std::fs::write(&bad, "0 1\nnot numbers\n").unwrap();
    let result = restructure(&tmp.path().join("out"), &bad, &[]);
    assert_eq!(result.status.code(), Some(3));
}

fn prepared_run(tmp: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let graph = tmp.join("g.el");
    write_power_law(&graph, 400, 3, 5);
    let out = tmp.join("out");
    let result = restructure(
        &out,
        &graph,
        &[
            "--classes", "2", "--subgraphs", "8", "--groups", "2", "--prune", "0.05", "--eta",
            "10",
        ],
    );
    assert!(result.status.success());
    (out.join("plan.json"), out.join("graph.el"))
}

fn simulate(plan: Option<&Path>, graph: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "simulate".to_string(),
        "--graph".into(),
        graph.display().to_string(),
        "--feature-dim".into(),
        "16".into(),
        "--hidden-dims".into(),
        "16".into(),
        "--output-dim".into(),
        "4".into(),
        "--self-loops".into(),
        "--seed".into(),
        "7".into(),
        "-o".into(),
        out.display().to_string(),
    ];
    if let Some(plan) = plan {
        args.push("--plan".into());
        args.push(plan.display().to_string());
    }
    args.extend(extra.iter().map(|s| s.to_string()));
    bin().args(&args).output().unwrap()
}

#[test]
fn simulate_emits_a_versioned_report() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let report_path = tmp.path().join("report.json");
    let result = simulate(Some(&plan), &graph, &report_path, &["--mode", "efficiency"]);
    assert!(result.status.success(), "{result:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(doc["schema"], "gcod-report/1");
    assert_eq!(doc["report"]["engine"], "two-pronged");
    for field in [
        "cycles_total",
        "offchip_bytes_read",
        "offchip_bytes_written",
        "peak_onchip_bytes",
        "wall_latency_us",
        "pe_utilization",
    ] {
        assert!(
            !doc["report"][field].is_null(),
            "missing report field {field}"
        );
    }
    assert!(doc["report"]["forwarding_hit_rate"].is_number());
    assert!(doc["report"]["output"]["data"].is_array());
}

#[test]
fn resource_mode_uses_less_onchip_than_efficiency() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let eff = tmp.path().join("eff.json");
    let res = tmp.path().join("res.json");
    assert!(simulate(Some(&plan), &graph, &eff, &["--mode", "efficiency"])
        .status
        .success());
    assert!(simulate(Some(&plan), &graph, &res, &["--mode", "resource"])
        .status
        .success());
    let peak = |path: &Path| -> u64 {
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        doc["report"]["peak_onchip_bytes"].as_u64().unwrap()
    };
    assert!(peak(&res) <= peak(&eff));
}

#[test]
fn baseline_runs_without_a_plan() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, graph) = prepared_run(tmp.path());
    for style in ["distributed", "gathered"] {
        let report = tmp.path().join(format!("{style}.json"));
        let result = simulate(None, &graph, &report, &["--baseline", style]);
        assert!(result.status.success(), "{style}: {result:?}");
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(doc["report"]["engine"], style);
        assert!(doc["report"]["forwarding_hit_rate"].is_null());
    }
}

#[test]
fn two_pronged_without_plan_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, graph) = prepared_run(tmp.path());
    let result = simulate(None, &graph, &tmp.path().join("r.json"), &[]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn impossible_oracle_tolerance_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let result = simulate(
        Some(&plan),
        &graph,
        &tmp.path().join("r.json"),
        &["--oracle-tol", "-1.0"],
    );
    assert_eq!(result.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("oracle"), "stderr: {stderr}");
}

#[test]
fn feature_file_is_loaded() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let features = tmp.path().join("features.txt");
    let text: String = (0..400)
        .map(|i| format!("{} {} {}\n", i as f64 * 0.01, 1.0, -0.5))
        .collect();
    std::fs::write(&features, text).unwrap();
    let report = tmp.path().join("r.json");
    let result = simulate(
        Some(&plan),
        &graph,
        &report,
        &["--features", features.to_str().unwrap()],
    );
    assert!(result.status.success(), "{result:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    // Three input features instead of the default 64.
    assert_eq!(doc["manifest"]["inputs"].as_array().unwrap().len(), 3);
    assert!(doc["report"]["cycles_total"].as_u64().unwrap() > 0);

    // Wrong row count is an argument-class failure.
    std::fs::write(&features, "1.0 2.0\n").unwrap();
    let result = simulate(
        Some(&plan),
        &graph,
        &report,
        &["--features", features.to_str().unwrap()],
    );
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn labels_log_cross_entropy() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let labels = tmp.path().join("labels.txt");
    let text: String = (0..400)
        .map(|i| if i % 3 == 0 { "-1\n".to_string() } else { format!("{}\n", i % 4) })
        .collect();
    std::fs::write(&labels, text).unwrap();
    let result = simulate(
        Some(&plan),
        &graph,
        &tmp.path().join("r.json"),
        &["--labels", labels.to_str().unwrap()],
    );
    assert!(result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("cross_entropy="), "stderr: {stderr}");
}

#[test]
fn hardware_config_file_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let hw = tmp.path().join("hw.cfg");
    std::fs::write(&hw, "total_pes 16\nclock_mhz 100\n").unwrap();
    let report = tmp.path().join("r.json");
    let result = simulate(
        Some(&plan),
        &graph,
        &report,
        &["--hw", hw.to_str().unwrap()],
    );
    assert!(result.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    // 16 PEs instead of 4096 makes the run strongly compute-bound.
    assert!(doc["report"]["cycles_total"].as_u64().unwrap() > 10_000);

    std::fs::write(&hw, "mystery_knob 3\n").unwrap();
    let result = simulate(Some(&plan), &graph, &report, &["--hw", hw.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn compare_emits_data_and_ratio_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let eff = tmp.path().join("eff.json");
    let res = tmp.path().join("res.json");
    assert!(simulate(Some(&plan), &graph, &eff, &["--mode", "efficiency"])
        .status
        .success());
    assert!(simulate(Some(&plan), &graph, &res, &["--mode", "resource"])
        .status
        .success());
    let table = tmp.path().join("table.csv");
    let result = run(&[
        "compare",
        eff.to_str().unwrap(),
        res.to_str().unwrap(),
        "-o",
        table.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let csv = std::fs::read_to_string(&table).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4); // header + 2 data + 1 ratio
    assert!(lines[0].starts_with("name,cycles,latency_us,offchip_bytes"));
    assert!(lines[3].starts_with("res/eff,"));

    // Identical reports: every ratio is exactly 1.
    let table2 = tmp.path().join("table2.csv");
    assert!(run(&[
        "compare",
        eff.to_str().unwrap(),
        eff.to_str().unwrap(),
        "-o",
        table2.to_str().unwrap(),
    ])
    .status
    .success());
    let csv2 = std::fs::read_to_string(&table2).unwrap();
    let ratio_row = csv2.lines().nth(3).unwrap();
    let fields: Vec<&str> = ratio_row.split(',').collect();
    for value in &fields[1..6] {
        assert_eq!(*value, "1");
    }
}

#[test]
fn compare_rejects_schema_mismatch_with_exit_five() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let good = tmp.path().join("good.json");
    assert!(simulate(Some(&plan), &graph, &good, &[]).status.success());
    let bad = tmp.path().join("bad.json");
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&good).unwrap()).unwrap();
    doc["schema"] = serde_json::Value::String("gcod-report/999".to_string());
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let result = run(&[
        "compare",
        good.to_str().unwrap(),
        bad.to_str().unwrap(),
        "-o",
        tmp.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(5));
}

#[test]
fn compare_needs_two_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let good = tmp.path().join("good.json");
    assert!(simulate(Some(&plan), &graph, &good, &[]).status.success());
    let result = run(&[
        "compare",
        good.to_str().unwrap(),
        "-o",
        tmp.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn render_writes_a_p5_image() {
    let tmp = tempfile::tempdir().unwrap();
    let (plan, graph) = prepared_run(tmp.path());
    let pgm = tmp.path().join("heat.pgm");
    let result = run(&[
        "render",
        "--matrix",
        graph.to_str().unwrap(),
        "--plan",
        plan.to_str().unwrap(),
        "--max-side",
        "256",
        "-o",
        pgm.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5\n256 256\n255\n"));
    assert_eq!(bytes.len(), b"P5\n256 256\n255\n".len() + 256 * 256);
}

#[test]
fn render_missing_matrix_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run(&[
        "render",
        "--matrix",
        tmp.path().join("nope.el").to_str().unwrap(),
        "-o",
        tmp.path().join("x.pgm").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(3));
}
