mod manifest;

use clap::{Args, Parser, Subcommand};
use gcod_core::gcn::{cross_entropy, gcn_forward, DenseMatrix, ForwardOrder, WeightSet};
use gcod_core::graph::{load_edge_list, load_features, load_labels, to_edge_list, Graph};
use gcod_core::render::render_heatmap;
use gcod_core::sim::{
    simulate_baseline, simulate_end_to_end, BaselineStyle, HardwareConfig, PipelineMode,
    SimReport,
};
use gcod_core::sparsify::{restructure_pipeline, SparsifyConfig};
use gcod_core::Error as CoreError;
use manifest::{
    MetricsDocument, PlanDocument, ReportDocument, RunManifest, METRICS_SCHEMA, PLAN_SCHEMA,
    REPORT_SCHEMA,
};
use std::path::{Path, PathBuf};

const EXIT_ARGUMENT: i32 = 2;
const EXIT_IO: i32 = 3;
const EXIT_ORACLE: i32 = 4;
const EXIT_SCHEMA: i32 = 5;

struct Failure {
    code: i32,
    msg: String,
}

type CmdResult = Result<(), Failure>;

fn fail(code: i32, msg: impl Into<String>) -> Failure {
    Failure {
        code,
        msg: msg.into(),
    }
}

fn core_fail(err: CoreError) -> Failure {
    let code = match err {
        CoreError::Parse { .. } | CoreError::Range { .. } => EXIT_IO,
        _ => EXIT_ARGUMENT,
    };
    fail(code, err.to_string())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| fail(EXIT_IO, format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, bytes)
        .map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut out = serde_json::to_vec_pretty(value)
        .map_err(|e| fail(EXIT_IO, format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Parser)]
#[command(
    name = "gcod",
    version,
    about = "Graph restructuring and two-pronged GCN accelerator simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition, reorder, and prune a graph into denser/sparser workloads.
    Restructure(RestructureArgs),
    /// Simulate the accelerator (or a baseline) and oracle-check the result.
    Simulate(SimulateArgs),
    /// Tabulate reports side by side with ratios against the first.
    Compare(CompareArgs),
    /// Render an adjacency heatmap as a binary PGM.
    Render(RenderArgs),
}

#[derive(Args)]
struct RestructureArgs {
    /// Edge-list input ("N <count>" header optional, one "u v" per line).
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 8)]
    subgraphs: usize,
    #[arg(long, default_value_t = 2)]
    groups: usize,
    /// Target prune ratio p in [0, 1).
    #[arg(long, default_value_t = 0.05)]
    prune: f64,
    /// Structural pruning threshold.
    #[arg(long, default_value_t = 10)]
    eta: usize,
    /// Patch grid as ROWSxCOLS, e.g. 64x64; defaults to a density-scaled size.
    #[arg(long)]
    patch: Option<String>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Sweep classes {1,2,3,4} x subgraphs {8,12,16,20} and emit grid.csv.
    #[arg(long)]
    grid: bool,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Partition plan JSON produced by `restructure` (two-pronged runs).
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Edge list in the plan's permuted node ids.
    #[arg(long)]
    graph: PathBuf,
    /// Hardware key-value config; defaults apply when omitted.
    #[arg(long)]
    hw: Option<PathBuf>,
    /// Pipeline mode: "efficiency" or "resource".
    #[arg(long, default_value = "efficiency")]
    mode: String,
    /// Run a baseline instead of the two-pronged engine: "gathered" or
    /// "distributed".
    #[arg(long)]
    baseline: Option<String>,
    /// Feature file (one row of reals per node); seeded synthesis otherwise.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Label file (one integer per line, -1 = unlabeled); logs cross-entropy.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    feature_dim: usize,
    /// Comma-separated hidden widths, e.g. "16" or "64,32".
    #[arg(long, default_value = "16")]
    hidden_dims: String,
    #[arg(long, default_value_t = 8)]
    output_dim: usize,
    /// Add self-loops during adjacency normalization.
    #[arg(long)]
    self_loops: bool,
    /// Direct-mapped row-cache size of the gathered baseline.
    #[arg(long, default_value_t = 64)]
    gathered_cache_rows: usize,
    /// Relative tolerance of the oracle check.
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    oracle_tol: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Report path.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more report JSON files.
    reports: Vec<PathBuf>,
    /// CSV output path.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Edge-list input to render.
    #[arg(long)]
    matrix: PathBuf,
    /// Optional plan JSON: class boundaries mid-gray, group boundaries black.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Image side limit; the matrix is max-pooled down to it.
    #[arg(long, default_value_t = 1024)]
    max_side: usize,
    /// PGM output path.
    #[arg(short, long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Restructure(args) => cmd_restructure(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Render(args) => cmd_render(args),
    };
    if let Err(f) = result {
        eprintln!("error: {}", f.msg);
        std::process::exit(f.code);
    }
}

fn parse_patch(text: &str) -> Result<(usize, usize), Failure> {
    let (r, c) = text
        .split_once('x')
        .ok_or_else(|| fail(EXIT_ARGUMENT, format!("bad patch \"{text}\", expected RxC")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| fail(EXIT_ARGUMENT, format!("bad patch \"{text}\": {e}")))
    };
    Ok((parse(r)?, parse(c)?))
}

fn cmd_restructure(args: RestructureArgs) -> CmdResult {
    let patch_size = args.patch.as_deref().map(parse_patch).transpose()?;
    let graph_text = read_file(&args.graph)?;
    let graph = load_edge_list(&graph_text).map_err(core_fail)?;
    let cfg = SparsifyConfig {
        target_prune_ratio: args.prune,
        eta: args.eta,
        patch_size,
        ..SparsifyConfig::default()
    };
    let mut man = RunManifest::new("restructure", &args.out.display().to_string());
    man.inputs = vec![args.graph.display().to_string()];
    man.seed = args.seed;
    man.classes = Some(args.classes);
    man.subgraphs = Some(args.subgraphs);
    man.groups = Some(args.groups);
    man.prune = Some(args.prune);
    man.eta = Some(args.eta);
    man.patch_size = patch_size;

    if args.grid {
        let mut csv = String::from(
            "classes,subgraphs,groups,nnz_before,nnz_after,l_pola_before,l_pola_after,\
             off_diag_before,off_diag_after,pruned_by_ratio,pruned_by_patch,guard_kept,\
             patch_rows,patch_cols,max_balance_ratio\n",
        );
        for classes in [1usize, 2, 3, 4] {
            for subgraphs in [8usize, 12, 16, 20] {
                let outcome =
                    restructure_pipeline(&graph, classes, subgraphs, args.groups, &cfg)
                        .map_err(core_fail)?;
                let m = &outcome.metrics;
                let max_balance = m
                    .balance_ratio_per_class
                    .iter()
                    .cloned()
                    .fold(0.0f64, f64::max);
                csv.push_str(&format!(
                    "{classes},{subgraphs},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    args.groups,
                    m.nnz_before,
                    m.nnz_after,
                    m.l_pola_before,
                    m.l_pola_after,
                    m.off_diag_fraction_before,
                    m.off_diag_fraction_after,
                    m.pruned_by_ratio,
                    m.pruned_by_patch,
                    m.guard_kept_edges,
                    m.patch_size.0,
                    m.patch_size.1,
                    max_balance,
                ));
            }
        }
        return write_file(&args.out.join("grid.csv"), csv.as_bytes());
    }

    let outcome = restructure_pipeline(
        &graph,
        args.classes,
        args.subgraphs,
        args.groups,
        &cfg,
    )
    .map_err(core_fail)?;

    let plan_doc = PlanDocument {
        schema: PLAN_SCHEMA.to_string(),
        manifest: man.clone(),
        plan: outcome.plan.clone(),
    };
    write_file(&args.out.join("plan.json"), &to_json(&plan_doc)?)?;

    // Restructured adjacency as an edge list over permuted ids.
    let mut edges = Vec::new();
    outcome.a_final.for_each_entry(|r, c, _| {
        if r < c {
            edges.push((r, c));
        }
    });
    let restructured = Graph::from_edges(graph.num_nodes, edges).map_err(core_fail)?;
    write_file(
        &args.out.join("graph.el"),
        to_edge_list(&restructured).as_bytes(),
    )?;

    let metrics_doc = MetricsDocument {
        schema: METRICS_SCHEMA.to_string(),
        manifest: man,
        metrics: outcome.metrics,
    };
    write_file(&args.out.join("metrics.json"), &to_json(&metrics_doc)?)
}

fn parse_hidden_dims(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|e| fail(EXIT_ARGUMENT, format!("bad hidden dims \"{text}\": {e}")))
        })
        .collect()
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let graph_text = read_file(&args.graph)?;
    let graph = load_edge_list(&graph_text).map_err(core_fail)?;
    let n = graph.num_nodes;

    let x = match &args.features {
        Some(path) => load_features(&read_file(path)?, n).map_err(core_fail)?,
        None => DenseMatrix::random(n, args.feature_dim, args.seed),
    };
    let mut dims = vec![x.cols];
    dims.extend(parse_hidden_dims(&args.hidden_dims)?);
    dims.push(args.output_dim);
    let weights = WeightSet::seeded(&dims, args.seed.wrapping_add(1)).map_err(core_fail)?;

    let hw = match &args.hw {
        Some(path) => HardwareConfig::parse(&read_file(path)?).map_err(core_fail)?,
        None => HardwareConfig::default(),
    };
    let a_hat = graph.normalize_adjacency(args.self_loops).map_err(core_fail)?;

    let mut man = RunManifest::new("simulate", &args.out.display().to_string());
    man.inputs = vec![args.graph.display().to_string()];
    if let Some(p) = &args.plan {
        man.inputs.push(p.display().to_string());
    }
    if let Some(p) = &args.features {
        man.inputs.push(p.display().to_string());
    }
    man.seed = args.seed;
    man.hw_config = args.hw.as_ref().map(|p| p.display().to_string());

    let report: SimReport = match args.baseline.as_deref() {
        Some(style) => {
            let style = match style {
                "gathered" => BaselineStyle::Gathered,
                "distributed" => BaselineStyle::Distributed,
                other => {
                    return Err(fail(
                        EXIT_ARGUMENT,
                        format!("unknown baseline \"{other}\" (gathered|distributed)"),
                    ))
                }
            };
            man.pipeline_mode = Some(format!("baseline-{}", style.as_str()));
            simulate_baseline(&a_hat, &x, &weights, &hw, style, args.gathered_cache_rows)
                .map_err(core_fail)?
        }
        None => {
            let mode = match args.mode.as_str() {
                "efficiency" => PipelineMode::EfficiencyAware,
                "resource" => PipelineMode::ResourceAware,
                other => {
                    return Err(fail(
                        EXIT_ARGUMENT,
                        format!("unknown mode \"{other}\" (efficiency|resource)"),
                    ))
                }
            };
            man.pipeline_mode = Some(mode.as_str().to_string());
            // Advisory only: the efficiency-aware pipeline pays off when the
            // widest layer output fits on-chip, otherwise resource-aware
            // avoids the spills.
            let widest_out = dims[1..].iter().max().copied().unwrap_or(0);
            let output_fits = n * widest_out * 4 <= hw.onchip_bytes;
            let advised = if output_fits {
                PipelineMode::EfficiencyAware
            } else {
                PipelineMode::ResourceAware
            };
            if advised != mode {
                eprintln!(
                    "note: outputs {} on-chip; the {} pipeline is likely the better fit",
                    if output_fits { "fit" } else { "do not fit" },
                    advised.as_str()
                );
            }
            let plan_path = args.plan.as_ref().ok_or_else(|| {
                fail(EXIT_ARGUMENT, "two-pronged simulation needs --plan")
            })?;
            let plan_doc: PlanDocument = serde_json::from_str(&read_file(plan_path)?)
                .map_err(|e| fail(EXIT_IO, format!("bad plan JSON: {e}")))?;
            if plan_doc.schema != PLAN_SCHEMA {
                return Err(fail(
                    EXIT_SCHEMA,
                    format!("plan schema {} is not {PLAN_SCHEMA}", plan_doc.schema),
                ));
            }
            simulate_end_to_end(&a_hat, &plan_doc.plan, &x, &weights, &hw, mode)
                .map_err(core_fail)?
        }
    };

    // Oracle check: the simulated schedule must reproduce the functional
    // forward pass. A failure here is a correctness bug, never silent.
    let oracle =
        gcn_forward(&a_hat, &x, &weights, ForwardOrder::CombinationFirst).map_err(core_fail)?;
    let rel = report.output.max_rel_diff(&oracle);
    if rel > args.oracle_tol || rel.is_nan() {
        return Err(fail(
            EXIT_ORACLE,
            format!(
                "oracle mismatch: max relative difference {rel:e} exceeds {:e}",
                args.oracle_tol
            ),
        ));
    }

    if let Some(path) = &args.labels {
        let (labels, mask) = load_labels(&read_file(path)?, n).map_err(core_fail)?;
        let ce = cross_entropy(&report.output, &labels, &mask).map_err(core_fail)?;
        eprintln!(
            "cross_entropy={} clamped={} labeled={}",
            ce.loss,
            ce.clamped,
            mask.iter().filter(|&&m| m).count()
        );
    }

    let doc = ReportDocument {
        schema: REPORT_SCHEMA.to_string(),
        manifest: man,
        report,
    };
    write_file(&args.out, &to_json(&doc)?)
}

fn cmd_compare(args: CompareArgs) -> CmdResult {
    if args.reports.len() < 2 {
        return Err(fail(EXIT_ARGUMENT, "compare needs at least two reports"));
    }
    struct Row {
        name: String,
        cycles: u64,
        latency_us: f64,
        offchip_bytes: u64,
        peak_onchip: u64,
        energy_pj: f64,
        hit_rate: Option<f64>,
    }
    let mut rows = Vec::new();
    for path in &args.reports {
        let doc: ReportDocument = serde_json::from_str(&read_file(path)?)
            .map_err(|e| fail(EXIT_IO, format!("bad report {}: {e}", path.display())))?;
        if doc.schema != REPORT_SCHEMA {
            return Err(fail(
                EXIT_SCHEMA,
                format!(
                    "{}: schema {} is not {REPORT_SCHEMA}",
                    path.display(),
                    doc.schema
                ),
            ));
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        rows.push(Row {
            name,
            cycles: doc.report.cycles_total,
            latency_us: doc.report.wall_latency_us,
            offchip_bytes: doc.report.offchip_total(),
            peak_onchip: doc.report.peak_onchip_bytes,
            energy_pj: doc.report.energy.total_pj,
            hit_rate: doc.report.forwarding_hit_rate,
        });
    }
    let mut csv = String::from("name,cycles,latency_us,offchip_bytes,peak_onchip,energy_pj,hit_rate\n");
    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.name,
            row.cycles,
            row.latency_us,
            row.offchip_bytes,
            row.peak_onchip,
            row.energy_pj,
            fmt_opt(row.hit_rate),
        ));
    }
    let base = &rows[0];
    let ratio = |num: f64, den: f64| if den == 0.0 { f64::NAN } else { num / den };
    for row in rows.iter().skip(1) {
        let hit = match (row.hit_rate, base.hit_rate) {
            (Some(a), Some(b)) if b != 0.0 => Some(a / b),
            _ => None,
        };
        csv.push_str(&format!(
            "{}/{},{},{},{},{},{},{}\n",
            row.name,
            base.name,
            ratio(row.cycles as f64, base.cycles as f64),
            ratio(row.latency_us, base.latency_us),
            ratio(row.offchip_bytes as f64, base.offchip_bytes as f64),
            ratio(row.peak_onchip as f64, base.peak_onchip as f64),
            ratio(row.energy_pj, base.energy_pj),
            fmt_opt(hit),
        ));
    }
    write_file(&args.out, csv.as_bytes())
}

fn cmd_render(args: RenderArgs) -> CmdResult {
    let graph = load_edge_list(&read_file(&args.matrix)?).map_err(core_fail)?;
    let matrix = graph.adjacency();
    let plan_doc = match &args.plan {
        Some(path) => {
            let doc: PlanDocument = serde_json::from_str(&read_file(path)?)
                .map_err(|e| fail(EXIT_IO, format!("bad plan JSON: {e}")))?;
            if doc.schema != PLAN_SCHEMA {
                return Err(fail(
                    EXIT_SCHEMA,
                    format!("plan schema {} is not {PLAN_SCHEMA}", doc.schema),
                ));
            }
            Some(doc)
        }
        None => None,
    };
    if args.max_side == 0 {
        return Err(fail(EXIT_ARGUMENT, "max side must be positive"));
    }
    let pgm = render_heatmap(&matrix, plan_doc.as_ref().map(|d| &d.plan), args.max_side);
    write_file(&args.out, &pgm.encode())
}
