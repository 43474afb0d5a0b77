//! Run manifests and the versioned JSON documents every command emits.

use gcod_core::partition::PartitionPlan;
use gcod_core::sim::SimReport;
use gcod_core::sparsify::RestructureMetrics;
use serde::{Deserialize, Serialize};

pub const PLAN_SCHEMA: &str = "gcod-plan/1";
pub const METRICS_SCHEMA: &str = "gcod-metrics/1";
pub const REPORT_SCHEMA: &str = "gcod-report/1";

/// Everything needed to reproduce a run, embedded verbatim in each emitted
/// document. No timestamps: identical manifests must yield byte-identical
/// outputs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: u64,
    pub classes: Option<usize>,
    pub subgraphs: Option<usize>,
    pub groups: Option<usize>,
    pub prune: Option<f64>,
    pub eta: Option<usize>,
    pub patch_size: Option<(usize, usize)>,
    pub hw_config: Option<String>,
    pub pipeline_mode: Option<String>,
    pub output: String,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, output: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            seed: 0,
            classes: None,
            subgraphs: None,
            groups: None,
            prune: None,
            eta: None,
            patch_size: None,
            hw_config: None,
            pipeline_mode: None,
            output: output.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PlanDocument {
    pub schema: String,
    pub manifest: RunManifest,
    pub plan: PartitionPlan,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub schema: String,
    pub manifest: RunManifest,
    pub metrics: RestructureMetrics,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    pub manifest: RunManifest,
    pub report: SimReport,
}
