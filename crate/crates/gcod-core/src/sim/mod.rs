//! Traffic/cycle/energy model of the two-pronged accelerator plus abstract
//! gathered/distributed baselines. Every simulated schedule performs the real
//! double-precision arithmetic so outputs can be checked against the
//! functional oracle.
//!
//! Cost model in one place:
//! - one MAC per PE per cycle; phase cycles per chunk are
//!   max(ceil(MACs / PEs), ceil(bytes moved / (bandwidth * share)));
//!   chunks run in parallel, layers and phases run back to back.
//! - capacity decisions (buffer residency, forwarding windows, spills) are
//!   made at a fixed 4-byte sizing width so that `value_bytes` changes
//!   traffic accounting only and never the schedule or the arithmetic.

mod baseline;
mod engine;
mod report;

pub use baseline::{simulate_baseline, BaselineStyle};
pub use engine::{denser_partial_spmm, simulate_end_to_end};
pub use report::{EnergyBreakdown, SimReport, Traffic};

use crate::error::{Error, Result};
use crate::gcn::{DenseMatrix, WeightSet};
use crate::partition::WorkloadSplit;
use serde::{Deserialize, Serialize};

/// Fixed value width for capacity decisions; see the module docs.
pub const SIZING_VALUE_BYTES: usize = 4;

/// Global PE/buffer/bandwidth/energy budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    pub total_pes: usize,
    pub clock_mhz: f64,
    pub onchip_bytes: usize,
    pub offchip_bandwidth_bytes_per_cycle: f64,
    pub value_bytes: usize,
    pub index_bytes: usize,
    pub energy_per_mac_pj: f64,
    pub energy_per_offchip_byte_pj: f64,
    pub energy_per_onchip_byte_pj: f64,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        // 4096 PEs at 330 MHz with ~460 GB/s of off-chip bandwidth; the
        // on-chip budget is desk-scale so buffer pressure is visible on
        // graphs of a few thousand nodes.
        HardwareConfig {
            total_pes: 4096,
            clock_mhz: 330.0,
            onchip_bytes: 1024 * 1024,
            offchip_bandwidth_bytes_per_cycle: 1394.0,
            value_bytes: 4,
            index_bytes: 4,
            energy_per_mac_pj: 3.1,
            energy_per_offchip_byte_pj: 160.0,
            energy_per_onchip_byte_pj: 1.0,
        }
    }
}

impl HardwareConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_pes == 0 {
            return Err(Error::Config("total_pes must be positive".to_string()));
        }
        if self.clock_mhz <= 0.0 || self.offchip_bandwidth_bytes_per_cycle <= 0.0 {
            return Err(Error::Config(
                "clock and bandwidth must be positive".to_string(),
            ));
        }
        if self.onchip_bytes == 0 || self.index_bytes == 0 {
            return Err(Error::Config(
                "onchip_bytes and index_bytes must be positive".to_string(),
            ));
        }
        if ![1, 2, 4, 8].contains(&self.value_bytes) {
            return Err(Error::Config(format!(
                "value_bytes must be 1, 2, 4, or 8, got {}",
                self.value_bytes
            )));
        }
        if self.energy_per_mac_pj < 0.0
            || self.energy_per_offchip_byte_pj < 0.0
            || self.energy_per_onchip_byte_pj < 0.0
        {
            return Err(Error::Config("energy constants must be non-negative".to_string()));
        }
        Ok(())
    }

    /// Parses the key-value config format: one `key value` (or `key = value`)
    /// pair per line, keys exactly as the field names, `#` comments allowed.
    /// Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut hw = HardwareConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cleaned = trimmed.replace('=', " ");
            let mut parts = cleaned.split_whitespace();
            let key = parts.next().unwrap();
            let value = parts.next().ok_or_else(|| Error::Config(format!(
                "line {}: expected \"key value\"",
                idx + 1
            )))?;
            if parts.next().is_some() {
                return Err(Error::Config(format!(
                    "line {}: trailing tokens after value",
                    idx + 1
                )));
            }
            let parse_usize = |v: &str| {
                v.parse::<usize>()
                    .map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))
            };
            let parse_f64 = |v: &str| {
                v.parse::<f64>()
                    .map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))
            };
            match key {
                "total_pes" => hw.total_pes = parse_usize(value)?,
                "clock_mhz" => hw.clock_mhz = parse_f64(value)?,
                "onchip_bytes" => hw.onchip_bytes = parse_usize(value)?,
                "offchip_bandwidth_bytes_per_cycle" => {
                    hw.offchip_bandwidth_bytes_per_cycle = parse_f64(value)?
                }
                "value_bytes" => hw.value_bytes = parse_usize(value)?,
                "index_bytes" => hw.index_bytes = parse_usize(value)?,
                "energy_per_mac_pj" => hw.energy_per_mac_pj = parse_f64(value)?,
                "energy_per_offchip_byte_pj" => {
                    hw.energy_per_offchip_byte_pj = parse_f64(value)?
                }
                "energy_per_onchip_byte_pj" => {
                    hw.energy_per_onchip_byte_pj = parse_f64(value)?
                }
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key \"{other}\"",
                        idx + 1
                    )))
                }
            }
        }
        hw.validate()?;
        Ok(hw)
    }
}

/// Pipeline trade-off switch: efficiency-aware keeps the full aggregation
/// output on-chip for reuse; resource-aware keeps only one output column and
/// streams completed columns off-chip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PipelineMode {
    EfficiencyAware,
    ResourceAware,
}

impl PipelineMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineMode::EfficiencyAware => "efficiency",
            PipelineMode::ResourceAware => "resource",
        }
    }
}

/// Resources granted to one sub-accelerator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkResources {
    pub pes: usize,
    pub buffer_bytes: usize,
    pub bandwidth_share: f64,
}

/// Per-class denser chunks plus the single sparser-branch chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkAllocation {
    pub denser: Vec<ChunkResources>,
    pub sparser: ChunkResources,
}

impl ChunkAllocation {
    pub fn all(&self) -> impl Iterator<Item = &ChunkResources> {
        self.denser.iter().chain(std::iter::once(&self.sparser))
    }
}

/// Workload weight of one chunk: MACs drive PE shares, data footprint drives
/// buffer and bandwidth shares. Footprints are measured at the sizing width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkWorkload {
    pub macs: u64,
    pub footprint_bytes: u64,
}

/// Estimates per-chunk workloads over the whole run. Intermediate layers are
/// treated as dense (their ReLU sparsity is unknown before simulation), which
/// keeps the allocation independent of the simulated arithmetic.
pub fn chunk_workloads(
    split: &WorkloadSplit,
    class_rows: &[Vec<usize>],
    x: &DenseMatrix,
    weights: &WeightSet,
    index_bytes: usize,
) -> Vec<ChunkWorkload> {
    let s = SIZING_VALUE_BYTES as u64;
    let n = x.rows as u64;
    let mut out = Vec::with_capacity(class_rows.len() + 1);
    for (c, rows) in class_rows.iter().enumerate() {
        let block_nnz: u64 = split.per_class_stats[c]
            .subgraph_nnz
            .iter()
            .map(|&(_, z)| z as u64)
            .sum();
        let r = rows.len() as u64;
        let mut macs = 0u64;
        let mut footprint = 0u64;
        for (l, w) in weights.layers.iter().enumerate() {
            let (in_d, out_d) = (w.rows as u64, w.cols as u64);
            let x_nnz: u64 = if l == 0 {
                rows.iter()
                    .map(|&p| x.row(p).iter().filter(|v| **v != 0.0).count() as u64)
                    .sum()
            } else {
                r * in_d
            };
            macs += x_nnz * out_d + block_nnz * out_d;
            footprint += (r * in_d + r * out_d + in_d * out_d + r * out_d) * s;
        }
        out.push(ChunkWorkload {
            macs,
            footprint_bytes: footprint,
        });
    }
    let rem_nnz = split.sparser_nnz as u64;
    let mut macs = 0u64;
    let mut footprint = 0u64;
    if rem_nnz > 0 {
        for w in &weights.layers {
            let out_d = w.cols as u64;
            macs += rem_nnz * out_d;
            footprint += rem_nnz * s
                + (rem_nnz + n + 1) * index_bytes as u64
                + n * out_d * s;
        }
    }
    out.push(ChunkWorkload {
        macs,
        footprint_bytes: footprint,
    });
    out
}

/// Proportional integer allocation: PEs by MACs, buffer bytes and bandwidth
/// shares by data footprint. PEs use largest-remainder rounding with ties
/// broken by chunk id; every chunk with nonzero workload gets at least one
/// PE; zero-workload chunks get nothing.
pub fn allocate_resources(
    workloads: &[ChunkWorkload],
    hw: &HardwareConfig,
) -> Result<ChunkAllocation> {
    if workloads.is_empty() {
        return Err(Error::Argument("no chunks to allocate".to_string()));
    }
    let active = workloads.iter().filter(|w| w.macs > 0).count();
    if active > hw.total_pes {
        return Err(Error::Config(format!(
            "{active} active chunks need at least {active} PEs, config has {}",
            hw.total_pes
        )));
    }
    let pes = largest_remainder(
        &workloads.iter().map(|w| w.macs).collect::<Vec<_>>(),
        hw.total_pes as u64,
    );
    let mut pes: Vec<usize> = pes.into_iter().map(|p| p as usize).collect();
    // Min-one repair: steal from the largest allocation.
    for i in 0..pes.len() {
        if workloads[i].macs > 0 && pes[i] == 0 {
            let donor = (0..pes.len())
                .max_by_key(|&j| (pes[j], std::cmp::Reverse(j)))
                .unwrap();
            pes[donor] -= 1;
            pes[i] = 1;
        }
    }

    let total_footprint: u64 = workloads.iter().map(|w| w.footprint_bytes).sum();
    let mut buffers = Vec::with_capacity(workloads.len());
    let mut shares = Vec::with_capacity(workloads.len());
    for w in workloads {
        if total_footprint == 0 {
            buffers.push(0);
            shares.push(0.0);
            continue;
        }
        let frac = w.footprint_bytes as f64 / total_footprint as f64;
        buffers.push((frac * hw.onchip_bytes as f64).floor() as usize);
        shares.push(frac);
    }

    let mut chunks: Vec<ChunkResources> = pes
        .into_iter()
        .zip(buffers)
        .zip(shares)
        .map(|((pes, buffer_bytes), bandwidth_share)| ChunkResources {
            pes,
            buffer_bytes,
            bandwidth_share,
        })
        .collect();
    let sparser = chunks.pop().unwrap();
    Ok(ChunkAllocation {
        denser: chunks,
        sparser,
    })
}

fn largest_remainder(weights: &[u64], total: u64) -> Vec<u64> {
    let sum: u64 = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut alloc: Vec<u64> = Vec::with_capacity(weights.len());
    let mut remainders: Vec<(usize, u64)> = Vec::with_capacity(weights.len());
    let mut used = 0u64;
    for (i, &w) in weights.iter().enumerate() {
        let exact_num = w as u128 * total as u128;
        let floor = (exact_num / sum as u128) as u64;
        let rem = (exact_num % sum as u128) as u64;
        alloc.push(floor);
        used += floor;
        remainders.push((i, rem));
    }
    // Distribute leftovers by descending remainder, ties by ascending index.
    remainders.sort_by_key(|&(i, rem)| (std::cmp::Reverse(rem), i));
    let mut leftover = total - used;
    for (i, _) in remainders {
        if leftover == 0 {
            break;
        }
        alloc[i] += 1;
        leftover -= 1;
    }
    alloc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wl(macs: u64, fp: u64) -> ChunkWorkload {
        ChunkWorkload {
            macs,
            footprint_bytes: fp,
        }
    }

    #[test]
    fn proportional_pe_split() {
        let hw = HardwareConfig {
            total_pes: 4,
            ..HardwareConfig::default()
        };
        let alloc = allocate_resources(&[wl(300, 1), wl(100, 1)], &hw).unwrap();
        assert_eq!(alloc.denser[0].pes, 3);
        assert_eq!(alloc.sparser.pes, 1);
    }

    #[test]
    fn tie_break_by_chunk_id() {
        let hw = HardwareConfig {
            total_pes: 5,
            ..HardwareConfig::default()
        };
        let alloc = allocate_resources(&[wl(100, 1), wl(100, 1)], &hw).unwrap();
        assert_eq!(alloc.denser[0].pes, 3);
        assert_eq!(alloc.sparser.pes, 2);
    }

    #[test]
    fn zero_workload_gets_nothing_and_min_one_holds() {
        let hw = HardwareConfig {
            total_pes: 8,
            ..HardwareConfig::default()
        };
        let alloc = allocate_resources(&[wl(1_000_000, 10), wl(0, 0), wl(1, 10)], &hw).unwrap();
        assert_eq!(alloc.denser[1].pes, 0);
        assert!(alloc.sparser.pes >= 1);
        let total: usize = alloc.all().map(|c| c.pes).sum();
        assert!(total <= 8);
        let buffers: usize = alloc.all().map(|c| c.buffer_bytes).sum();
        assert!(buffers <= hw.onchip_bytes);
        let shares: f64 = alloc.all().map(|c| c.bandwidth_share).sum();
        assert!(shares <= 1.0 + 1e-9);
    }

    #[test]
    fn too_few_pes_rejected() {
        let hw = HardwareConfig {
            total_pes: 1,
            ..HardwareConfig::default()
        };
        assert!(allocate_resources(&[wl(5, 1), wl(5, 1)], &hw).is_err());
    }

    #[test]
    fn allocation_stays_within_one_rounding_step() {
        // Reference-scale shares on 4096 PEs: each chunk lands within one
        // largest-remainder step of exact proportionality.
        let workloads = [wl(4_457_072, 3), wl(3_514_000, 3), wl(826_224, 1)];
        let hw = HardwareConfig::default();
        let alloc = allocate_resources(&workloads, &hw).unwrap();
        let total_macs: u64 = workloads.iter().map(|w| w.macs).sum();
        let pes: Vec<usize> = alloc.all().map(|c| c.pes).collect();
        assert!(pes.iter().sum::<usize>() <= 4096);
        for (i, w) in workloads.iter().enumerate() {
            let exact = w.macs as f64 * 4096.0 / total_macs as f64;
            assert!(
                (pes[i] as f64 - exact).abs() <= 1.0,
                "chunk {i}: {} PEs vs exact {exact:.2}",
                pes[i]
            );
        }
    }

    #[test]
    fn config_parse_round_trip() {
        let text = "\
# test config
total_pes 128
clock_mhz 100
onchip_bytes 65536
offchip_bandwidth_bytes_per_cycle 64
value_bytes 1
index_bytes 4
energy_per_mac_pj 2.0
energy_per_offchip_byte_pj 100.0
energy_per_onchip_byte_pj 0.5
";
        let hw = HardwareConfig::parse(text).unwrap();
        assert_eq!(hw.total_pes, 128);
        assert_eq!(hw.value_bytes, 1);
        assert_eq!(hw.onchip_bytes, 65536);

        assert!(HardwareConfig::parse("bogus_key 12").is_err());
        assert!(HardwareConfig::parse("value_bytes 3").is_err());
        let eq_form = HardwareConfig::parse("total_pes = 64").unwrap();
        assert_eq!(eq_form.total_pes, 64);
    }
}
