//! Simulation report types and the traffic/energy bookkeeping shared by the
//! two-pronged engine and the baselines.

use super::HardwareConfig;
use crate::gcn::DenseMatrix;
use serde::{Deserialize, Serialize};

/// Off-chip bytes by the kind of data moved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traffic {
    /// Input feature matrix reads.
    pub features: u64,
    /// Layer weight matrices.
    pub layer_weights: u64,
    /// Combined features (XW), including forwarding misses.
    pub combined: u64,
    /// Adjacency structure (blocks, remainder, or whole matrix).
    pub adjacency: u64,
    /// Aggregation outputs: spills, streamed columns, inter-layer round
    /// trips, final result flush.
    pub outputs: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub combination_compute_pj: f64,
    pub combination_offchip_pj: f64,
    pub aggregation_compute_pj: f64,
    pub aggregation_offchip_pj: f64,
    /// Output-merge pass of the two branches, charged at on-chip cost.
    pub sync_onchip_pj: f64,
    pub total_pj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// "two-pronged", "gathered", or "distributed".
    pub engine: String,
    /// Pipeline mode of two-pronged runs, absent for baselines.
    pub mode: Option<String>,
    pub cycles_combination: u64,
    pub cycles_aggregation: u64,
    pub cycles_total: u64,
    pub wall_latency_us: f64,
    pub offchip_bytes_read: u64,
    pub offchip_bytes_written: u64,
    pub offchip_value_bytes_read: u64,
    pub offchip_value_bytes_written: u64,
    pub offchip_index_bytes_read: u64,
    pub offchip_index_bytes_written: u64,
    pub read_traffic: Traffic,
    pub write_traffic: Traffic,
    pub peak_onchip_bytes: u64,
    pub pe_utilization: f64,
    pub pe_utilization_per_chunk: Vec<f64>,
    /// Defined only for two-pronged runs; 1.0 with the zero-queries flag when
    /// the remainder is empty.
    pub forwarding_hit_rate: Option<f64>,
    pub forwarding_queries: u64,
    pub forwarding_hits: u64,
    pub forwarding_zero_queries: bool,
    pub spill_bytes_written: u64,
    pub macs_combination: u64,
    pub macs_aggregation: u64,
    pub energy: EnergyBreakdown,
    /// The simulated numeric result, for oracle checking.
    pub output: DenseMatrix,
}

impl SimReport {
    pub fn offchip_total(&self) -> u64 {
        self.offchip_bytes_read + self.offchip_bytes_written
    }

    pub fn aggregation_energy_share(&self) -> f64 {
        if self.energy.total_pj == 0.0 {
            return 0.0;
        }
        (self.energy.aggregation_compute_pj + self.energy.aggregation_offchip_pj)
            / self.energy.total_pj
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Phase {
    Combination,
    Aggregation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Category {
    Features,
    LayerWeights,
    Combined,
    Adjacency,
    Outputs,
}

/// Accumulates off-chip movements, keeping value and index bytes separate so
/// precision sweeps stay exact, and phase totals for the energy split.
#[derive(Debug, Default, Clone)]
pub(crate) struct Meter {
    pub read: Traffic,
    pub written: Traffic,
    pub value_bytes_read: u64,
    pub value_bytes_written: u64,
    pub index_bytes_read: u64,
    pub index_bytes_written: u64,
    pub comb_offchip_bytes: u64,
    pub agg_offchip_bytes: u64,
    pub comb_macs: u64,
    pub agg_macs: u64,
    pub spill_bytes_written: u64,
    pub sync_onchip_bytes: u64,
}

impl Meter {
    fn bucket(traffic: &mut Traffic, cat: Category, bytes: u64) {
        match cat {
            Category::Features => traffic.features += bytes,
            Category::LayerWeights => traffic.layer_weights += bytes,
            Category::Combined => traffic.combined += bytes,
            Category::Adjacency => traffic.adjacency += bytes,
            Category::Outputs => traffic.outputs += bytes,
        }
        traffic.total += bytes;
    }

    /// Records an off-chip read of `values` values and `indices` indices.
    /// Returns the byte count so callers can feed per-chunk bandwidth terms.
    pub fn read(
        &mut self,
        hw: &HardwareConfig,
        phase: Phase,
        cat: Category,
        values: u64,
        indices: u64,
    ) -> u64 {
        let vb = values * hw.value_bytes as u64;
        let ib = indices * hw.index_bytes as u64;
        self.value_bytes_read += vb;
        self.index_bytes_read += ib;
        let bytes = vb + ib;
        Self::bucket(&mut self.read, cat, bytes);
        match phase {
            Phase::Combination => self.comb_offchip_bytes += bytes,
            Phase::Aggregation => self.agg_offchip_bytes += bytes,
        }
        bytes
    }

    pub fn write(
        &mut self,
        hw: &HardwareConfig,
        phase: Phase,
        cat: Category,
        values: u64,
        indices: u64,
    ) -> u64 {
        let vb = values * hw.value_bytes as u64;
        let ib = indices * hw.index_bytes as u64;
        self.value_bytes_written += vb;
        self.index_bytes_written += ib;
        let bytes = vb + ib;
        Self::bucket(&mut self.written, cat, bytes);
        match phase {
            Phase::Combination => self.comb_offchip_bytes += bytes,
            Phase::Aggregation => self.agg_offchip_bytes += bytes,
        }
        bytes
    }

    pub fn macs(&mut self, phase: Phase, count: u64) {
        match phase {
            Phase::Combination => self.comb_macs += count,
            Phase::Aggregation => self.agg_macs += count,
        }
    }

    pub fn energy(&self, hw: &HardwareConfig) -> EnergyBreakdown {
        let comb_compute = self.comb_macs as f64 * hw.energy_per_mac_pj;
        let agg_compute = self.agg_macs as f64 * hw.energy_per_mac_pj;
        let comb_mem = self.comb_offchip_bytes as f64 * hw.energy_per_offchip_byte_pj;
        let agg_mem = self.agg_offchip_bytes as f64 * hw.energy_per_offchip_byte_pj;
        let sync = self.sync_onchip_bytes as f64 * hw.energy_per_onchip_byte_pj;
        EnergyBreakdown {
            combination_compute_pj: comb_compute,
            combination_offchip_pj: comb_mem,
            aggregation_compute_pj: agg_compute,
            aggregation_offchip_pj: agg_mem,
            sync_onchip_pj: sync,
            total_pj: comb_compute + comb_mem + agg_compute + agg_mem + sync,
        }
    }
}

/// max(ceil(macs/pes), ceil(bytes/(bandwidth*share))) with zero-safe guards.
pub(crate) fn chunk_cycles(macs: u64, pes: usize, bytes: u64, bandwidth: f64, share: f64) -> u64 {
    let compute = if macs == 0 {
        0
    } else {
        macs.div_ceil(pes.max(1) as u64)
    };
    let bw = bandwidth * share;
    let memory = if bytes == 0 || bw <= 0.0 {
        0
    } else {
        (bytes as f64 / bw).ceil() as u64
    };
    compute.max(memory)
}
