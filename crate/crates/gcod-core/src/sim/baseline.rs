//! Abstract gathered/distributed baseline accelerators: one engine, whole
//! matrix, phase-separated execution with off-chip round trips between
//! combination, aggregation, and layers.

use super::report::{chunk_cycles, Category, Meter, Phase};
use super::{HardwareConfig, SimReport, SIZING_VALUE_BYTES};
use crate::error::{Error, Result};
use crate::gcn::{DenseMatrix, WeightSet};
use crate::sparse::{SparseFormat, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineStyle {
    /// Row-sequential aggregation: each node gathers its neighbors' combined
    /// rows, served through a small direct-mapped row cache; tiny output
    /// buffer, heavy refetching.
    Gathered,
    /// Column-parallel aggregation: combined rows are read once and fully
    /// reused; the whole intermediate output stays resident.
    Distributed,
}

impl BaselineStyle {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineStyle::Gathered => "gathered",
            BaselineStyle::Distributed => "distributed",
        }
    }
}

pub fn simulate_baseline(
    a_hat: &SparseMatrix,
    x: &DenseMatrix,
    weights: &WeightSet,
    hw: &HardwareConfig,
    style: BaselineStyle,
    gathered_cache_rows: usize,
) -> Result<SimReport> {
    hw.validate()?;
    let n = a_hat.rows();
    if a_hat.cols() != n {
        return Err(Error::Argument("adjacency must be square".to_string()));
    }
    if x.rows != n {
        return Err(Error::Argument(format!(
            "features have {} rows for an {n}-node adjacency",
            x.rows
        )));
    }
    if style == BaselineStyle::Gathered && gathered_cache_rows == 0 {
        return Err(Error::Argument(
            "gathered cache needs at least one row".to_string(),
        ));
    }
    let s = SIZING_VALUE_BYTES as u64;
    let bandwidth = hw.offchip_bandwidth_bytes_per_cycle;
    let a_nnz = a_hat.nnz() as u64;
    // Row-sorted entries for the gathered schedule, column-sorted for the
    // distributed one.
    let a_rowwise = a_hat.to_format(SparseFormat::Coo);
    let a_colwise = a_hat.to_format(SparseFormat::Csc);

    let mut meter = Meter::default();
    let mut cycles_comb_total = 0u64;
    let mut cycles_agg_total = 0u64;
    let mut peak_onchip = 0u64;
    let mut x_cur = x.clone();
    let last_layer = weights.num_layers() - 1;

    for (l, w) in weights.layers.iter().enumerate() {
        let (in_d, out_d) = (w.rows as u64, w.cols as u64);
        if x_cur.cols != w.rows {
            return Err(Error::Argument(format!(
                "layer {l}: feature width {} does not match weight rows {}",
                x_cur.cols, w.rows
            )));
        }
        let weight_bytes = in_d * out_d * s;
        let working_bytes = out_d * s;
        if weight_bytes + working_bytes > hw.onchip_bytes as u64 {
            return Err(Error::Capacity {
                chunk: 0,
                needed: (weight_bytes + working_bytes) as usize,
                available: hw.onchip_bytes,
            });
        }

        // --- combination ---
        let mut bytes = if l == 0 {
            meter.read(hw, Phase::Combination, Category::Features, n as u64 * in_d, 0)
        } else {
            meter.read(hw, Phase::Combination, Category::Outputs, n as u64 * in_d, 0)
        };
        bytes += meter.read(hw, Phase::Combination, Category::LayerWeights, in_d * out_d, 0);
        let mut macs = 0u64;
        let mut xw = DenseMatrix::zeros(n, w.cols);
        for r in 0..n {
            let x_row = x_cur.row(r);
            let nnz = x_row.iter().filter(|v| **v != 0.0).count() as u64;
            macs += nnz * out_d;
            let dst = xw.row_mut(r);
            for (j, out) in dst.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, &xv) in x_row.iter().enumerate() {
                    acc += xv * w.get(k, j);
                }
                *out = acc;
            }
        }
        // The intermediate XW round-trips through off-chip memory between
        // the separated phases.
        bytes += meter.write(hw, Phase::Combination, Category::Combined, n as u64 * out_d, 0);
        meter.macs(Phase::Combination, macs);
        cycles_comb_total += chunk_cycles(macs, hw.total_pes, bytes, bandwidth, 1.0);

        // --- aggregation ---
        let mut agg_bytes =
            meter.read(hw, Phase::Aggregation, Category::Adjacency, a_nnz, 2 * a_nnz);
        let agg_macs = a_nnz * out_d;
        meter.macs(Phase::Aggregation, agg_macs);
        let mut out_acc = DenseMatrix::zeros(n, w.cols);
        match style {
            BaselineStyle::Distributed => {
                agg_bytes += meter.read(
                    hw,
                    Phase::Aggregation,
                    Category::Combined,
                    n as u64 * out_d,
                    0,
                );
                a_colwise.for_each_entry(|r, c, v| {
                    let src = xw.row(c);
                    let dst = &mut out_acc.data[r * w.cols..(r + 1) * w.cols];
                    for (o, xv) in dst.iter_mut().zip(src) {
                        *o += v * xv;
                    }
                });
            }
            BaselineStyle::Gathered => {
                let mut tags = vec![usize::MAX; gathered_cache_rows];
                let mut misses = 0u64;
                a_rowwise.for_each_entry(|r, c, v| {
                    let slot = c % gathered_cache_rows;
                    if tags[slot] != c {
                        tags[slot] = c;
                        misses += 1;
                    }
                    let src = xw.row(c);
                    let dst = &mut out_acc.data[r * w.cols..(r + 1) * w.cols];
                    for (o, xv) in dst.iter_mut().zip(src) {
                        *o += v * xv;
                    }
                });
                agg_bytes += meter.read(
                    hw,
                    Phase::Aggregation,
                    Category::Combined,
                    misses * out_d,
                    0,
                );
            }
        }
        // Layer outputs are written back in full.
        agg_bytes += meter.write(
            hw,
            Phase::Aggregation,
            Category::Outputs,
            n as u64 * out_d,
            0,
        );
        cycles_agg_total += chunk_cycles(agg_macs, hw.total_pes, agg_bytes, bandwidth, 1.0);

        if l < last_layer {
            out_acc.relu_in_place();
        } else {
            out_acc.softmax_rows_in_place();
        }
        x_cur = out_acc;

        let out_values = n as u64 * out_d;
        let resident = match style {
            BaselineStyle::Distributed => {
                let avail =
                    (hw.onchip_bytes as u64).saturating_sub(weight_bytes + working_bytes) / s;
                out_values.min(avail.max(n as u64))
            }
            BaselineStyle::Gathered => gathered_cache_rows as u64 * out_d + out_d,
        };
        peak_onchip = peak_onchip.max(weight_bytes + working_bytes + resident * s);
    }

    let cycles_total = cycles_comb_total + cycles_agg_total;
    let total_macs = meter.comb_macs + meter.agg_macs;
    let pe_utilization =
        total_macs as f64 / (hw.total_pes as u64 * cycles_total).max(1) as f64;
    let energy = meter.energy(hw);
    Ok(SimReport {
        engine: style.as_str().to_string(),
        mode: None,
        cycles_combination: cycles_comb_total,
        cycles_aggregation: cycles_agg_total,
        cycles_total,
        wall_latency_us: cycles_total as f64 / hw.clock_mhz,
        offchip_bytes_read: meter.read.total,
        offchip_bytes_written: meter.written.total,
        offchip_value_bytes_read: meter.value_bytes_read,
        offchip_value_bytes_written: meter.value_bytes_written,
        offchip_index_bytes_read: meter.index_bytes_read,
        offchip_index_bytes_written: meter.index_bytes_written,
        read_traffic: meter.read,
        write_traffic: meter.written,
        peak_onchip_bytes: peak_onchip,
        pe_utilization,
        pe_utilization_per_chunk: vec![pe_utilization],
        forwarding_hit_rate: None,
        forwarding_queries: 0,
        forwarding_hits: 0,
        forwarding_zero_queries: true,
        spill_bytes_written: 0,
        macs_combination: meter.comb_macs,
        macs_aggregation: meter.agg_macs,
        energy,
        output: x_cur,
    })
}
