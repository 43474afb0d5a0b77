//! The two-pronged engine: per-class denser chunks running combination and
//! block-diagonal aggregation, a sparser chunk consuming the CSC remainder
//! with query-based forwarding of combined rows, and the synchronized output
//! merge.

use super::report::{chunk_cycles, Category, Meter, Phase};
use super::{
    allocate_resources, chunk_workloads, HardwareConfig, PipelineMode, SimReport,
    SIZING_VALUE_BYTES,
};
use crate::error::{Error, Result};
use crate::gcn::{DenseMatrix, WeightSet};
use crate::partition::{split_workloads, PartitionPlan, WorkloadSplit};
use crate::sparse::SparseMatrix;

/// Share of a denser chunk's buffer dedicated to the forwarding window of
/// recently produced XW rows.
const WINDOW_BUFFER_FRACTION: usize = 64;

/// Buffer geometry of one denser chunk for one layer, in value slots at the
/// sizing width. The forwarding window is a dedicated slice of the buffer so
/// it does not depend on the pipeline mode.
struct ChunkGeometry {
    weight_bytes: usize,
    working_bytes: usize,
    /// Output values resident under the efficiency-aware pipeline.
    resident_efficiency: u64,
    /// Output values resident under the resource-aware pipeline (one column).
    resident_resource: u64,
    /// Forwarding window size in whole XW rows.
    window_rows: u64,
}

fn chunk_geometry(
    buffer_bytes: usize,
    rows: u64,
    in_d: u64,
    out_d: u64,
    chunk_id: usize,
) -> Result<ChunkGeometry> {
    let s = SIZING_VALUE_BYTES as u64;
    let weight_bytes = (in_d * out_d * s) as usize;
    let working_bytes = (out_d * s) as usize;
    if weight_bytes + working_bytes > buffer_bytes {
        return Err(Error::Capacity {
            chunk: chunk_id,
            needed: weight_bytes + working_bytes,
            available: buffer_bytes,
        });
    }
    let window_bytes = (buffer_bytes / WINDOW_BUFFER_FRACTION)
        .min(buffer_bytes - weight_bytes - working_bytes);
    let avail_values =
        (buffer_bytes - weight_bytes - working_bytes - window_bytes) as u64 / s;
    let out_values = rows * out_d;
    let one_column = rows.min(out_values);
    let resident_efficiency = out_values.min(avail_values.max(one_column));
    let window_rows = window_bytes as u64 / (out_d * s).max(1);
    Ok(ChunkGeometry {
        weight_bytes,
        working_bytes,
        resident_efficiency,
        resident_resource: one_column,
        window_rows,
    })
}

/// Runs the layered GCN on the restructured adjacency through the two-pronged
/// schedule and returns the full report, including the computed output.
pub fn simulate_end_to_end(
    a_hat: &SparseMatrix,
    plan: &PartitionPlan,
    x: &DenseMatrix,
    weights: &WeightSet,
    hw: &HardwareConfig,
    mode: PipelineMode,
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
    if plan.num_nodes() != n {
        return Err(Error::Plan(format!(
            "plan covers {} nodes, adjacency has {n}",
            plan.num_nodes()
        )));
    }
    let split = split_workloads(a_hat, plan)?;
    let class_rows = plan.class_positions();
    let workloads = chunk_workloads(&split, &class_rows, x, weights, hw.index_bytes);
    let alloc = allocate_resources(&workloads, hw)?;
    let num_classes = plan.num_classes;

    // Position -> (owning class, rank within that class's rows).
    let mut pos_meta = vec![(usize::MAX, 0usize); n];
    for (c, rows) in class_rows.iter().enumerate() {
        for (rank, &p) in rows.iter().enumerate() {
            pos_meta[p] = (c, rank);
        }
    }
    let blocks_of_class: Vec<Vec<usize>> = (0..num_classes)
        .map(|c| {
            (0..plan.num_subgraphs)
                .filter(|&s| plan.subgraph_class[s] == c)
                .collect()
        })
        .collect();
    // Sparser queries: one per nonempty remainder column, ascending.
    let remainder = &split.sparser_remainder;
    let mut queries: Vec<usize> = Vec::new();
    for col in 0..n {
        if !remainder.csc_column(col)?.0.is_empty() {
            queries.push(col);
        }
    }
    let num_queries = queries.len() as u64;

    let mut meter = Meter::default();
    let mut cycles_comb_total = 0u64;
    let mut cycles_agg_total = 0u64;
    let mut chunk_mac_totals = vec![0u64; num_classes + 1];
    let mut hits = 0u64;
    let mut total_queries = 0u64;
    let mut peak_onchip = 0u64;
    // Values of each chunk's layer input that must be fetched off-chip at the
    // start of combination. Layer 0 reads the features themselves.
    let mut readback_values = vec![0u64; num_classes];

    let s = SIZING_VALUE_BYTES as u64;
    let bandwidth = hw.offchip_bandwidth_bytes_per_cycle;
    let last_layer = weights.num_layers() - 1;
    let mut x_cur = x.clone();

    for (l, w) in weights.layers.iter().enumerate() {
        let (in_d, out_d) = (w.rows as u64, w.cols as u64);
        if x_cur.cols != w.rows {
            return Err(Error::Argument(format!(
                "layer {l}: feature width {} does not match weight rows {}",
                x_cur.cols, w.rows
            )));
        }

        let geometry: Vec<Option<ChunkGeometry>> = (0..num_classes)
            .map(|c| {
                if class_rows[c].is_empty() {
                    Ok(None)
                } else {
                    chunk_geometry(
                        alloc.denser[c].buffer_bytes,
                        class_rows[c].len() as u64,
                        in_d,
                        out_d,
                        c,
                    )
                    .map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;

        // --- combination: each denser chunk transforms its class's rows ---
        let mut xw = DenseMatrix::zeros(n, w.cols);
        let mut comb_cycles = 0u64;
        for c in 0..num_classes {
            let rows = &class_rows[c];
            if rows.is_empty() {
                continue;
            }
            let res = &alloc.denser[c];
            let mut bytes = if l == 0 {
                meter.read(
                    hw,
                    Phase::Combination,
                    Category::Features,
                    rows.len() as u64 * in_d,
                    0,
                )
            } else {
                meter.read(hw, Phase::Combination, Category::Outputs, readback_values[c], 0)
            };
            bytes += meter.read(hw, Phase::Combination, Category::LayerWeights, in_d * out_d, 0);
            let mut macs = 0u64;
            for &r in rows {
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
            meter.macs(Phase::Combination, macs);
            chunk_mac_totals[c] += macs;
            comb_cycles = comb_cycles.max(chunk_cycles(
                macs,
                res.pes,
                bytes,
                bandwidth,
                res.bandwidth_share,
            ));
        }
        cycles_comb_total += comb_cycles;

        // --- aggregation: denser blocks plus the sparser remainder ---
        let mut denser_acc = DenseMatrix::zeros(n, w.cols);
        let mut agg_cycles = 0u64;
        for c in 0..num_classes {
            let rows = &class_rows[c];
            if rows.is_empty() {
                continue;
            }
            let res = &alloc.denser[c];
            let geom = geometry[c].as_ref().unwrap();
            let block_nnz: u64 = blocks_of_class[c]
                .iter()
                .map(|&sid| split.denser_blocks[sid].nnz() as u64)
                .sum();
            // Blocks stream in COO; the resource-aware pipeline makes one
            // pass per output column.
            let passes = match mode {
                PipelineMode::EfficiencyAware => 1,
                PipelineMode::ResourceAware => out_d,
            };
            let mut bytes = meter.read(
                hw,
                Phase::Aggregation,
                Category::Adjacency,
                block_nnz * passes,
                2 * block_nnz * passes,
            );
            let macs = block_nnz * out_d;
            meter.macs(Phase::Aggregation, macs);
            chunk_mac_totals[c] += macs;
            for &sid in &blocks_of_class[c] {
                let lo = plan.block_ranges[sid].0;
                split.denser_blocks[sid].for_each_entry(|br, bc, v| {
                    let src_row = xw.row(lo + bc);
                    let dst =
                        &mut denser_acc.data[(lo + br) * w.cols..(lo + br + 1) * w.cols];
                    for (o, xv) in dst.iter_mut().zip(src_row) {
                        *o += v * xv;
                    }
                });
            }
            let out_values = rows.len() as u64 * out_d;
            match mode {
                PipelineMode::EfficiencyAware => {
                    let spill = out_values - geom.resident_efficiency;
                    if spill > 0 {
                        let b = meter.write(hw, Phase::Aggregation, Category::Outputs, spill, 0);
                        meter.spill_bytes_written += b;
                        bytes += b;
                    }
                    if l == last_layer {
                        // Flush the resident result at the end of the run.
                        bytes += meter.write(
                            hw,
                            Phase::Aggregation,
                            Category::Outputs,
                            geom.resident_efficiency,
                            0,
                        );
                    }
                    readback_values[c] = spill;
                }
                PipelineMode::ResourceAware => {
                    bytes +=
                        meter.write(hw, Phase::Aggregation, Category::Outputs, out_values, 0);
                    readback_values[c] = out_values;
                }
            }
            agg_cycles = agg_cycles.max(chunk_cycles(
                macs,
                res.pes,
                bytes,
                bandwidth,
                res.bandwidth_share,
            ));
        }

        // Sparser branch. Its row contributions merge straight into the
        // denser chunks' resident accumulators through the synchronization
        // step, so the branch itself holds only the remainder and a working
        // slot on-chip.
        let mut sparser_acc = DenseMatrix::zeros(n, w.cols);
        let mut sparser_resident_bytes = 0u64;
        if split.sparser_nnz > 0 {
            let res = &alloc.sparser;
            let rem_nnz = split.sparser_nnz as u64;
            let rem_values = rem_nnz;
            let rem_indices = rem_nnz + n as u64 + 1;
            let rem_sizing = rem_values * s + rem_indices * hw.index_bytes as u64;
            let working = out_d * s;
            let rem_resident = rem_sizing + working <= res.buffer_bytes as u64;
            if rem_resident {
                sparser_resident_bytes = rem_sizing;
            }
            let passes = match mode {
                PipelineMode::ResourceAware if !rem_resident => out_d,
                _ => 1,
            };
            let mut bytes = if l == 0 || !rem_resident {
                meter.read(
                    hw,
                    Phase::Aggregation,
                    Category::Adjacency,
                    rem_values * passes,
                    rem_indices * passes,
                )
            } else {
                0
            };

            // Query-based forwarding: one query per nonempty remainder
            // column; the owning chunk serves it from its sliding window.
            for (q, &col) in queries.iter().enumerate() {
                let (owner, rank) = pos_meta[col];
                let owner_rows = class_rows[owner].len() as u64;
                let frontier = ((q as u64 + 1) * owner_rows).div_ceil(num_queries);
                let lag = frontier.saturating_sub(rank as u64 + 1);
                let window = geometry[owner].as_ref().map_or(0, |g| g.window_rows);
                total_queries += 1;
                if window >= 1 && lag < window {
                    hits += 1;
                } else {
                    bytes += meter.read(hw, Phase::Aggregation, Category::Combined, out_d, 0);
                }
            }

            let macs = rem_nnz * out_d;
            meter.macs(Phase::Aggregation, macs);
            chunk_mac_totals[num_classes] += macs;
            for &col in &queries {
                let (rws, vals) = remainder.csc_column(col)?;
                let src_row = xw.row(col);
                for (&r, &v) in rws.iter().zip(vals) {
                    let dst = &mut sparser_acc.data[r * w.cols..(r + 1) * w.cols];
                    for (o, xv) in dst.iter_mut().zip(src_row) {
                        *o += v * xv;
                    }
                }
            }
            agg_cycles = agg_cycles.max(chunk_cycles(
                macs,
                res.pes,
                bytes,
                bandwidth,
                res.bandwidth_share,
            ));
        }
        cycles_agg_total += agg_cycles;

        // Synchronized merge of the two branches, one on-chip pass over the
        // output bytes, zero cycles.
        let mut merged = denser_acc;
        for (o, v) in merged.data.iter_mut().zip(&sparser_acc.data) {
            *o += v;
        }
        meter.sync_onchip_bytes += n as u64 * out_d * hw.value_bytes as u64;

        if l < last_layer {
            merged.relu_in_place();
        } else {
            merged.softmax_rows_in_place();
        }
        x_cur = merged;

        // Peak on-chip occupancy for this layer (sizing widths).
        let mut layer_peak = 0u64;
        for c in 0..num_classes {
            let Some(geom) = geometry[c].as_ref() else {
                continue;
            };
            let rows = class_rows[c].len() as u64;
            let resident = match mode {
                PipelineMode::EfficiencyAware => geom.resident_efficiency,
                PipelineMode::ResourceAware => geom.resident_resource,
            };
            let window_fill = geom.window_rows.min(rows) * out_d;
            layer_peak += geom.weight_bytes as u64
                + geom.working_bytes as u64
                + (resident + window_fill) * s;
        }
        if split.sparser_nnz > 0 {
            layer_peak += sparser_resident_bytes + out_d * s;
        }
        peak_onchip = peak_onchip.max(layer_peak);
    }

    let cycles_total = cycles_comb_total + cycles_agg_total;
    let denom = |pes: usize| (pes as u64 * cycles_total).max(1) as f64;
    let pe_utilization_per_chunk: Vec<f64> = (0..=num_classes)
        .map(|i| {
            let pes = if i < num_classes {
                alloc.denser[i].pes
            } else {
                alloc.sparser.pes
            };
            if pes == 0 {
                0.0
            } else {
                chunk_mac_totals[i] as f64 / denom(pes)
            }
        })
        .collect();
    let total_macs = meter.comb_macs + meter.agg_macs;
    let pe_utilization = total_macs as f64 / denom(hw.total_pes);
    let energy = meter.energy(hw);
    let forwarding_zero_queries = total_queries == 0;
    let forwarding_hit_rate = if forwarding_zero_queries {
        1.0
    } else {
        hits as f64 / total_queries as f64
    };

    Ok(SimReport {
        engine: "two-pronged".to_string(),
        mode: Some(mode.as_str().to_string()),
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
        pe_utilization_per_chunk,
        forwarding_hit_rate: Some(forwarding_hit_rate),
        forwarding_queries: total_queries,
        forwarding_hits: hits,
        forwarding_zero_queries,
        spill_bytes_written: meter.spill_bytes_written,
        macs_combination: meter.comb_macs,
        macs_aggregation: meter.agg_macs,
        energy,
        output: x_cur,
    })
}

/// Convenience wrapper used by tests and the workload-split additivity
/// checks: partial SpMM of the denser blocks scattered back to global rows.
pub fn denser_partial_spmm(
    split: &WorkloadSplit,
    plan: &PartitionPlan,
    d: &DenseMatrix,
) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(plan.num_nodes(), d.cols);
    for (sid, block) in split.denser_blocks.iter().enumerate() {
        let lo = plan.block_ranges[sid].0;
        block.for_each_entry(|br, bc, v| {
            let src = d.row(lo + bc);
            let dst = &mut out.data[(lo + br) * d.cols..(lo + br + 1) * d.cols];
            for (o, xv) in dst.iter_mut().zip(src) {
                *o += v * xv;
            }
        });
    }
    out
}
