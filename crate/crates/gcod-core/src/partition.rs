//! Degree-based class extraction, balanced subgraph partitioning within each
//! class, group distribution, the permutation realizing the block layout, and
//! the denser/sparser workload split of the permuted adjacency.

use crate::error::{Error, Result};
use crate::graph::{DegreeVector, Graph};
use crate::sparse::{SparseFormat, SparseMatrix};
use serde::{Deserialize, Serialize};

/// Sentinel for the open upper bound of the last degree class.
pub const DEGREE_INFINITY: usize = usize::MAX;

/// Strictly increasing degree boundaries d0 = 0 < d1 < ... < dC = infinity,
/// stored with `usize::MAX` as the infinity sentinel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCuts {
    pub cuts: Vec<usize>,
}

impl DegreeCuts {
    pub fn new(cuts: Vec<usize>) -> Result<Self> {
        if cuts.len() < 2 {
            return Err(Error::Argument("need at least [0, infinity)".to_string()));
        }
        if cuts[0] != 0 {
            return Err(Error::Argument("first cut must be 0".to_string()));
        }
        if *cuts.last().unwrap() != DEGREE_INFINITY {
            return Err(Error::Argument(
                "last cut must be the infinity sentinel".to_string(),
            ));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("cuts must be strictly increasing".to_string()));
        }
        Ok(DegreeCuts { cuts })
    }

    pub fn num_classes(&self) -> usize {
        self.cuts.len() - 1
    }

    /// The class whose half-open interval [d_c, d_{c+1}) contains `degree`.
    pub fn class_of_degree(&self, degree: usize) -> usize {
        // cuts[0] == 0, so at least one boundary is <= degree.
        let mut c = 0;
        while c + 1 < self.num_classes() && degree >= self.cuts[c + 1] {
            c += 1;
        }
        c
    }
}

/// Picks cuts at degree quantiles so each class receives as close to N/C
/// nodes as the degree ties allow: each cut lands on the distinct degree
/// whose below-count is nearest the ideal rank, moving up past ties, and
/// every class stays nonempty.
pub fn auto_degree_cuts(d: &DegreeVector, num_classes: usize) -> Result<DegreeCuts> {
    if num_classes < 1 {
        return Err(Error::Argument("need at least one class".to_string()));
    }
    let mut sorted = d.0.clone();
    sorted.sort_unstable();
    let n = sorted.len();
    // Distinct degrees with the count of nodes strictly below each.
    let mut distinct: Vec<(usize, usize)> = Vec::new();
    for (i, &deg) in sorted.iter().enumerate() {
        if distinct.last().map(|&(v, _)| v) != Some(deg) {
            distinct.push((deg, i));
        }
    }
    if num_classes > distinct.len() {
        return Err(Error::Argument(format!(
            "{num_classes} classes requested but only {} distinct degrees",
            distinct.len()
        )));
    }
    let mut cuts = vec![0usize];
    // Cut c picks from distinct degrees above the previous cut, leaving one
    // distinct degree for every class still to come.
    let mut prev_idx = 0usize;
    for c in 1..num_classes {
        let target = (c * n) as f64 / num_classes as f64;
        let lo = prev_idx.max(c);
        let hi = distinct.len() - (num_classes - 1 - c);
        let (pick, &(best_deg, _)) = distinct[lo..hi]
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = (a.1 as f64 - target).abs();
                let db = (b.1 as f64 - target).abs();
                da.partial_cmp(&db).unwrap().then(a.0.cmp(&b.0))
            })
            .unwrap();
        prev_idx = lo + pick + 1;
        cuts.push(best_deg);
    }
    cuts.push(DEGREE_INFINITY);
    DegreeCuts::new(cuts)
}

/// Node i lands in class c iff cuts[c] <= d_i < cuts[c+1]. Classes may be
/// empty.
pub fn classify_by_degree(d: &DegreeVector, cuts: &DegreeCuts) -> Vec<usize> {
    d.0.iter().map(|&deg| cuts.class_of_degree(deg)).collect()
}

/// Partitions one class's members into `k` parts, balancing internal-edge
/// counts while keeping the cut small: greedy region growing from
/// highest-degree seeds followed by boundary-refinement passes of single-node
/// moves. Fully deterministic; ties break by ascending node id.
pub fn partition_class_balanced(
    g: &Graph,
    members: &[usize],
    k: usize,
) -> Result<Vec<Vec<usize>>> {
    if k < 1 {
        return Err(Error::Argument("need at least one part".to_string()));
    }
    if members.len() < k {
        return Err(Error::Argument(format!(
            "cannot split {} members into {k} parts",
            members.len()
        )));
    }
    let adj = g.adjacency_lists();
    let mut member_set = vec![false; g.num_nodes];
    for &m in members {
        member_set[m] = true;
    }
    // Neighbors restricted to the class.
    let class_neighbors: Vec<Vec<usize>> = members
        .iter()
        .map(|&m| {
            adj[m]
                .iter()
                .copied()
                .filter(|&n| member_set[n])
                .collect::<Vec<_>>()
        })
        .collect();
    let mut local_of = vec![usize::MAX; g.num_nodes];
    for (i, &m) in members.iter().enumerate() {
        local_of[m] = i;
    }
    let total_internal: usize = class_neighbors.iter().map(Vec::len).sum::<usize>() / 2;
    let target = total_internal as f64 / k as f64;

    // Regions fill toward the per-part edge budget; a node cap (with slack)
    // keeps near-edgeless classes from collapsing into one giant part.
    let node_cap = (members.len().div_ceil(k) + members.len() / (4 * k)).max(1);
    let mut part_of = vec![usize::MAX; members.len()];
    let mut unassigned = members.len();
    for region in 0..k {
        if region == k - 1 {
            for p in part_of.iter_mut().filter(|p| **p == usize::MAX) {
                *p = region;
            }
            unassigned = 0;
            break;
        }
        let must_leave = k - region - 1;
        let mut internal = 0usize;
        let mut region_nodes = 0usize;
        // gain[i] = edges from candidate i into the growing region.
        let mut gain = vec![0usize; members.len()];
        let mut frontier: Vec<usize> = Vec::new();
        let absorb = |node: usize,
                      gain: &mut Vec<usize>,
                      frontier: &mut Vec<usize>,
                      part_of: &[usize]| {
            for nb in class_neighbors[node].iter().map(|&n| local_of[n]) {
                if part_of[nb] == usize::MAX {
                    if gain[nb] == 0 {
                        frontier.push(nb);
                    }
                    gain[nb] += 1;
                }
            }
        };
        loop {
            if unassigned <= must_leave {
                break;
            }
            if region_nodes > 0 && (internal as f64 >= target || region_nodes >= node_cap) {
                break;
            }
            frontier.retain(|&i| part_of[i] == usize::MAX);
            // Best-connected frontier node whose edges still fit the budget,
            // ties by ascending original id. The first node always fits.
            let next = frontier
                .iter()
                .copied()
                .filter(|&i| region_nodes == 0 || (internal + gain[i]) as f64 <= target)
                .max_by_key(|&i| (gain[i], std::cmp::Reverse(members[i])));
            let next = match next {
                Some(i) => i,
                None if !frontier.is_empty() => break, // only over-budget candidates left
                None => {
                    // Disconnected class: restart growth from the
                    // highest-degree unassigned node.
                    match (0..members.len())
                        .filter(|&i| part_of[i] == usize::MAX)
                        .max_by_key(|&i| {
                            (class_neighbors[i].len(), std::cmp::Reverse(members[i]))
                        }) {
                        Some(seed) => seed,
                        None => break,
                    }
                }
            };
            part_of[next] = region;
            unassigned -= 1;
            internal += gain[next];
            region_nodes += 1;
            absorb(next, &mut gain, &mut frontier, &part_of);
        }
    }
    debug_assert_eq!(unassigned, 0);

    refine_parts(&class_neighbors, local_of.as_slice(), members, &mut part_of, k);

    let mut parts = vec![Vec::new(); k];
    for (i, &p) in part_of.iter().enumerate() {
        parts[p].push(members[i]);
    }
    for part in &parts {
        debug_assert!(!part.is_empty());
    }
    Ok(parts)
}

/// Boundary refinement in two interleaved phases: Kernighan-Lin style
/// single-node moves that reduce the cut within a balance tolerance, and a
/// rebalance sweep that drains the heaviest part (by internal edges) with the
/// least cut damage until the max/mean ratio meets the tolerance.
fn refine_parts(
    class_neighbors: &[Vec<usize>],
    local_of: &[usize],
    members: &[usize],
    part_of: &mut [usize],
    k: usize,
) {
    const BALANCE_TOL: f64 = 1.10;
    const MAX_PASSES: usize = 12;
    if k < 2 {
        return;
    }
    let mut internal = vec![0usize; k];
    let mut sizes = vec![0usize; k];
    for (i, &p) in part_of.iter().enumerate() {
        sizes[p] += 1;
        for nb in class_neighbors[i].iter().map(|&n| local_of[n]) {
            if part_of[nb] == p {
                internal[p] += 1;
            }
        }
    }
    for v in &mut internal {
        *v /= 2;
    }
    let ratio = |internal: &[usize]| {
        let total: usize = internal.iter().sum();
        if total == 0 {
            return 1.0;
        }
        let mean = total as f64 / internal.len() as f64;
        *internal.iter().max().unwrap() as f64 / mean
    };
    let conns = |i: usize, part_of: &[usize]| {
        let mut conn = vec![0usize; k];
        for nb in class_neighbors[i].iter().map(|&n| local_of[n]) {
            conn[part_of[nb]] += 1;
        }
        conn
    };

    let mut rebalance_budget = 2 * members.len();
    for _ in 0..MAX_PASSES {
        let mut moved = false;

        // Cut phase: non-negative gain moves that keep or restore balance.
        for i in 0..members.len() {
            let from = part_of[i];
            if sizes[from] <= 1 {
                continue;
            }
            let conn = conns(i, part_of);
            let mut best: Option<(usize, isize)> = None;
            for to in 0..k {
                if to == from {
                    continue;
                }
                let cut_gain = conn[to] as isize - conn[from] as isize;
                if best.is_none_or(|(_, g)| cut_gain > g) {
                    best = Some((to, cut_gain));
                }
            }
            let Some((to, cut_gain)) = best else { continue };
            if cut_gain < 0 {
                continue;
            }
            let mut trial = internal.clone();
            trial[from] -= conn[from];
            trial[to] += conn[to];
            let before = ratio(&internal);
            let after = ratio(&trial);
            let accept = if cut_gain > 0 {
                after <= BALANCE_TOL || after < before
            } else {
                after < before
            };
            if !accept {
                continue;
            }
            internal = trial;
            sizes[from] -= 1;
            sizes[to] += 1;
            part_of[i] = to;
            moved = true;
        }

        // Rebalance phase: drain the heaviest part with the least cut damage
        // until within tolerance. Moves must strictly lower the sum of
        // squared internal counts, which keeps draining tied-heaviest parts
        // (where the max/mean ratio alone would stall) and guarantees
        // termination.
        while rebalance_budget > 0 {
            if ratio(&internal) <= BALANCE_TOL {
                break;
            }
            let heaviest = (0..k)
                .max_by_key(|&p| (internal[p], std::cmp::Reverse(p)))
                .unwrap();
            if sizes[heaviest] <= 1 {
                break;
            }
            let mut best: Option<(usize, usize, isize)> = None;
            for i in 0..members.len() {
                if part_of[i] != heaviest {
                    continue;
                }
                let conn = conns(i, part_of);
                let c_src = conn[heaviest] as i64;
                if c_src == 0 {
                    continue; // moving it cannot lower the source's load
                }
                for to in 0..k {
                    if to == heaviest {
                        continue;
                    }
                    let (i_src, i_dst) = (internal[heaviest] as i64, internal[to] as i64);
                    let c_dst = conn[to] as i64;
                    let phi_delta =
                        c_src * c_src - 2 * i_src * c_src + c_dst * c_dst + 2 * i_dst * c_dst;
                    if phi_delta >= 0 {
                        continue;
                    }
                    let cut_gain = (c_dst - c_src) as isize;
                    if best.is_none_or(|(bi, _, bg)| cut_gain > bg || (cut_gain == bg && i < bi)) {
                        best = Some((i, to, cut_gain));
                    }
                }
            }
            let Some((i, to, _)) = best else { break };
            let conn = conns(i, part_of);
            internal[heaviest] -= conn[heaviest];
            internal[to] += conn[to];
            sizes[heaviest] -= 1;
            sizes[to] += 1;
            part_of[i] = to;
            rebalance_budget -= 1;
            moved = true;
        }

        if !moved {
            break;
        }
    }
}

/// Round-robin distribution of each class's subgraphs over `num_groups`
/// groups: local subgraph j of a class goes to group j mod G.
pub fn distribute_groups(subgraphs_per_class: &[usize], num_groups: usize) -> Result<Vec<usize>> {
    if num_groups < 1 {
        return Err(Error::Argument("need at least one group".to_string()));
    }
    let mut group_of = Vec::with_capacity(subgraphs_per_class.iter().sum());
    for &count in subgraphs_per_class {
        for j in 0..count {
            group_of.push(j % num_groups);
        }
    }
    Ok(group_of)
}

/// The complete restructuring plan: assignments, the permutation realizing
/// the group-major/class-major block layout, and the patch grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub num_classes: usize,
    pub num_groups: usize,
    pub num_subgraphs: usize,
    pub cuts: DegreeCuts,
    /// node -> class id
    pub class_of: Vec<usize>,
    /// node -> subgraph id (subgraph ids are class-major)
    pub subgraph_of: Vec<usize>,
    /// subgraph -> group id
    pub group_of: Vec<usize>,
    /// subgraph -> class id
    pub subgraph_class: Vec<usize>,
    /// old node id -> position in permuted order
    pub permutation: Vec<usize>,
    /// subgraph -> [start, end) in permuted order
    pub block_ranges: Vec<(usize, usize)>,
    /// (rows, cols) of the patch grid used by structural pruning
    pub patch_size: (usize, usize),
}

impl PartitionPlan {
    pub fn num_nodes(&self) -> usize {
        self.permutation.len()
    }

    /// Permuted positions per class, ascending. Each class's positions are
    /// the union of its subgraphs' block ranges.
    pub fn class_positions(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.num_classes];
        for s in 0..self.num_subgraphs {
            let (lo, hi) = self.block_ranges[s];
            rows[self.subgraph_class[s]].extend(lo..hi);
        }
        for r in &mut rows {
            r.sort_unstable();
        }
        rows
    }

    /// subgraph id owning each permuted position.
    pub fn subgraph_at_position(&self) -> Vec<usize> {
        let mut owner = vec![usize::MAX; self.num_nodes()];
        for s in 0..self.num_subgraphs {
            let (lo, hi) = self.block_ranges[s];
            for slot in &mut owner[lo..hi] {
                *slot = s;
            }
        }
        owner
    }

    pub fn inverse_permutation(&self) -> Vec<usize> {
        let mut inv = vec![0usize; self.permutation.len()];
        for (old, &new) in self.permutation.iter().enumerate() {
            inv[new] = old;
        }
        inv
    }

    /// Positions (ascending) where the class changes in permuted order, and
    /// where the group changes; used by the heatmap renderer.
    pub fn layout_boundaries(&self) -> (Vec<usize>, Vec<usize>) {
        let owner = self.subgraph_at_position();
        let mut class_bounds = Vec::new();
        let mut group_bounds = Vec::new();
        for p in 1..owner.len() {
            let (a, b) = (owner[p - 1], owner[p]);
            if a == usize::MAX || b == usize::MAX {
                continue;
            }
            if self.group_of[a] != self.group_of[b] {
                group_bounds.push(p);
            } else if self.subgraph_class[a] != self.subgraph_class[b] {
                class_bounds.push(p);
            }
        }
        (class_bounds, group_bounds)
    }
}

/// Builds the plan from completed assignments. `parts_per_class[c]` lists the
/// node sets of class c's subgraphs. Node order is (group, class, subgraph,
/// original id); every subgraph occupies one contiguous interval.
pub fn build_layout(
    cuts: DegreeCuts,
    class_of: Vec<usize>,
    parts_per_class: Vec<Vec<Vec<usize>>>,
    num_groups: usize,
    patch_size: Option<(usize, usize)>,
) -> Result<PartitionPlan> {
    let num_nodes = class_of.len();
    let num_classes = cuts.num_classes();
    if parts_per_class.len() != num_classes {
        return Err(Error::Plan(format!(
            "expected parts for {num_classes} classes, got {}",
            parts_per_class.len()
        )));
    }
    let subgraphs_per_class: Vec<usize> = parts_per_class.iter().map(Vec::len).collect();
    let group_of = distribute_groups(&subgraphs_per_class, num_groups)?;
    let num_subgraphs: usize = subgraphs_per_class.iter().sum();

    let mut subgraph_of = vec![usize::MAX; num_nodes];
    let mut subgraph_class = Vec::with_capacity(num_subgraphs);
    let mut subgraph_sizes = Vec::with_capacity(num_subgraphs);
    let mut sid = 0usize;
    for (c, parts) in parts_per_class.iter().enumerate() {
        for part in parts {
            for &node in part {
                if node >= num_nodes {
                    return Err(Error::Range {
                        id: node,
                        num_nodes,
                    });
                }
                if subgraph_of[node] != usize::MAX {
                    return Err(Error::Plan(format!("node {node} assigned twice")));
                }
                if class_of[node] != c {
                    return Err(Error::Plan(format!(
                        "node {node} is in class {} but listed under class {c}",
                        class_of[node]
                    )));
                }
                subgraph_of[node] = sid;
            }
            subgraph_class.push(c);
            subgraph_sizes.push(part.len());
            sid += 1;
        }
    }
    if let Some(node) = subgraph_of.iter().position(|&s| s == usize::MAX) {
        return Err(Error::Plan(format!("node {node} not assigned to a subgraph")));
    }

    let mut order: Vec<usize> = (0..num_nodes).collect();
    order.sort_by_key(|&n| {
        let s = subgraph_of[n];
        (group_of[s], class_of[n], s, n)
    });
    let mut permutation = vec![0usize; num_nodes];
    for (pos, &node) in order.iter().enumerate() {
        permutation[node] = pos;
    }
    let mut block_ranges = vec![(usize::MAX, 0usize); num_subgraphs];
    for (pos, &node) in order.iter().enumerate() {
        let s = subgraph_of[node];
        let (lo, hi) = &mut block_ranges[s];
        *lo = (*lo).min(pos);
        *hi = (*hi).max(pos + 1);
    }
    for (s, &(lo, hi)) in block_ranges.iter().enumerate() {
        if hi - lo != subgraph_sizes[s] {
            return Err(Error::Plan(format!(
                "subgraph {s} is not contiguous in the permuted order"
            )));
        }
    }

    let smallest_block = block_ranges
        .iter()
        .map(|&(lo, hi)| hi - lo)
        .min()
        .unwrap_or(num_nodes);
    let default_side = (smallest_block / 8).max(4);
    let patch_size = patch_size.unwrap_or((default_side, default_side));
    if patch_size.0 == 0 || patch_size.1 == 0 {
        return Err(Error::Argument("patch size must be positive".to_string()));
    }

    Ok(PartitionPlan {
        num_classes,
        num_groups,
        num_subgraphs,
        cuts,
        class_of,
        subgraph_of,
        group_of,
        subgraph_class,
        permutation,
        block_ranges,
        patch_size,
    })
}

/// Per-class nnz statistics of the diagonal blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: usize,
    /// (subgraph id, block nnz) for each of the class's subgraphs.
    pub subgraph_nnz: Vec<(usize, usize)>,
    /// max block nnz / mean block nnz; 1.0 when the class has no edges.
    pub imbalance_ratio: f64,
}

/// The denser diagonal blocks (one per subgraph, in local coordinates) plus
/// the sparser off-diagonal remainder.
#[derive(Debug, Clone)]
pub struct WorkloadSplit {
    pub denser_blocks: Vec<SparseMatrix>,
    /// Remainder in CSC, the sparser branch's operating format.
    pub sparser_remainder: SparseMatrix,
    pub per_class_stats: Vec<ClassStats>,
    pub off_diagonal_fraction: f64,
    pub denser_nnz: usize,
    pub sparser_nnz: usize,
}

/// Splits the permuted adjacency into per-subgraph diagonal blocks and the
/// off-diagonal remainder. Block ranges must cover [0, N) exactly.
pub fn split_workloads(a_perm: &SparseMatrix, plan: &PartitionPlan) -> Result<WorkloadSplit> {
    let n = a_perm.rows();
    if plan.num_nodes() != n {
        return Err(Error::Plan(format!(
            "plan covers {} nodes but the matrix is {n}x{}",
            plan.num_nodes(),
            a_perm.cols()
        )));
    }
    let mut sorted_ranges = plan.block_ranges.clone();
    sorted_ranges.sort_unstable();
    let mut cursor = 0usize;
    for &(lo, hi) in &sorted_ranges {
        if lo != cursor || hi < lo {
            return Err(Error::Plan(format!(
                "block ranges do not cover [0, {n}) exactly (gap at {cursor})"
            )));
        }
        cursor = hi;
    }
    if cursor != n {
        return Err(Error::Plan(format!(
            "block ranges stop at {cursor}, expected {n}"
        )));
    }

    let owner = plan.subgraph_at_position();
    let mut block_triples: Vec<Vec<(usize, usize, f64)>> =
        vec![Vec::new(); plan.num_subgraphs];
    let mut rem_triples: Vec<(usize, usize, f64)> = Vec::new();
    a_perm.for_each_entry(|r, c, v| {
        let s = owner[r];
        if s == owner[c] {
            let lo = plan.block_ranges[s].0;
            block_triples[s].push((r - lo, c - lo, v));
        } else {
            rem_triples.push((r, c, v));
        }
    });
    let denser_blocks = block_triples
        .into_iter()
        .enumerate()
        .map(|(s, triples)| {
            let size = plan.block_ranges[s].1 - plan.block_ranges[s].0;
            SparseMatrix::from_triples(size, size, triples)
        })
        .collect::<Result<Vec<_>>>()?;
    let sparser_nnz = rem_triples.len();
    let sparser_remainder =
        SparseMatrix::from_triples(n, n, rem_triples)?.to_format(SparseFormat::Csc);
    let denser_nnz: usize = denser_blocks.iter().map(SparseMatrix::nnz).sum();
    debug_assert_eq!(denser_nnz + sparser_nnz, a_perm.nnz());

    let mut per_class_stats = Vec::with_capacity(plan.num_classes);
    for c in 0..plan.num_classes {
        let subgraph_nnz: Vec<(usize, usize)> = (0..plan.num_subgraphs)
            .filter(|&s| plan.subgraph_class[s] == c)
            .map(|s| (s, denser_blocks[s].nnz()))
            .collect();
        let imbalance_ratio = if subgraph_nnz.is_empty() {
            1.0
        } else {
            let total: usize = subgraph_nnz.iter().map(|&(_, z)| z).sum();
            if total == 0 {
                1.0
            } else {
                let mean = total as f64 / subgraph_nnz.len() as f64;
                subgraph_nnz.iter().map(|&(_, z)| z).max().unwrap() as f64 / mean
            }
        };
        per_class_stats.push(ClassStats {
            class: c,
            subgraph_nnz,
            imbalance_ratio,
        });
    }
    let total = a_perm.nnz();
    let off_diagonal_fraction = if total == 0 {
        0.0
    } else {
        sparser_nnz as f64 / total as f64
    };
    Ok(WorkloadSplit {
        denser_blocks,
        sparser_remainder,
        per_class_stats,
        off_diagonal_fraction,
        denser_nnz,
        sparser_nnz,
    })
}

/// Aggregation MAC counts: nnz of each piece times the width of the dense
/// operand it multiplies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadStats {
    pub per_block_macs: Vec<u64>,
    pub per_class_macs: Vec<u64>,
    pub sparser_macs: u64,
}

pub fn workload_stats(split: &WorkloadSplit, width: usize) -> WorkloadStats {
    let per_block_macs: Vec<u64> = split
        .denser_blocks
        .iter()
        .map(|b| (b.nnz() * width) as u64)
        .collect();
    let per_class_macs = split
        .per_class_stats
        .iter()
        .map(|cs| {
            cs.subgraph_nnz
                .iter()
                .map(|&(s, _)| per_block_macs[s])
                .sum()
        })
        .collect();
    WorkloadStats {
        per_block_macs,
        per_class_macs,
        sparser_macs: (split.sparser_nnz * width) as u64,
    }
}

/// MACs of a dense-weight combination over a row subset: nonzero feature
/// entries in those rows times the output width.
pub fn combination_macs(x: &crate::gcn::DenseMatrix, rows: &[usize], out_dim: usize) -> u64 {
    let nnz: usize = rows
        .iter()
        .map(|&r| x.row(r).iter().filter(|v| **v != 0.0).count())
        .sum();
    (nnz * out_dim) as u64
}
