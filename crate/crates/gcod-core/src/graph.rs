//! Undirected graph ingestion, synthesis, degrees, and adjacency
//! normalization.

use crate::error::{Error, Result};
use crate::gcn::DenseMatrix;
use crate::sparse::SparseMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// An undirected graph. Edges are stored once as (min, max) pairs, sorted and
/// deduplicated; self-loops are never stored (normalization inserts them on
/// request). The adjacency it materializes is symmetric with binary values.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub node_features: Option<DenseMatrix>,
    pub labels: Option<Vec<usize>>,
    pub label_mask: Option<Vec<bool>>,
}

/// Per-node neighbor counts in the symmetric adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(pub Vec<usize>);

impl DegreeVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }
}

impl Graph {
    /// Builds a graph from raw (possibly directed, duplicated) edge pairs.
    /// Self-loops are dropped, edges are symmetrized and deduplicated.
    pub fn from_edges(num_nodes: usize, raw: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (u, v) in raw {
            if u >= num_nodes {
                return Err(Error::Range { id: u, num_nodes });
            }
            if v >= num_nodes {
                return Err(Error::Range { id: v, num_nodes });
            }
            if u == v {
                continue;
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Graph {
            num_nodes,
            edges,
            node_features: None,
            labels: None,
            label_mask: None,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> DegreeVector {
        let mut d = vec![0usize; self.num_nodes];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        DegreeVector(d)
    }

    /// Neighbor lists in ascending order.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// The symmetric binary adjacency in COO (both (u,v) and (v,u) stored).
    pub fn adjacency(&self) -> SparseMatrix {
        let mut triples = Vec::with_capacity(self.edges.len() * 2);
        for &(u, v) in &self.edges {
            triples.push((u, v, 1.0));
            triples.push((v, u, 1.0));
        }
        SparseMatrix::from_triples(self.num_nodes, self.num_nodes, triples)
            .expect("edges are validated at construction")
    }

    /// Symmetrically normalized adjacency: entry (i, j) = 1/sqrt(d_i * d_j)
    /// for each stored edge, with degrees recomputed after optional self-loop
    /// insertion. Without self-loops a zero-degree node is an error.
    pub fn normalize_adjacency(&self, add_self_loops: bool) -> Result<SparseMatrix> {
        let mut d = self.degrees().0;
        if add_self_loops {
            for deg in &mut d {
                *deg += 1;
            }
        } else if let Some(node) = d.iter().position(|deg| *deg == 0) {
            return Err(Error::Normalization { node });
        }
        let mut triples = Vec::with_capacity(self.edges.len() * 2 + self.num_nodes);
        for &(u, v) in &self.edges {
            let w = 1.0 / ((d[u] * d[v]) as f64).sqrt();
            triples.push((u, v, w));
            triples.push((v, u, w));
        }
        if add_self_loops {
            for (i, &deg) in d.iter().enumerate() {
                triples.push((i, i, 1.0 / deg as f64));
            }
        }
        SparseMatrix::from_triples(self.num_nodes, self.num_nodes, triples)
    }
}

/// Parses the edge-list text format: an optional `N <count>` header, then one
/// `u v` pair per line. Lines starting with `#` and blank lines are skipped.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    let mut raw: Vec<(usize, usize)> = Vec::new();
    let mut max_id = 0usize;
    let mut saw_edge = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let first = parts.next().unwrap();
        if first == "N" {
            if saw_edge || declared.is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "header must appear once, before any edge".to_string(),
                });
            }
            let count = parts
                .next()
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: "header needs a node count".to_string(),
                })?
                .parse::<usize>()
                .map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad node count: {e}"),
                })?;
            declared = Some(count);
            continue;
        }
        let u = first.parse::<usize>().map_err(|e| Error::Parse {
            line: line_no,
            msg: format!("bad node id: {e}"),
        })?;
        let v = parts
            .next()
            .ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected \"u v\"".to_string(),
            })?
            .parse::<usize>()
            .map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad node id: {e}"),
            })?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "expected exactly two ids per line".to_string(),
            });
        }
        if let Some(n) = declared {
            if u >= n || v >= n {
                return Err(Error::Range {
                    id: u.max(v),
                    num_nodes: n,
                });
            }
        }
        max_id = max_id.max(u).max(v);
        saw_edge = true;
        raw.push((u, v));
    }
    let num_nodes = declared.unwrap_or(if saw_edge { max_id + 1 } else { 0 });
    Graph::from_edges(num_nodes, raw)
}

/// Serializes a graph back to the edge-list format, header included.
pub fn to_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(g.edges.len() * 8 + 16);
    out.push_str(&format!("N {}\n", g.num_nodes));
    for &(u, v) in &g.edges {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Feature file: one row per node, whitespace-separated reals.
pub fn load_features(text: &str, num_nodes: usize) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad feature value: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(prev) = rows.first() {
            if prev.len() != row.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {} features, found {}", prev.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.len() != num_nodes {
        return Err(Error::Argument(format!(
            "feature file has {} rows but the graph has {num_nodes} nodes",
            rows.len()
        )));
    }
    Ok(DenseMatrix::from_rows(rows))
}

/// Label file: one integer per line, -1 meaning unlabeled (mask off).
pub fn load_labels(text: &str, num_nodes: usize) -> Result<(Vec<usize>, Vec<bool>)> {
    let mut labels = Vec::new();
    let mut mask = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v = trimmed.parse::<i64>().map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("bad label: {e}"),
        })?;
        if v < 0 {
            labels.push(0);
            mask.push(false);
        } else {
            labels.push(v as usize);
            mask.push(true);
        }
    }
    if labels.len() != num_nodes {
        return Err(Error::Argument(format!(
            "label file has {} rows but the graph has {num_nodes} nodes",
            labels.len()
        )));
    }
    Ok((labels, mask))
}

/// Deterministic preferential-attachment generator. The first `m_attach`
/// nodes form a complete seed graph; each later node attaches to `m_attach`
/// distinct existing nodes sampled proportionally to degree + 1.
pub fn synth_power_law(n: usize, m_attach: usize, seed: u64) -> Result<Graph> {
    if m_attach < 1 {
        return Err(Error::Argument("m_attach must be at least 1".to_string()));
    }
    if n <= m_attach {
        return Err(Error::Argument(format!(
            "need n > m_attach, got n={n}, m_attach={m_attach}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m_attach * n);
    // Pool of endpoint ids: one entry per node plus one per incident edge,
    // giving degree-plus-one sampling weights.
    let mut pool: Vec<usize> = (0..m_attach).collect();
    for u in 0..m_attach {
        for v in (u + 1)..m_attach {
            edges.push((u, v));
            pool.push(u);
            pool.push(v);
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m_attach);
    for node in m_attach..n {
        chosen.clear();
        while chosen.len() < m_attach {
            let pick = pool[rng.random_range(0..pool.len())];
            if !chosen.contains(&pick) {
                chosen.push(pick);
            }
        }
        chosen.sort_unstable();
        for &target in &chosen {
            edges.push((target, node));
            pool.push(target);
            pool.push(node);
        }
        pool.push(node);
    }
    Graph::from_edges(n, edges)
}
