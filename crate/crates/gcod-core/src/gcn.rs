//! Golden functional model: dense matrices, the reference SpMM, the layered
//! GCN forward pass, and the cross-entropy loss. Everything here runs in
//! double precision and serves as the oracle for the simulators.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Row-major dense matrix of f64 values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        DenseMatrix { rows: r, cols: c, data }
    }

    /// Seeded uniform values in [-0.5, 0.5).
    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| rng.random::<f64>() - 0.5)
            .collect();
        DenseMatrix { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }

    /// Dense product self * rhs with the inner loop over the shared
    /// dimension; the summation order is fixed so results are reproducible.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Argument(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn relu_in_place(&mut self) {
        for v in &mut self.data {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }

    /// Row-wise softmax with max subtraction for stability.
    pub fn softmax_rows_in_place(&mut self) {
        for r in 0..self.rows {
            let row = self.row_mut(r);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
    }

    /// Largest relative elementwise difference, with an absolute floor of
    /// 1e-12 in the denominator so near-zero entries compare sensibly.
    pub fn max_rel_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        let mut worst = 0.0f64;
        for (a, b) in self.data.iter().zip(&other.data) {
            let denom = a.abs().max(b.abs()).max(1e-12);
            worst = worst.max((a - b).abs() / denom);
        }
        worst
    }
}

/// Per-layer dense weights, seeded uniform in [-0.5, 0.5).
#[derive(Debug, Clone)]
pub struct WeightSet {
    pub layers: Vec<DenseMatrix>,
    pub seed: u64,
}

impl WeightSet {
    /// `dims` chains layer shapes: dims[0] is the input feature width, each
    /// following entry is a layer output width.
    pub fn seeded(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Argument(
                "weight set needs at least input and output dims".to_string(),
            ));
        }
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| DenseMatrix::random(w[0], w[1], seed.wrapping_add(l as u64)))
            .collect();
        Ok(WeightSet {
            layers,
            seed,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |w| w.cols)
    }
}

/// Exact sparse-times-dense product: out[i] += v * d[j] for every stored
/// entry (i, j, v). This is the oracle every dataflow schedule is checked
/// against.
pub fn spmm_reference(s: &SparseMatrix, d: &DenseMatrix) -> Result<DenseMatrix> {
    if s.cols() != d.rows {
        return Err(Error::Argument(format!(
            "spmm shape mismatch: {}x{} * {}x{}",
            s.rows(),
            s.cols(),
            d.rows,
            d.cols
        )));
    }
    let mut out = DenseMatrix::zeros(s.rows(), d.cols);
    s.for_each_entry(|r, c, v| {
        let src = d.row(c);
        let dst = &mut out.data[r * d.cols..(r + 1) * d.cols];
        for (o, x) in dst.iter_mut().zip(src) {
            *o += v * x;
        }
    });
    Ok(out)
}

/// Which side of the associativity A(XW) == (AX)W the forward pass computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardOrder {
    /// A * (X * W): combination first, matching the simulated pipelines.
    CombinationFirst,
    /// (A * X) * W: aggregation first, for cross-checking associativity.
    AggregationFirst,
}

/// Layered GCN forward pass: repeated A(XW) with ReLU between layers and a
/// row softmax after the last one.
pub fn gcn_forward(
    a_hat: &SparseMatrix,
    x: &DenseMatrix,
    weights: &WeightSet,
    order: ForwardOrder,
) -> Result<DenseMatrix> {
    if a_hat.rows() != a_hat.cols() {
        return Err(Error::Argument("adjacency must be square".to_string()));
    }
    if a_hat.cols() != x.rows {
        return Err(Error::Argument(format!(
            "adjacency is {}x{} but features have {} rows",
            a_hat.rows(),
            a_hat.cols(),
            x.rows
        )));
    }
    let mut h = x.clone();
    let last = weights.num_layers() - 1;
    for (l, w) in weights.layers.iter().enumerate() {
        if h.cols != w.rows {
            return Err(Error::Argument(format!(
                "layer {l}: feature width {} does not match weight rows {}",
                h.cols, w.rows
            )));
        }
        h = match order {
            ForwardOrder::CombinationFirst => spmm_reference(a_hat, &h.matmul(w)?)?,
            ForwardOrder::AggregationFirst => spmm_reference(a_hat, &h)?.matmul(w)?,
        };
        if l < last {
            h.relu_in_place();
        }
    }
    h.softmax_rows_in_place();
    Ok(h)
}

/// Cross-entropy over the masked (labeled) rows of a probability matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossEntropy {
    pub loss: f64,
    /// How many probabilities had to be clamped at 1e-12.
    pub clamped: usize,
}

pub fn cross_entropy(z: &DenseMatrix, labels: &[usize], mask: &[bool]) -> Result<CrossEntropy> {
    if labels.len() != z.rows || mask.len() != z.rows {
        return Err(Error::Argument(format!(
            "labels/mask length must equal {} rows",
            z.rows
        )));
    }
    let mut loss = 0.0;
    let mut clamped = 0;
    for n in 0..z.rows {
        if !mask[n] {
            continue;
        }
        if labels[n] >= z.cols {
            return Err(Error::Argument(format!(
                "label {} out of range for {} classes at row {n}",
                labels[n], z.cols
            )));
        }
        let mut p = z.get(n, labels[n]);
        if p < 1e-12 {
            p = 1e-12;
            clamped += 1;
        }
        loss -= p.ln();
    }
    Ok(CrossEntropy { loss, clamped })
}
