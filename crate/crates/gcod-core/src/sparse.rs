//! Sparse matrix storage in COO, CSR, or CSC with exact format conversion,
//! permutation, and the storage cost model used for traffic accounting.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SparseFormat {
    Coo,
    Csr,
    Csc,
}

impl std::fmt::Display for SparseFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SparseFormat::Coo => write!(f, "COO"),
            SparseFormat::Csr => write!(f, "CSR"),
            SparseFormat::Csc => write!(f, "CSC"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Entries sorted lexicographically by (row, col).
    Coo {
        row: Vec<usize>,
        col: Vec<usize>,
        val: Vec<f64>,
    },
    /// `offsets.len() == rows + 1`; columns sorted within each row.
    Csr {
        offsets: Vec<usize>,
        col: Vec<usize>,
        val: Vec<f64>,
    },
    /// `offsets.len() == cols + 1`; rows sorted within each column.
    Csc {
        offsets: Vec<usize>,
        row: Vec<usize>,
        val: Vec<f64>,
    },
}

/// A sparse matrix with an explicit format tag. Conversions preserve the
/// (row, col, value) multiset exactly; no arithmetic is ever applied to
/// stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl SparseMatrix {
    /// Builds a COO matrix from entry triples. Triples are sorted into the
    /// canonical (row, col) order; out-of-range indices and duplicate
    /// coordinates are rejected.
    pub fn from_triples(
        rows: usize,
        cols: usize,
        mut triples: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triples {
            if r >= rows {
                return Err(Error::Range {
                    id: r,
                    num_nodes: rows,
                });
            }
            if c >= cols {
                return Err(Error::Range {
                    id: c,
                    num_nodes: cols,
                });
            }
        }
        triples.sort_by_key(|a| (a.0, a.1));
        for w in triples.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::Argument(format!(
                    "duplicate entry at ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut row = Vec::with_capacity(triples.len());
        let mut col = Vec::with_capacity(triples.len());
        let mut val = Vec::with_capacity(triples.len());
        for (r, c, v) in triples {
            row.push(r);
            col.push(c);
            val.push(v);
        }
        Ok(SparseMatrix {
            rows,
            cols,
            storage: Storage::Coo { row, col, val },
        })
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            storage: Storage::Coo {
                row: Vec::new(),
                col: Vec::new(),
                val: Vec::new(),
            },
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn format(&self) -> SparseFormat {
        match self.storage {
            Storage::Coo { .. } => SparseFormat::Coo,
            Storage::Csr { .. } => SparseFormat::Csr,
            Storage::Csc { .. } => SparseFormat::Csc,
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Coo { val, .. } | Storage::Csr { val, .. } | Storage::Csc { val, .. } => {
                val.len()
            }
        }
    }

    /// Visits every stored entry as (row, col, value) in the storage order of
    /// the current format.
    pub fn for_each_entry<F: FnMut(usize, usize, f64)>(&self, mut f: F) {
        match &self.storage {
            Storage::Coo { row, col, val } => {
                for i in 0..val.len() {
                    f(row[i], col[i], val[i]);
                }
            }
            Storage::Csr { offsets, col, val } => {
                for r in 0..self.rows {
                    for i in offsets[r]..offsets[r + 1] {
                        f(r, col[i], val[i]);
                    }
                }
            }
            Storage::Csc { offsets, row, val } => {
                for c in 0..self.cols {
                    for i in offsets[c]..offsets[c + 1] {
                        f(row[i], c, val[i]);
                    }
                }
            }
        }
    }

    /// All entries in canonical (row, col) order, regardless of format.
    pub fn triples(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        self.for_each_entry(|r, c, v| out.push((r, c, v)));
        out.sort_by_key(|a| (a.0, a.1));
        out
    }

    /// Converts to the target format. The (row, col, value) multiset is
    /// carried over exactly.
    pub fn to_format(&self, target: SparseFormat) -> SparseMatrix {
        if self.format() == target {
            return self.clone();
        }
        let triples = self.triples();
        let n = triples.len();
        let storage = match target {
            SparseFormat::Coo => {
                let mut row = Vec::with_capacity(n);
                let mut col = Vec::with_capacity(n);
                let mut val = Vec::with_capacity(n);
                for (r, c, v) in triples {
                    row.push(r);
                    col.push(c);
                    val.push(v);
                }
                Storage::Coo { row, col, val }
            }
            SparseFormat::Csr => {
                let mut offsets = vec![0usize; self.rows + 1];
                let mut col = Vec::with_capacity(n);
                let mut val = Vec::with_capacity(n);
                for &(r, _, _) in &triples {
                    offsets[r + 1] += 1;
                }
                for i in 0..self.rows {
                    offsets[i + 1] += offsets[i];
                }
                for (_, c, v) in triples {
                    col.push(c);
                    val.push(v);
                }
                Storage::Csr { offsets, col, val }
            }
            SparseFormat::Csc => {
                let mut by_col = triples;
                by_col.sort_by_key(|a| (a.1, a.0));
                let mut offsets = vec![0usize; self.cols + 1];
                let mut row = Vec::with_capacity(n);
                let mut val = Vec::with_capacity(n);
                for &(_, c, _) in &by_col {
                    offsets[c + 1] += 1;
                }
                for i in 0..self.cols {
                    offsets[i + 1] += offsets[i];
                }
                for (r, _, v) in by_col {
                    row.push(r);
                    val.push(v);
                }
                Storage::Csc { offsets, row, val }
            }
        };
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            storage,
        }
    }

    /// Storage bytes under the declared cost model: COO pays two indices and
    /// one value per nonzero; CSR/CSC pay one index and one value per nonzero
    /// plus (dim + 1) offset entries at index width.
    pub fn storage_bytes(&self, value_bytes: usize, index_bytes: usize) -> usize {
        let nnz = self.nnz();
        match self.format() {
            SparseFormat::Coo => nnz * (2 * index_bytes + value_bytes),
            SparseFormat::Csr => nnz * (index_bytes + value_bytes) + (self.rows + 1) * index_bytes,
            SparseFormat::Csc => nnz * (index_bytes + value_bytes) + (self.cols + 1) * index_bytes,
        }
    }

    /// Applies a node permutation: entry (i, j) moves to (perm[i], perm[j]).
    /// The result is in the same format as the input. `perm` must be a
    /// bijection on [0, rows) and the matrix must be square.
    pub fn permuted(&self, perm: &[usize]) -> Result<SparseMatrix> {
        if self.rows != self.cols {
            return Err(Error::Argument(format!(
                "permutation requires a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if perm.len() != self.rows {
            return Err(Error::Argument(format!(
                "permutation length {} does not match dimension {}",
                perm.len(),
                self.rows
            )));
        }
        let mut seen = vec![false; self.rows];
        for &p in perm {
            if p >= self.rows || seen[p] {
                return Err(Error::Argument(
                    "permutation is not a bijection".to_string(),
                ));
            }
            seen[p] = true;
        }
        let mut triples = Vec::with_capacity(self.nnz());
        self.for_each_entry(|r, c, v| triples.push((perm[r], perm[c], v)));
        let permuted = SparseMatrix::from_triples(self.rows, self.cols, triples)?;
        Ok(permuted.to_format(self.format()))
    }

    /// Mean |row - col| distance over stored nonzeros. Low values mean the
    /// nonzeros concentrate near the diagonal.
    pub fn polarization_metric(&self) -> Result<f64> {
        if self.nnz() == 0 {
            return Err(Error::Metric(
                "polarization metric undefined for an empty matrix".to_string(),
            ));
        }
        let mut sum = 0u64;
        self.for_each_entry(|r, c, _| {
            sum += r.abs_diff(c) as u64;
        });
        Ok(sum as f64 / self.nnz() as f64)
    }

    /// Row and value slices for one CSC column. Errors unless in CSC format.
    pub fn csc_column(&self, c: usize) -> Result<(&[usize], &[f64])> {
        match &self.storage {
            Storage::Csc { offsets, row, val } => {
                let (lo, hi) = (offsets[c], offsets[c + 1]);
                Ok((&row[lo..hi], &val[lo..hi]))
            }
            _ => Err(Error::Format(format!(
                "expected CSC, found {}",
                self.format()
            ))),
        }
    }

    /// Column and value slices for one CSR row. Errors unless in CSR format.
    pub fn csr_row(&self, r: usize) -> Result<(&[usize], &[f64])> {
        match &self.storage {
            Storage::Csr { offsets, col, val } => {
                let (lo, hi) = (offsets[r], offsets[r + 1]);
                Ok((&col[lo..hi], &val[lo..hi]))
            }
            _ => Err(Error::Format(format!(
                "expected CSR, found {}",
                self.format()
            ))),
        }
    }

    /// Number of stored entries per row, independent of format.
    pub fn row_nnz_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.rows];
        self.for_each_entry(|r, _, _| counts[r] += 1);
        counts
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let triples = self.triples();
        let mut transposed: Vec<(usize, usize, f64)> =
            triples.iter().map(|&(r, c, v)| (c, r, v)).collect();
        transposed.sort_by_key(|a| (a.0, a.1));
        triples == transposed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triples(4, 4, vec![(0, 1, 1.0), (1, 0, 1.0), (2, 3, 0.5), (3, 3, 2.0)])
            .unwrap()
    }

    #[test]
    fn round_trip_preserves_triples() {
        let m = sample();
        let csr = m.to_format(SparseFormat::Csr);
        let csc = csr.to_format(SparseFormat::Csc);
        let coo = csc.to_format(SparseFormat::Coo);
        assert_eq!(m.triples(), csr.triples());
        assert_eq!(m.triples(), csc.triples());
        assert_eq!(m.triples(), coo.triples());
        assert_eq!(coo.format(), SparseFormat::Coo);
    }

    #[test]
    fn storage_cost_model() {
        // 100x100, nnz = 500, 4-byte indices and values.
        let triples: Vec<_> = (0..500).map(|i| (i / 5, (i * 7) % 100, 1.0)).collect();
        let m = SparseMatrix::from_triples(100, 100, triples).unwrap();
        assert_eq!(m.nnz(), 500);
        assert_eq!(m.storage_bytes(4, 4), 6000);
        assert_eq!(m.to_format(SparseFormat::Csc).storage_bytes(4, 4), 4404);
        assert_eq!(m.to_format(SparseFormat::Csr).storage_bytes(4, 4), 4404);
    }

    #[test]
    fn empty_matrix_offsets() {
        let m = SparseMatrix::empty(3, 3);
        let csr = m.to_format(SparseFormat::Csr);
        match &csr.storage {
            Storage::Csr { offsets, .. } => assert_eq!(offsets, &vec![0; 4]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn identity_permutation_is_noop() {
        let m = sample();
        let p = m.permuted(&[0, 1, 2, 3]).unwrap();
        assert_eq!(m, p);
    }

    #[test]
    fn swap_permutation_on_symmetric_edge() {
        let m =
            SparseMatrix::from_triples(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let p = m.permuted(&[1, 0]).unwrap();
        assert_eq!(m.triples(), p.triples());
    }

    #[test]
    fn permutation_round_trip() {
        let m = sample();
        let perm = vec![2, 0, 3, 1];
        let mut inverse = vec![0; 4];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let back = m.permuted(&perm).unwrap().permuted(&inverse).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn non_bijective_permutation_rejected() {
        let m = sample();
        assert!(m.permuted(&[0, 0, 1, 2]).is_err());
        assert!(m.permuted(&[0, 1]).is_err());
    }

    #[test]
    fn polarization_examples() {
        let diag =
            SparseMatrix::from_triples(4, 4, vec![(0, 0, 1.0), (2, 2, 1.0)]).unwrap();
        assert_eq!(diag.polarization_metric().unwrap(), 0.0);

        let single = SparseMatrix::from_triples(4, 4, vec![(0, 3, 1.0)]).unwrap();
        assert_eq!(single.polarization_metric().unwrap(), 3.0);

        let anti =
            SparseMatrix::from_triples(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(anti.polarization_metric().unwrap(), 1.0);

        assert!(SparseMatrix::empty(2, 2).polarization_metric().is_err());
    }

    #[test]
    fn duplicate_entries_rejected() {
        let err = SparseMatrix::from_triples(2, 2, vec![(0, 1, 1.0), (0, 1, 2.0)]);
        assert!(err.is_err());
    }

    #[test]
    fn format_accessors_demand_their_format() {
        let m = sample();
        assert!(m.csc_column(0).is_err());
        assert!(m.csr_row(0).is_err());
        let csc = m.to_format(SparseFormat::Csc);
        let (rows, vals) = csc.csc_column(3).unwrap();
        assert_eq!(rows, &[2, 3]);
        assert_eq!(vals, &[0.5, 2.0]);
        let csr = m.to_format(SparseFormat::Csr);
        let (cols, vals) = csr.csr_row(0).unwrap();
        assert_eq!(cols, &[1]);
        assert_eq!(vals, &[1.0]);
    }
}
