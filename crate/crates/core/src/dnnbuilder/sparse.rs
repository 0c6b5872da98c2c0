//! Compressed-row weight matrices.
//!
//! Stored entries may be exactly zero; those are kept so that the layout
//! mirrors the construction, and are skipped when counting network size.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    /// Duplicate `(i, j)` entries are summed.
    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut per_row: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); rows];
        for (i, j, v) in entries {
            assert!(i < rows && j < cols, "entry ({i},{j}) outside {rows}x{cols}");
            *per_row[i].entry(j).or_insert(0.0) += v;
        }
        Self::from_rows(cols, per_row)
    }

    fn from_rows(cols: usize, per_row: Vec<BTreeMap<usize, f64>>) -> Self {
        let rows = per_row.len();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in per_row {
            for (j, v) in r {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    /// `out = W x + b`.
    pub fn affine_into(&self, x: &[f64], bias: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.rows).map(|i| {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = bias[i];
            for k in a..b {
                s += self.values[k] * x[self.col_idx[k]];
            }
            s
        }));
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let per_row = (0..self.rows)
            .map(|i| {
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for (k, v) in self.row(i) {
                    for (j, w) in rhs.row(k) {
                        *acc.entry(j).or_insert(0.0) += v * w;
                    }
                }
                acc
            })
            .collect();
        Self::from_rows(rhs.cols, per_row)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let zero = vec![0.0; self.rows];
        let mut out = Vec::new();
        self.affine_into(x, &zero, &mut out);
        out
    }

    pub fn block_diag(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut c0 = 0;
        for b in blocks {
            for i in 0..b.rows {
                for (j, v) in b.row(i) {
                    col_idx.push(c0 + j);
                    values.push(v);
                }
                row_ptr.push(col_idx.len());
            }
            c0 += b.cols;
        }
        SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Stack row blocks sharing a column count.
    pub fn vstack(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        assert!(blocks.iter().all(|b| b.cols == cols), "column counts differ");
        let mut out = SparseMatrix::zeros(0, cols);
        for b in blocks {
            let off = out.col_idx.len();
            out.col_idx.extend_from_slice(&b.col_idx);
            out.values.extend_from_slice(&b.values);
            out.row_ptr.extend(b.row_ptr[1..].iter().map(|p| p + off));
            out.rows += b.rows;
        }
        out
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = self.row_ptr.len() == self.rows + 1
            && self.row_ptr.first() == Some(&0)
            && self.row_ptr.windows(2).all(|w| w[0] <= w[1])
            && *self.row_ptr.last().unwrap_or(&0) == self.col_idx.len()
            && self.col_idx.len() == self.values.len()
            && self.col_idx.iter().all(|&j| j < self.cols);
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("malformed compressed-row matrix".into()))
        }
    }
}
