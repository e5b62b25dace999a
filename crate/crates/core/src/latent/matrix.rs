use std::collections::HashSet;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
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

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>], rows: usize) -> Self {
        let cols = columns.len();
        let mut m = DenseMatrix::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                m.data[i * cols + j] = v;
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

/// Compressed sparse row matrix with unique row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicate positions and
    /// duplicate labels are rejected; explicit zeros are dropped.
    pub fn from_triplets(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        let (n_rows, n_cols) = (row_labels.len(), col_labels.len());
        for labels in [&row_labels, &col_labels] {
            let mut seen = HashSet::new();
            if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
                return Err(Error::InvalidParameter {
                    name: "labels",
                    reason: format!("duplicate label {dup:?}"),
                });
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidParameter {
                    name: "triplets",
                    reason: format!("entry ({r}, {c}) outside {n_rows}x{n_cols}"),
                });
            }
            if last == Some((r, c)) {
                return Err(Error::InvalidParameter {
                    name: "triplets",
                    reason: format!("duplicate entry ({r}, {c})"),
                });
            }
            last = Some((r, c));
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            row_labels,
            col_labels,
        })
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let triplets = (0..m.rows)
            .flat_map(|i| (0..m.cols).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, m.get(i, j)))
            .collect();
        let rows = (0..m.rows).map(|i| format!("r{i}")).collect();
        let cols = (0..m.cols).map(|j| format!("c{j}")).collect();
        Self::from_triplets(rows, cols, triplets).expect("dense matrix is well formed")
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.triplets() {
            m.set(r, c, v);
        }
        m
    }

    pub fn row_norm(&self, r: usize) -> f64 {
        self.row(r).map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Scales every nonzero row to unit Euclidean norm; returns the indices
    /// of rows that are entirely zero.
    pub fn normalize_rows(&mut self) -> Vec<usize> {
        let mut zero = Vec::new();
        for r in 0..self.n_rows {
            let norm = self.row_norm(r);
            if norm == 0.0 {
                zero.push(r);
                continue;
            }
            for v in &mut self.values[self.row_ptr[r]..self.row_ptr[r + 1]] {
                *v /= norm;
            }
        }
        zero
    }

    /// `self · x` for column vectors `x` of length `n_cols`.
    pub(crate) fn mul_columns(&self, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        xs.iter()
            .map(|x| (0..self.n_rows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect())
            .collect()
    }

    /// `selfᵀ · y` for column vectors `y` of length `n_rows`.
    pub(crate) fn tmul_columns(&self, ys: &[Vec<f64>]) -> Vec<Vec<f64>> {
        ys.iter()
            .map(|y| {
                let mut out = vec![0.0; self.n_cols];
                for (r, &yr) in y.iter().enumerate() {
                    if yr != 0.0 {
                        for (c, v) in self.row(r) {
                            out[c] += v * yr;
                        }
                    }
                }
                out
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize, p: &str) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    #[test]
    fn rejects_duplicates() {
        let err = SparseMatrix::from_triplets(labels(2, "r"), labels(2, "c"), vec![(0, 0, 1.0), (0, 0, 2.0)]);
        assert!(err.is_err());
        let err = SparseMatrix::from_triplets(vec!["a".into(), "a".into()], labels(1, "c"), vec![]);
        assert!(err.is_err());
    }

    #[test]
    fn products() {
        let m = SparseMatrix::from_triplets(labels(2, "r"), labels(3, "c"), vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)])
            .unwrap();
        assert_eq!(m.mul_columns(&[vec![1.0, 1.0, 1.0]]), vec![vec![3.0, 3.0]]);
        assert_eq!(m.tmul_columns(&[vec![1.0, 2.0]]), vec![vec![1.0, 6.0, 2.0]]);
    }

    #[test]
    fn normalize_flags_zero_rows() {
        let mut m = SparseMatrix::from_triplets(labels(2, "r"), labels(2, "c"), vec![(0, 0, 3.0), (0, 1, 4.0)]).unwrap();
        assert_eq!(m.normalize_rows(), vec![1]);
        assert!((m.row_norm(0) - 1.0).abs() < 1e-15);
    }
}
