//! Row-major matrix storage behind a single access interface.
//!
//! Toy and synthetic instances are dense; LIBSVM datasets are sparse, so both
//! layouts live behind the same handful of operations the solvers need:
//! `matvec`, `matvec_t`, row iteration and row filtering.

/// An m-by-n real matrix stored either densely (row-major) or as CSR.
#[derive(Debug, Clone, PartialEq)]
pub enum RowMatrix {
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    },
    Csr {
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

impl RowMatrix {
    /// Builds a dense matrix from row slices. Panics if rows are ragged.
    pub fn dense(rows: Vec<Vec<f64>>) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * n);
        for row in &rows {
            assert_eq!(row.len(), n, "ragged row in dense matrix");
            data.extend_from_slice(row);
        }
        RowMatrix::Dense {
            rows: m,
            cols: n,
            data,
        }
    }

    /// Builds a CSR matrix from per-row `(column, value)` pairs.
    /// Columns within a row must be strictly increasing.
    pub fn csr(cols: usize, row_entries: Vec<Vec<(usize, f64)>>) -> Self {
        let m = row_entries.len();
        let mut indptr = Vec::with_capacity(m + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &row_entries {
            let mut prev = None;
            for &(j, v) in row {
                assert!(j < cols, "column index {j} out of bounds");
                assert!(prev.is_none_or(|p| j > p), "columns not increasing");
                prev = Some(j);
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        RowMatrix::Csr {
            rows: m,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            RowMatrix::Dense { rows, .. } | RowMatrix::Csr { rows, .. } => *rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            RowMatrix::Dense { cols, .. } | RowMatrix::Csr { cols, .. } => *cols,
        }
    }

    /// `out = A x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols());
        debug_assert_eq!(out.len(), self.rows());
        match self {
            RowMatrix::Dense { rows, cols, data } => {
                for i in 0..*rows {
                    let row = &data[i * cols..(i + 1) * cols];
                    out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            RowMatrix::Csr {
                rows,
                indptr,
                indices,
                values,
                ..
            } => {
                for i in 0..*rows {
                    let mut acc = 0.0;
                    for k in indptr[i]..indptr[i + 1] {
                        acc += values[k] * x[indices[k]];
                    }
                    out[i] = acc;
                }
            }
        }
    }

    /// `out = A^T y`.
    pub fn matvec_t(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows());
        debug_assert_eq!(out.len(), self.cols());
        out.fill(0.0);
        match self {
            RowMatrix::Dense { rows, cols, data } => {
                for i in 0..*rows {
                    let yi = y[i];
                    if yi == 0.0 {
                        continue;
                    }
                    let row = &data[i * cols..(i + 1) * cols];
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += a * yi;
                    }
                }
            }
            RowMatrix::Csr {
                rows,
                indptr,
                indices,
                values,
                ..
            } => {
                for i in 0..*rows {
                    let yi = y[i];
                    if yi == 0.0 {
                        continue;
                    }
                    for k in indptr[i]..indptr[i + 1] {
                        out[indices[k]] += values[k] * yi;
                    }
                }
            }
        }
    }

    /// Largest entry in absolute value (0 for an all-zero matrix).
    pub fn max_abs(&self) -> f64 {
        match self {
            RowMatrix::Dense { data, .. } => data.iter().fold(0.0, |m, v| m.max(v.abs())),
            RowMatrix::Csr { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            RowMatrix::Dense { data, .. } => data.iter().all(|v| v.is_finite()),
            RowMatrix::Csr { values, .. } => values.iter().all(|v| v.is_finite()),
        }
    }

    /// Multiplies every entry of row `i` by `s` (label folding).
    pub fn scale_row(&mut self, i: usize, s: f64) {
        match self {
            RowMatrix::Dense { cols, data, .. } => {
                for v in &mut data[i * *cols..(i + 1) * *cols] {
                    *v *= s;
                }
            }
            RowMatrix::Csr { indptr, values, .. } => {
                for v in &mut values[indptr[i]..indptr[i + 1]] {
                    *v *= s;
                }
            }
        }
    }

    /// Multiplies every entry of column `j` by `s` (feature scaling).
    pub fn scale_col(&mut self, j: usize, s: f64) {
        match self {
            RowMatrix::Dense { rows, cols, data } => {
                for i in 0..*rows {
                    data[i * *cols + j] *= s;
                }
            }
            RowMatrix::Csr {
                indices, values, ..
            } => {
                for (k, &col) in indices.iter().enumerate() {
                    if col == j {
                        values[k] *= s;
                    }
                }
            }
        }
    }

    /// Nonzero entries of row `i` as `(column, value)` pairs.
    pub fn row_nonzeros(&self, i: usize) -> Vec<(usize, f64)> {
        match self {
            RowMatrix::Dense { cols, data, .. } => data[i * cols..(i + 1) * cols]
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j, *v))
                .collect(),
            RowMatrix::Csr {
                indptr,
                indices,
                values,
                ..
            } => (indptr[i]..indptr[i + 1])
                .map(|k| (indices[k], values[k]))
                .collect(),
        }
    }

    /// New matrix keeping only the rows where `keep` is true.
    pub fn filter_rows(&self, keep: &[bool]) -> RowMatrix {
        debug_assert_eq!(keep.len(), self.rows());
        match self {
            RowMatrix::Dense { rows, cols, data } => {
                let mut out = Vec::new();
                for i in 0..*rows {
                    if keep[i] {
                        out.extend_from_slice(&data[i * cols..(i + 1) * cols]);
                    }
                }
                RowMatrix::Dense {
                    rows: keep.iter().filter(|k| **k).count(),
                    cols: *cols,
                    data: out,
                }
            }
            RowMatrix::Csr {
                rows,
                cols,
                indptr,
                indices,
                values,
            } => {
                let mut new_ptr = vec![0];
                let mut new_idx = Vec::new();
                let mut new_val = Vec::new();
                for i in 0..*rows {
                    if keep[i] {
                        new_idx.extend_from_slice(&indices[indptr[i]..indptr[i + 1]]);
                        new_val.extend_from_slice(&values[indptr[i]..indptr[i + 1]]);
                        new_ptr.push(new_idx.len());
                    }
                }
                RowMatrix::Csr {
                    rows: new_ptr.len() - 1,
                    cols: *cols,
                    indptr: new_ptr,
                    indices: new_idx,
                    values: new_val,
                }
            }
        }
    }

    /// Single-entry access; used by tests and small dense oracles.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            RowMatrix::Dense { cols, data, .. } => data[i * cols + j],
            RowMatrix::Csr {
                indptr,
                indices,
                values,
                ..
            } => (indptr[i]..indptr[i + 1])
                .find(|&k| indices[k] == j)
                .map_or(0.0, |k| values[k]),
        }
    }
}
