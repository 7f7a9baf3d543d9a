//! Compressed sparse row matrix and the sparse·dense product used by the
//! encoder's neighborhood aggregation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::matrix::DenseMatrix;

/// CSR matrix of `f64`. Column indices within each row are strictly
/// increasing; construction validates this.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != rows + 1 || *row_ptr.last().unwrap_or(&0) != col_idx.len() {
            return Err(Error::invalid("csr row pointer array is inconsistent"));
        }
        if col_idx.len() != values.len() {
            return Err(Error::invalid("csr index/value length mismatch"));
        }
        for r in 0..rows {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(Error::invalid("csr row pointers must be nondecreasing"));
            }
            let cols_r = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            for w in cols_r.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::invalid(
                        "csr column indices must be strictly increasing within a row",
                    ));
                }
            }
            if let Some(&last) = cols_r.last() {
                if last >= cols {
                    return Err(Error::IndexOutOfRange(format!(
                        "csr column {last} exceeds width {cols}"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// `(column indices, values)` of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d.set(r, c, v);
            }
        }
        d
    }

    /// `C = self · dense`. Output rows are independent, so the row loop can
    /// run on any number of threads without changing a single bit.
    pub fn matmul_dense(&self, dense: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != dense.rows() {
            return Err(Error::invalid(format!(
                "spmm shape mismatch: {}x{} times {}x{}",
                self.rows,
                self.cols,
                dense.rows(),
                dense.cols()
            )));
        }
        let width = dense.cols();
        let mut out = DenseMatrix::zeros(self.rows, width);
        out.data_mut()
            .par_chunks_mut(width)
            .enumerate()
            .for_each(|(r, orow)| {
                let (cols, vals) = self.row(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    let drow = &dense.row(c)[..width];
                    for (o, &d) in orow.iter_mut().zip(drow) {
                        *o += v * d;
                    }
                }
            });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::Rng;

    #[test]
    fn spmm_matches_dense_product() {
        let mut rng = Rng::seed_from(11);
        for trial in 0..10 {
            let n = 4 + trial * 6; // up to 58 <= 64 nodes
            let mut row_ptr = vec![0usize];
            let mut col_idx = Vec::new();
            let mut values = Vec::new();
            for _ in 0..n {
                for c in 0..n {
                    if rng.bernoulli(0.2) {
                        col_idx.push(c);
                        values.push(rng.normal());
                    }
                }
                row_ptr.push(col_idx.len());
            }
            let sp = CsrMatrix::new(n, n, row_ptr, col_idx, values).unwrap();
            let x = DenseMatrix::from_fn(n, 5, |_, _| rng.normal());
            let fast = sp.matmul_dense(&x).unwrap();
            let exact = sp.to_dense().matmul(&x).unwrap();
            for (a, b) in fast.data().iter().zip(exact.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn construction_validates_structure() {
        // Row pointer wrong length.
        assert!(CsrMatrix::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        // Column out of range.
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![5], vec![1.0]).is_err());
        // Unsorted columns within a row.
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![2, 0], vec![1.0, 1.0]).is_err());
        // Valid empty matrix.
        let empty = CsrMatrix::new(3, 3, vec![0, 0, 0, 0], vec![], vec![]).unwrap();
        assert_eq!(empty.nnz(), 0);
        assert_eq!(empty.to_dense(), DenseMatrix::zeros(3, 3));
    }
}
