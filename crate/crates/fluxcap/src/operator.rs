//! Sparse Hermitian operators in compressed-row form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Hermiticity acceptance: the defect between an entry and its mirrored
/// conjugate may not exceed this fraction of the largest entry.
const HERMITICITY_REL_TOL: f64 = 1e-14;

/// A Hermitian matrix stored as CSR with sorted, duplicate-free columns per
/// row. Construction verifies Hermiticity, so `matvec` may assume it.
#[derive(Debug, Clone)]
pub struct SparseHermitianOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseHermitianOperator {
    /// Builds from (row, col, value) triplets. Duplicates are summed, exact
    /// zeros dropped, and the result checked against its conjugate
    /// transpose.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::model(format!(
                    "triplet ({r}, {c}) outside a dimension-{dim} operator"
                )));
            }
            entries.push((r, c, v));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            i += 1;
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                v += entries[i].2;
                i += 1;
            }
            if v != Complex64::ZERO {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let op = SparseHermitianOperator {
            dim,
            row_ptr,
            col_idx,
            values,
        };
        op.check_hermitian()?;
        Ok(op)
    }

    fn check_hermitian(&self) -> Result<()> {
        let scale = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let tol = HERMITICITY_REL_TOL * scale;
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let v = self.values[k];
                let mirror = self.get(c, r).unwrap_or(Complex64::ZERO);
                let defect = (v - mirror.conj()).norm();
                if defect > tol {
                    return Err(Error::model(format!(
                        "operator is not Hermitian: entry ({r}, {c}) deviates from its \
                         mirror by {defect:.3e} (tolerance {tol:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Stored entry at (r, c), if any.
    pub fn get(&self, r: usize, c: usize) -> Option<Complex64> {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi]
            .binary_search(&c)
            .ok()
            .map(|k| self.values[lo + k])
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Largest number of stored entries in any row.
    pub fn max_row_nnz(&self) -> usize {
        (0..self.dim)
            .map(|r| self.row_ptr[r + 1] - self.row_ptr[r])
            .max()
            .unwrap_or(0)
    }

    /// True when every stored entry is exactly real, which unlocks the real
    /// symmetric solver path.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Infinity norm (max absolute row sum); the scale for residual targets.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// y = A x.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    /// y = A x for a real operator acting on real data. Panics if any entry
    /// has an imaginary part; gate on [`Self::is_real`].
    pub fn matvec_real(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.values[k];
                debug_assert_eq!(v.im, 0.0);
                acc += v.re * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    /// <x|A|y>.
    pub fn matrix_element(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let mut ay = vec![Complex64::ZERO; self.dim];
        self.matvec(y, &mut ay);
        x.iter()
            .zip(ay.iter())
            .map(|(xi, ai)| xi.conj() * ai)
            .sum()
    }

    /// Dense copy for small-dimension solves and tests.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::ZERO);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] = self.values[k];
            }
        }
        m
    }

    /// Iterates stored (row, col, value) entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn builds_sums_duplicates_and_multiplies() {
        let op = SparseHermitianOperator::from_triplets(
            3,
            vec![
                (0, 0, c(2.0, 0.0)),
                (1, 1, c(-1.0, 0.0)),
                (0, 1, c(0.25, 0.5)),
                (1, 0, c(0.25, -0.5)),
                (0, 1, c(0.25, 0.0)),
                (1, 0, c(0.25, 0.0)),
                (2, 2, c(4.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(op.nnz(), 5);
        assert_eq!(op.get(0, 1), Some(c(0.5, 0.5)));
        let x = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)];
        let mut y = vec![Complex64::ZERO; 3];
        op.matvec(&x, &mut y);
        // Row 0: 2*1 + (0.5+0.5i)*i = -0.5 + 0.5i + 2 = 1.5 + 0.5i.
        assert_relative_eq!(y[0].re, 1.5, max_relative = 1e-15);
        assert_relative_eq!(y[0].im, 0.5, max_relative = 1e-15);
        assert_relative_eq!(y[2].re, 8.0, max_relative = 1e-15);
        // matrix_element agrees with the dense quadratic form.
        let me = op.matrix_element(&x, &x);
        let dense = op.to_dense();
        let xv = nalgebra::DVector::from_vec(x.clone());
        let want = (xv.adjoint() * dense * xv)[(0, 0)];
        assert_relative_eq!(me.re, want.re, max_relative = 1e-13);
        assert_relative_eq!(me.im, want.im, epsilon = 1e-13);
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let r = SparseHermitianOperator::from_triplets(
            2,
            vec![(0, 1, c(1.0, 0.0)), (1, 0, c(0.5, 0.0))],
        );
        assert!(r.is_err());
        // Missing mirror entry entirely.
        let r = SparseHermitianOperator::from_triplets(2, vec![(0, 1, c(1.0, 0.0))]);
        assert!(r.is_err());
        // Imaginary diagonal.
        let r = SparseHermitianOperator::from_triplets(2, vec![(0, 0, c(1.0, 1.0))]);
        assert!(r.is_err());
    }

    #[test]
    fn exact_cancellation_drops_entries() {
        let op = SparseHermitianOperator::from_triplets(
            2,
            vec![
                (0, 1, c(1.0, 0.0)),
                (1, 0, c(1.0, 0.0)),
                (0, 1, c(-1.0, 0.0)),
                (1, 0, c(-1.0, 0.0)),
                (0, 0, c(3.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(op.nnz(), 1);
    }

    #[test]
    fn real_detection_and_real_matvec() {
        let op = SparseHermitianOperator::from_triplets(
            2,
            vec![
                (0, 0, c(1.0, 0.0)),
                (0, 1, c(-2.0, 0.0)),
                (1, 0, c(-2.0, 0.0)),
                (1, 1, c(5.0, 0.0)),
            ],
        )
        .unwrap();
        assert!(op.is_real());
        let mut y = vec![0.0; 2];
        op.matvec_real(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![-1.0, 3.0]);
        assert_relative_eq!(op.norm_inf(), 7.0, max_relative = 1e-15);
        let op_c = SparseHermitianOperator::from_triplets(
            2,
            vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))],
        )
        .unwrap();
        assert!(!op_c.is_real());
    }
}
