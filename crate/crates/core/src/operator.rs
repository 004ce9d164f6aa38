//! Sparse Hermitian operators on a fixed-N Fock space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type StateVector = DVector<Complex64>;
pub type DenseMatrix = DMatrix<Complex64>;

/// Coordinate-list accumulator. Duplicates are summed by [`finish`].
///
/// [`finish`]: OperatorBuilder::finish
#[derive(Debug, Clone)]
pub struct OperatorBuilder {
    dim: usize,
    triplets: Vec<(usize, usize, Complex64)>,
}

impl OperatorBuilder {
    pub fn new(dim: usize) -> Self {
        OperatorBuilder {
            dim,
            triplets: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds a real diagonal contribution.
    pub fn add_diagonal(&mut self, i: usize, value: f64) {
        self.triplets.push((i, i, Complex64::new(value, 0.0)));
    }

    /// Adds `value` at `(row, col)` together with its Hermitian partner.
    pub fn add_hermitian(&mut self, row: usize, col: usize, value: Complex64) {
        if row == col {
            self.triplets.push((row, row, Complex64::new(2.0 * value.re, 0.0)));
        } else {
            self.triplets.push((row, col, value));
            self.triplets.push((col, row, value.conj()));
        }
    }

    pub fn finish(mut self) -> HermitianOperator {
        self.triplets
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(self.triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        HermitianOperator {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Hermitian matrix stored in compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl HermitianOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates stored entries as `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.cols[p], self.vals[p]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let span = &self.cols[self.row_ptr[row]..self.row_ptr[row + 1]];
        match span.binary_search(&col) {
            Ok(p) => self.vals[self.row_ptr[row] + p],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `out = H x`.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.dim) {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, x: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.dim);
        self.apply_into(x.as_slice(), out.as_mut_slice());
        out
    }

    /// `⟨x|H|x⟩`, real for Hermitian `H`.
    pub fn expectation(&self, x: &StateVector) -> f64 {
        x.dotc(&self.apply(x)).re
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] += v;
        }
        m
    }

    /// `max |H - H†|` relative to `max |H|` (0 for the zero operator).
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn check_dim(&self, state: &StateVector) -> Result<()> {
        if state.len() != self.dim {
            return Err(Error::Domain(format!(
                "state of length {} does not match operator dimension {}",
                state.len(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// Euclidean norm error `| ‖ψ‖ − 1 |`.
pub fn norm_error(state: &StateVector) -> f64 {
    (state.norm() - 1.0).abs()
}

pub(crate) fn require_normalized(state: &StateVector, tol: f64) -> Result<()> {
    let err = norm_error(state);
    if err > tol {
        return Err(Error::Contract(format!(
            "state norm deviates from 1 by {err:.3e} (tolerance {tol:.1e})"
        )));
    }
    Ok(())
}
