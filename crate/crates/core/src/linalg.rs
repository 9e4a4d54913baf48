//! Small dense linear-algebra helpers over `nalgebra`.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

pub use nalgebra::DMatrix as Matrix;

/// `m * v`
pub fn matvec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let out = m * DVector::from_column_slice(v);
    out.as_slice().to_vec()
}

/// Solves `m x = b` by LU with partial pivoting. Returns `None` when the
/// factorization is singular or the solution is not finite.
pub fn solve(m: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let x = m.clone().lu().solve(&DVector::from_column_slice(b))?;
    let x = x.as_slice().to_vec();
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Eigen-decomposition of a symmetric matrix (symmetrized first).
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl core::fmt::Debug for SymEigen {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SymEigen")
            .field("values", &self.values)
            .finish()
    }
}

pub fn sym_eigen(m: &DMatrix<f64>) -> SymEigen {
    let sym = (m + m.transpose()) * 0.5;
    let e = sym.symmetric_eigen();
    SymEigen {
        values: e.eigenvalues.as_slice().to_vec(),
        vectors: e.eigenvectors,
    }
}

pub fn identity(d: usize) -> DMatrix<f64> {
    DMatrix::identity(d, d)
}

pub fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

/// `xxᵀ`
pub fn outer(x: &[f64], y: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), y.len(), |i, j| x[i] * y[j])
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m)
        .values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m)
        .values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
