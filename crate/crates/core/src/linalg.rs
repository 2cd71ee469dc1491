//! Dense complex matrix plumbing shared by all modules.
//!
//! Matrices in this crate are small (the Dirac algebra never exceeds 16×16
//! for n ≤ 9, potentials stay below ~50×50), so everything is dense
//! `nalgebra::DMatrix<Complex64>`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex matrix in row-major semantics at the API boundary.
pub type ComplexMatrix = DMatrix<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Builds a matrix from row-major complex entries.
pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> ComplexMatrix {
    assert_eq!(rows * cols, entries.len(), "entry count must equal rows*cols");
    DMatrix::from_row_slice(rows, cols, entries)
}

/// Builds a matrix from row-major real entries.
pub fn from_rows_re(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    let v: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    from_rows(rows, cols, &v)
}

pub fn identity(n: usize) -> ComplexMatrix {
    DMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::zeros(rows, cols)
}

/// Max-norm ‖A‖_max = max_{ij} |a_ij|.
pub fn max_norm(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Max-norm of A − B.
pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Hermiticity defect ‖A − A*‖_max.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    max_diff(a, &a.adjoint())
}

/// Unitarity defect ‖A*A − I‖_max.
pub fn unitarity_defect(a: &ComplexMatrix) -> f64 {
    let n = a.ncols();
    max_diff(&(a.adjoint() * a), &identity(n))
}

/// Checks that `a` is square, returning its side length.
pub fn require_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "expected square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// Checks Hermiticity relative to the matrix scale; tolerance is relative.
pub fn require_hermitian(a: &ComplexMatrix, rel_tol: f64) -> Result<()> {
    let defect = hermiticity_defect(a);
    let tol = rel_tol * (1.0 + max_norm(a));
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    Ok(())
}

/// Matrix trace.
pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Pairwise (cascade) summation over a slice in fixed order.
///
/// The reduction tree depends only on the length, so results are
/// bit-reproducible regardless of how the values were produced.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => C_ZERO,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Pairwise summation for real values.
pub fn pairwise_sum_re(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum_re(&values[..mid]) + pairwise_sum_re(&values[mid..])
        }
    }
}
