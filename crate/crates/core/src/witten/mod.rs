//! Resolvent-calculus identities on finite matrices and the lattice
//! evaluation of the regularized trace.
//!
//! The regularization at the center of everything is
//!
//! ```text
//! B_M(z) = z · tr_m((M*M+z)⁻¹ − (MM*+z)⁻¹)
//! ```
//!
//! with tr_m the internal (block-diagonal) trace. The finite-matrix checks
//! in this module validate the commutator reformulation of B_M, the
//! restricted cyclicity of tr_m, the exact-remainder Neumann expansion of
//! resolvent differences, and the diagonal counterexample showing that a
//! trace-norm-bounded family with vanishing operator norm can keep trace 1.

mod lattice;

pub use lattice::{
    even_dimension_internal_trace_defect, LatticeLevel, LatticeOperator, WittenTraceResult,
};

use num_complex::Complex64;

use crate::linalg::{self, ComplexMatrix};
use crate::{Error, Result};

/// Internal trace tr_m of a block operator matrix: A ∈ ℂ^{(m·s)×(m·s)} viewed
/// as m×m blocks of size s×s (block-major layout), summed over the diagonal
/// blocks.
pub fn internal_trace(m: usize, a: &ComplexMatrix) -> ComplexMatrix {
    let total = a.nrows();
    assert_eq!(total % m, 0, "matrix size must split into m blocks");
    let s = total / m;
    let mut out = linalg::zeros(s, s);
    for j in 0..m {
        for r in 0..s {
            for c in 0..s {
                out[(r, c)] += a[(j * s + r, j * s + c)];
            }
        }
    }
    out
}

/// Embeds a scalar-entry matrix B ∈ ℂ^{m×m} as B ⊗ I_s.
pub fn scalar_block_matrix(b: &ComplexMatrix, s: usize) -> ComplexMatrix {
    b.kronecker(&linalg::identity(s))
}

fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.clone().lu().try_inverse().ok_or_else(|| Error::SolverFailure(
        "matrix inverse failed (singular shift?)".into(),
    ))
}

/// B_M(z) for a finite block matrix.
pub fn witten_regularization(m: usize, mat: &ComplexMatrix, z: Complex64) -> Result<ComplexMatrix> {
    let total = mat.nrows();
    let id = linalg::identity(total);
    let r1 = inverse(&(mat.adjoint() * mat + &id * z))?;
    let r2 = inverse(&(mat * mat.adjoint() + &id * z))?;
    Ok(internal_trace(m, &(r1 - r2)) * z)
}

/// Residual of the commutator identity
/// 2B_M(z) = tr_m([M, M*(MM*+z)⁻¹]) − tr_m([M*, M(M*M+z)⁻¹]).
///
/// Flags ill-conditioned shifts instead of returning noise.
pub fn check_witten_identity(m: usize, mat: &ComplexMatrix, z: Complex64) -> Result<f64> {
    let total = mat.nrows();
    let id = linalg::identity(total);
    let a1 = mat.adjoint() * mat + &id * z;
    let a2 = mat * mat.adjoint() + &id * z;
    for a in [&a1, &a2] {
        let sv = a.clone().singular_values();
        let min = sv.iter().fold(f64::INFINITY, |acc, s| acc.min(*s));
        let max = sv.iter().fold(0.0f64, |acc, s| acc.max(*s));
        if min < 1e-13 * max {
            return Err(Error::SolverFailure(format!(
                "shift z={z} leaves the normal operator ill-conditioned (cond ~ {:.1e})",
                max / min
            )));
        }
    }
    let lhs = witten_regularization(m, mat, z)? * 2.0.into();
    let r2 = inverse(&a2)?;
    let r1 = inverse(&a1)?;
    let com1 = mat * mat.adjoint() * &r2 - mat.adjoint() * &r2 * mat;
    let com2 = mat.adjoint() * mat * &r1 - mat * &r1 * mat.adjoint();
    let rhs = internal_trace(m, &com1) - internal_trace(m, &com2);
    Ok(linalg::max_diff(&lhs, &rhs))
}

/// Residual of tr_m(AB) = tr_m(BA) for scalar-entry B (restricted cyclicity).
pub fn internal_trace_cyclicity_residual(
    m: usize,
    a: &ComplexMatrix,
    b_scalar: &ComplexMatrix,
) -> f64 {
    let s = a.nrows() / m;
    let b = scalar_block_matrix(b_scalar, s);
    linalg::max_diff(&internal_trace(m, &(a * &b)), &internal_trace(m, &(&b * a)))
}

/// Residual of tr_m(AB) − tr_m(BA) for a generic (non-scalar) B; generically
/// far from zero, documenting that the internal trace is not cyclic.
pub fn internal_trace_noncyclicity_witness(m: usize, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    linalg::max_diff(&internal_trace(m, &(a * b)), &internal_trace(m, &(b * a)))
}

/// Outcome of the exact-remainder Neumann expansion check.
#[derive(Debug, Clone)]
pub struct NeumannCheck {
    pub residual: f64,
    /// ‖C R‖; the convergent Neumann series requires this below 1, the exact
    /// remainder form does not
    pub contraction_norm: f64,
    pub contractive: bool,
}

/// Verifies, on explicit matrices built from a skew-Hermitian derivative `q`
/// and a Hermitian unitary multiplication `phi`,
///
/// ```text
/// (L*L+z)⁻¹ − (LL*+z)⁻¹ = 2 Σ_{k=0}^{N} R (CR)^{2k+1}
///                         + [(L*L+z)⁻¹ − (LL*+z)⁻¹] (CR)^{2N+2}
/// ```
///
/// with L = q + phi, C = [q, phi], R = (−q² + 1 + z)⁻¹. The identity is
/// algebraic, so the residual is machine precision regardless of whether
/// ‖CR‖ < 1.
pub fn check_neumann_expansion(
    q: &ComplexMatrix,
    phi: &ComplexMatrix,
    z: Complex64,
    n_terms: usize,
) -> Result<NeumannCheck> {
    let dim = q.nrows();
    let id = linalg::identity(dim);
    // hypotheses: q skew-Hermitian, phi Hermitian with phi² = 1
    let skew = linalg::max_diff(&q.adjoint(), &(-q));
    if skew > 1e-10 {
        return Err(Error::Domain(format!("derivative matrix not skew-Hermitian ({skew:.1e})")));
    }
    let uni = linalg::max_diff(&(phi * phi), &id);
    if uni > 1e-10 {
        return Err(Error::Domain(format!("potential matrix not unitary ({uni:.1e})")));
    }
    let l = q + phi;
    let c = q * phi - phi * q;
    let r = inverse(&(-(q * q) + &id * (z + Complex64::new(1.0, 0.0))))?;
    let lhs = inverse(&(l.adjoint() * &l + &id * z))? - inverse(&(&l * l.adjoint() + &id * z))?;
    let cr = &c * &r;
    let mut sum = linalg::zeros(dim, dim);
    let mut cr_pow = cr.clone(); // (CR)^{2k+1} starting at k = 0
    let cr2 = &cr * &cr;
    for _ in 0..=n_terms {
        sum += &r * &cr_pow;
        cr_pow = &cr_pow * &cr2;
    }
    // remainder multiplies (CR)^{2N+2} = cr_pow / cr
    let mut rem_pow = cr2.clone();
    for _ in 0..n_terms {
        rem_pow = &rem_pow * &cr2;
    }
    let rhs = sum * Complex64::new(2.0, 0.0) + &lhs * rem_pow;
    let sv = cr.clone().singular_values();
    let norm = sv.iter().fold(0.0f64, |acc, s| acc.max(*s));
    Ok(NeumannCheck {
        residual: linalg::max_diff(&lhs, &rhs),
        contraction_norm: norm,
        contractive: norm < 1.0,
    })
}

/// Dense 1D periodic spectral lattice: returns (derivative matrix D, grid).
/// D is skew-Hermitian and D² is the spectral Laplacian.
pub fn spectral_derivative_1d(points: usize, half_width: f64) -> (ComplexMatrix, Vec<f64>) {
    let n = points;
    let h = 2.0 * half_width / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| -half_width + i as f64 * h).collect();
    // D = F⁻¹ diag(ik) F via explicit DFT sums
    let mut d = linalg::zeros(n, n);
    for row in 0..n {
        for col in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for f in 0..n {
                let m = if f < n / 2 {
                    f as f64
                } else if f == n / 2 {
                    0.0 // Nyquist zeroed for exact skew-symmetry
                } else {
                    f as f64 - n as f64
                };
                let k = std::f64::consts::PI * m / half_width;
                let phase = 2.0 * std::f64::consts::PI * f as f64 * (row as f64 - col as f64)
                    / n as f64;
                acc += Complex64::new(0.0, k) * Complex64::new(phase.cos(), phase.sin());
            }
            d[(row, col)] = acc / n as f64;
        }
    }
    (d, grid)
}

/// Residual of the resolvent–multiplication commutator identity
/// [R, Ψ] = R (Q²Ψ) R + 2 R (QΨ) Q R on the 1D spectral lattice, where
/// (QΨ), (Q²Ψ) are the multiplication operators by the spectrally
/// differentiated samples of ψ. Exact up to aliasing of ψ.
pub fn check_commutator_identity_spectral(
    points: usize,
    half_width: f64,
    mu: Complex64,
    psi: impl Fn(f64) -> f64,
) -> Result<f64> {
    let (dmat, grid) = spectral_derivative_1d(points, half_width);
    let n = points;
    let id = linalg::identity(n);
    let psi_vec: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(psi(x), 0.0)).collect();
    let psi_mat = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(psi_vec.clone()));
    // (QΨ) and (Q²Ψ): spectral derivatives of the sample vector, as diagonals
    let dv = nalgebra::DVector::from_vec(psi_vec);
    let dpsi = &dmat * &dv;
    let d2psi = &dmat * &dpsi;
    let dpsi_mat = ComplexMatrix::from_diagonal(&dpsi);
    let d2psi_mat = ComplexMatrix::from_diagonal(&d2psi);
    let r = inverse(&(-(&dmat * &dmat) + &id * mu))?;
    let lhs = &r * &psi_mat - &psi_mat * &r;
    let rhs = &r * &d2psi_mat * &r + (&r * &dpsi_mat * &dmat * &r) * Complex64::new(2.0, 0.0);
    Ok(linalg::max_diff(&lhs, &rhs))
}

/// The diagonal family B(z)φ_k = z e^{−(k−1)z} φ_k truncated to `n_modes`:
/// returns (Σ diagonal, operator norm) = (z(1−e^{−Nz})/(1−e^{−z}), |z|).
/// The trace tends to 1 while the norm tends to 0 as z → 0 in the sector.
pub fn vogt_counterexample(z: Complex64, n_modes: u64) -> (Complex64, f64) {
    let trace = if z.norm() < 1e-14 {
        Complex64::new(0.0, 0.0)
    } else {
        z * (Complex64::new(1.0, 0.0) - (-z * n_modes as f64).exp())
            / (Complex64::new(1.0, 0.0) - (-z).exp())
    };
    (trace, z.norm())
}
