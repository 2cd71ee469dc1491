//! Numerical toolkit for the index theory of Callias-type Dirac operators
//! `L = Q + Φ` on ℝⁿ (n odd).
//!
//! The crate is organized around the surface-integral index formula
//!
//! ```text
//! ind(L) = (i/8π)^((n-1)/2) / ((n-1)/2)! · lim_Λ (1/2Λ) Σ ε_{i1…in}
//!          ∮_{ΛS^{n-1}} tr(U ∂_{i1}U … ∂_{i_{n-1}}U)(x) x_{in} dσ(x)
//! ```
//!
//! with `U = sgn(Φ)`, together with the machinery needed to evaluate and
//! cross-check it numerically:
//!
//! * [`clifford`] — the Euclidean Dirac algebra γ_{j,n} and its trace identities,
//! * [`matrixfn`] — Hermitian functional calculus (|A|, sgn(A), derivatives),
//! * [`potential`] — potentials Φ: ℝⁿ → ℂ^{d×d}, admissibility analysis and
//!   the named example potentials (hedgehog, block embeddings, the
//!   divergent-trace counterexample),
//! * [`index`] — sphere quadrature and the index formula itself,
//! * [`helmholtz`] — odd-dimensional Helmholtz Green's functions and the
//!   kernel inequalities they satisfy,
//! * [`witten`] — resolvent-calculus identities on finite matrices and a
//!   periodic-lattice evaluation of the regularized trace
//!   `z tr(χ_Λ tr_m((L*L+z)⁻¹ − (LL*+z)⁻¹))`.

pub mod clifford;
pub mod helmholtz;
pub mod index;
pub mod linalg;
pub mod matrixfn;
pub mod potential;
pub mod witten;

pub use linalg::ComplexMatrix;
pub use num_complex::Complex64;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is not Hermitian: max |A - A*| = {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("not invertible at required gap: min |eigenvalue| = {min_abs_eig:.3e} < {required:.3e}")]
    GapViolation { min_abs_eig: f64, required: f64 },
    #[error("numerical error: {context} (residual estimate {residual:.3e})")]
    Numerical { context: String, residual: f64 },
    #[error("solver did not converge: {0}")]
    SolverFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
