//! The Euclidean Dirac algebra γ_{1,n} … γ_{n,n}.
//!
//! The matrices are built by the recursive Kronecker-product scheme starting
//! from the Pauli matrices: γ_{1,2} = σ₁, γ_{2,2} = σ₂, then
//!
//! ```text
//! γ_{k,2n̂+1}    = γ_{k,2n̂}                         k ≤ 2n̂
//! γ_{2n̂+1,2n̂+1} = (−i)^n̂ γ_{1,2n̂} ⋯ γ_{2n̂,2n̂}
//! γ_{k,2n̂+2}    = σ₁ ∘ γ_{k,2n̂}                    k ≤ 2n̂
//! γ_{2n̂+1,2n̂+2} = i^n̂ σ₁ ∘ (γ_{1,2n̂} ⋯ γ_{2n̂,2n̂})
//! γ_{2n̂+2,2n̂+2} = σ₂ ∘ I_{2^n̂}
//! ```
//!
//! All γ are Hermitian, unitary, and satisfy γ_j γ_k + γ_k γ_j = 2δ_{jk} I.
//! The trace of a full product over an odd number n of indices is
//! (2i)^n̂ ε_{i₁⋯i_n}; shorter odd products are traceless.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::linalg::{self, ComplexMatrix, C_I, C_ONE, C_ZERO};
use crate::{Error, Result};

/// σ₁ = [[0,1],[1,0]]
pub fn sigma1() -> ComplexMatrix {
    linalg::from_rows(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO])
}

/// σ₂ = [[0,−i],[i,0]]
pub fn sigma2() -> ComplexMatrix {
    linalg::from_rows(2, 2, &[C_ZERO, -C_I, C_I, C_ZERO])
}

/// σ₃ = [[1,0],[0,−1]]
pub fn sigma3() -> ComplexMatrix {
    linalg::from_rows(2, 2, &[C_ONE, C_ZERO, C_ZERO, -C_ONE])
}

/// Kronecker product A ∘ B of two square matrices.
pub fn kronecker(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    linalg::require_square(a)?;
    linalg::require_square(b)?;
    Ok(a.kronecker(b))
}

/// The Euclidean Dirac algebra in dimension `n`.
#[derive(Debug, Clone)]
pub struct CliffordAlgebra {
    n: usize,
    nhat: usize,
    gammas: Vec<ComplexMatrix>,
}

impl CliffordAlgebra {
    /// Spatial dimension n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// n̂ with n = 2n̂ or n = 2n̂+1; the matrices are 2^n̂ × 2^n̂.
    pub fn nhat(&self) -> usize {
        self.nhat
    }

    /// Matrix side length 2^n̂.
    pub fn dim(&self) -> usize {
        1 << self.nhat
    }

    /// γ_{j,n} for 1-based index j.
    pub fn gamma(&self, j: usize) -> &ComplexMatrix {
        assert!(j >= 1 && j <= self.n, "gamma index out of range");
        &self.gammas[j - 1]
    }

    /// All γ matrices in order.
    pub fn gammas(&self) -> &[ComplexMatrix] {
        &self.gammas
    }

    /// Verifies Hermiticity, unitarity, and anticommutation entrywise to `tol`.
    pub fn verify(&self, tol: f64) -> Result<()> {
        let id = linalg::identity(self.dim());
        for (j, g) in self.gammas.iter().enumerate() {
            let herm = linalg::hermiticity_defect(g);
            if herm > tol {
                return Err(Error::NotHermitian { defect: herm, tol });
            }
            let uni = linalg::unitarity_defect(g);
            if uni > tol {
                return Err(Error::Numerical {
                    context: format!("gamma_{} not unitary", j + 1),
                    residual: uni,
                });
            }
        }
        for j in 0..self.n {
            for k in 0..self.n {
                let anti = &self.gammas[j] * &self.gammas[k] + &self.gammas[k] * &self.gammas[j];
                let target = if j == k {
                    id.scale(2.0)
                } else {
                    linalg::zeros(self.dim(), self.dim())
                };
                let defect = linalg::max_diff(&anti, &target);
                if defect > tol {
                    return Err(Error::Numerical {
                        context: format!("anticommutation failure at ({}, {})", j + 1, k + 1),
                        residual: defect,
                    });
                }
            }
        }
        Ok(())
    }
}

fn product_of(gammas: &[ComplexMatrix]) -> ComplexMatrix {
    let mut p = gammas[0].clone();
    for g in &gammas[1..] {
        p = p * g;
    }
    p
}

/// i^k
fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => C_ONE,
        1 => C_I,
        2 => -C_ONE,
        _ => -C_I,
    }
}

/// (−i)^k
fn neg_i_pow(k: usize) -> Complex64 {
    i_pow(k % 4).conj()
}

fn build_uncached(n: usize) -> Result<CliffordAlgebra> {
    if n < 2 {
        return Err(Error::Domain(format!("Dirac algebra needs n >= 2, got {n}")));
    }
    // build even dimensions 2, 4, ... up to n (n even) or n-1 (n odd)
    let mut gammas = vec![sigma1(), sigma2()];
    let even_target = if n % 2 == 0 { n } else { n - 1 };
    while gammas.len() < even_target {
        let nhat = gammas.len() / 2;
        let prod = product_of(&gammas);
        let s1 = sigma1();
        let s2 = sigma2();
        let id = linalg::identity(1 << nhat);
        let mut next = Vec::with_capacity(gammas.len() + 2);
        for g in &gammas {
            next.push(kronecker(&s1, g)?);
        }
        next.push(kronecker(&s1, &prod)? * i_pow(nhat));
        next.push(kronecker(&s2, &id)?);
        gammas = next;
    }
    if n % 2 == 1 {
        let nhat = gammas.len() / 2;
        let prod = product_of(&gammas);
        gammas.push(prod * neg_i_pow(nhat));
    }
    let nhat = gammas[0].nrows().trailing_zeros() as usize;
    Ok(CliffordAlgebra { n, nhat, gammas })
}

static CACHE: Lazy<Mutex<HashMap<usize, Arc<CliffordAlgebra>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Builds (and memoizes per process) the Dirac algebra for dimension `n ≥ 2`.
pub fn build_algebra(n: usize) -> Result<Arc<CliffordAlgebra>> {
    if let Some(alg) = CACHE.lock().unwrap().get(&n) {
        return Ok(alg.clone());
    }
    let alg = Arc::new(build_uncached(n)?);
    CACHE.lock().unwrap().insert(n, alg.clone());
    Ok(alg)
}

/// Fully antisymmetric symbol: 0 on repeated indices, sgn(π) otherwise.
pub fn epsilon_symbol(indices: &[usize]) -> i32 {
    let n = indices.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if indices[i] == indices[j] {
                return 0;
            }
        }
    }
    let mut sign = 1i32;
    for i in 0..n {
        for j in (i + 1)..n {
            if indices[i] > indices[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// tr(γ_{i1} ⋯ γ_{ik}) for 1-based `indices`.
pub fn gamma_trace(alg: &CliffordAlgebra, indices: &[usize]) -> Result<Complex64> {
    if indices.is_empty() {
        return Err(Error::Domain("gamma_trace needs a nonempty index list".into()));
    }
    for &i in indices {
        if i < 1 || i > alg.n() {
            return Err(Error::Domain(format!(
                "gamma index {} out of range 1..{}",
                i,
                alg.n()
            )));
        }
    }
    let mut p = alg.gamma(indices[0]).clone();
    for &i in &indices[1..] {
        p = p * alg.gamma(i);
    }
    Ok(linalg::trace(&p))
}

/// All permutations of `1..=n` with their signs (Heap's algorithm).
///
/// These n! tuples are exactly the nonzero terms of the ε-weighted sums.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    let mut items: Vec<usize> = (1..=n).collect();
    let mut out = Vec::with_capacity((1..=n).product());
    let mut c = vec![0usize; n];
    let mut sign = 1i32;
    out.push((items.clone(), sign));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            sign = -sign;
            out.push((items.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kronecker_block_layout() {
        // σ₁ ∘ I₂ has identity blocks on the anti-diagonal
        let k = kronecker(&sigma1(), &linalg::identity(2)).unwrap();
        let expect = linalg::from_rows_re(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(linalg::max_diff(&k, &expect), 0.0);
        // I₂ ∘ I₂ = I₄
        let k = kronecker(&linalg::identity(2), &linalg::identity(2)).unwrap();
        assert_eq!(linalg::max_diff(&k, &linalg::identity(4)), 0.0);
        // trace product law on σ₃ ∘ σ₃
        let k = kronecker(&sigma3(), &sigma3()).unwrap();
        assert_eq!(linalg::trace(&k), c(0.0, 0.0));
    }

    #[test]
    fn kronecker_rejects_non_square() {
        let rect = linalg::zeros(2, 3);
        assert!(kronecker(&rect, &sigma1()).is_err());
    }

    #[test]
    fn n2_is_pauli() {
        let alg = build_algebra(2).unwrap();
        assert_eq!(linalg::max_diff(alg.gamma(1), &sigma1()), 0.0);
        assert_eq!(linalg::max_diff(alg.gamma(2), &sigma2()), 0.0);
    }

    #[test]
    fn n3_third_element_is_sigma3() {
        // oracle: (−i)·σ₁·σ₂ computed by hand equals σ₃
        let alg = build_algebra(3).unwrap();
        let prod = sigma1() * sigma2() * (-C_I);
        assert!(linalg::max_diff(&prod, &sigma3()) < 1e-15);
        assert!(linalg::max_diff(alg.gamma(3), &sigma3()) < 1e-15);
    }

    #[test]
    fn n5_all_relations() {
        let alg = build_algebra(5).unwrap();
        assert_eq!(alg.dim(), 4);
        assert_eq!(alg.gammas().len(), 5);
        alg.verify(1e-12).unwrap();
    }

    #[test]
    fn relations_hold_up_to_n8() {
        for n in 2..=8 {
            build_algebra(n).unwrap().verify(1e-12).unwrap();
        }
    }

    #[test]
    fn gamma_trace_full_tuple() {
        let alg = build_algebra(3).unwrap();
        assert!((gamma_trace(&alg, &[1, 2, 3]).unwrap() - c(0.0, 2.0)).norm() < 1e-12);
        assert!((gamma_trace(&alg, &[1, 3, 2]).unwrap() - c(0.0, -2.0)).norm() < 1e-12);
        let alg5 = build_algebra(5).unwrap();
        assert!(gamma_trace(&alg5, &[1, 2, 3]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn gamma_trace_rejects_bad_index() {
        let alg = build_algebra(3).unwrap();
        assert!(gamma_trace(&alg, &[0]).is_err());
        assert!(gamma_trace(&alg, &[4]).is_err());
        assert!(gamma_trace(&alg, &[]).is_err());
    }

    #[test]
    fn full_trace_matches_epsilon_for_odd_n() {
        for &n in &[3usize, 5, 7] {
            let alg = build_algebra(n).unwrap();
            let scale = i_pow(alg.nhat()) * (2.0f64).powi(alg.nhat() as i32);
            for (perm, sign) in signed_permutations(n) {
                let t = gamma_trace(&alg, &perm).unwrap();
                let expect = scale * (sign as f64);
                assert!(
                    (t - expect).norm() < 1e-12,
                    "n={n} perm={perm:?}: {t} vs {expect}"
                );
                assert_eq!(epsilon_symbol(&perm), sign);
            }
        }
    }

    #[test]
    fn short_odd_traces_vanish() {
        // exhaustive over odd lengths < n for n = 3, 5
        for &n in &[3usize, 5] {
            let alg = build_algebra(n).unwrap();
            let mut len = 1;
            while len <= n - 2 {
                let mut idx = vec![1usize; len];
                loop {
                    assert!(
                        gamma_trace(&alg, &idx).unwrap().norm() < 1e-12,
                        "n={n} idx={idx:?}"
                    );
                    // odometer increment
                    let mut p = 0;
                    loop {
                        if p == len {
                            break;
                        }
                        idx[p] += 1;
                        if idx[p] <= n {
                            break;
                        }
                        idx[p] = 1;
                        p += 1;
                    }
                    if p == len {
                        break;
                    }
                }
                len += 2;
            }
        }
    }

    #[test]
    fn epsilon_symbol_basics() {
        assert_eq!(epsilon_symbol(&[1, 2, 3]), 1);
        assert_eq!(epsilon_symbol(&[2, 1, 3]), -1);
        assert_eq!(epsilon_symbol(&[1, 1, 3]), 0);
    }

    #[test]
    fn symmetric_table_sum_cancels() {
        // ε-weighted γ-trace sum against a table symmetric in its last two
        // indices vanishes (n = 3)
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let alg = build_algebra(3).unwrap();
        for _ in 0..5 {
            let mut table = [[[c(0.0, 0.0); 3]; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in j..3 {
                        let v = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                        table[i][j][k] = v;
                        table[i][k][j] = v;
                    }
                }
            }
            let mut sum = c(0.0, 0.0);
            for i1 in 1..=3usize {
                for i2 in 1..=3usize {
                    for i3 in 1..=3usize {
                        sum += gamma_trace(&alg, &[i1, i2, i3]).unwrap()
                            * table[i1 - 1][i2 - 1][i3 - 1];
                    }
                }
            }
            assert!(sum.norm() < 1e-10, "sum = {sum}");
        }
    }
}
