//! The shell-supported potential whose regularized resolvent difference
//! fails to be trace class: Φ(x) = Σσ_j + Σ_k k^{−1/3} Σ_j σ_j ξ_{k,j}(x)
//! with
//!
//! ```text
//! ξ_{k,j}(x) = ψ_{1,k}(|x|) (x_j − r_k) ψ_{2,k}(x_j) / r_{k+1},   r_k = 2^k − 2,
//! ```
//!
//! and smooth cutoffs ψ_{1,k}, ψ_{2,k} supported on [r_k, r_{k+1}]. On the
//! inner cubes B̃_k the derivative ∂_jΦ is a constant multiple of σ_j, and
//! the resulting L¹ lower bound Σ (1/k) vol(B̃_k)/r³ diverges like log K.
//!
//! Note the derivative constant observed on B̃_k carries the 1/r_{k+1}
//! factor from the definition of ξ_{k,j}; statements quoting k^{−1/3} alone
//! refer to a different normalization. The diagnostics below report the
//! observed constant rather than resolving that by fiat.

use std::sync::Arc;

use once_cell::sync::Lazy;

use super::Potential;
use crate::clifford::{sigma1, sigma2, sigma3};
use crate::linalg::ComplexMatrix;
use crate::matrixfn::gauss_legendre;
use crate::{Error, Result};

static GL64: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(64));

/// Normalization constant of the interpolant φ₁ (integral of the standard
/// bump over (0,1)), computed once by quadrature.
static BUMP_MASS: Lazy<f64> = Lazy::new(|| {
    let (nodes, weights) = &*GL64;
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let s = 0.5 * (x + 1.0);
            0.5 * w * (-1.0 / (s * (1.0 - s))).exp()
        })
        .sum()
});

/// φ₁: C^∞ interpolant, 0 for t ≤ 0, 1 for t ≥ 1, built as the normalized
/// integral of the standard bump so that its derivative bound is computed,
/// not assumed.
pub fn phi1(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let (nodes, weights) = &*GL64;
    let integral: f64 = nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let s = 0.5 * t * (x + 1.0);
            0.5 * t * w * (-1.0 / (s * (1.0 - s))).exp()
        })
        .sum();
    // quadrature noise can overshoot the mass by a few ulp near t = 1
    (integral / *BUMP_MASS).clamp(0.0, 1.0)
}

/// φ₁′(t) = bump(t)/mass.
pub fn phi1_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp() / *BUMP_MASS
    }
}

/// sup |φ₁′| = bump(1/2)/mass = e^{−4}/mass.
pub fn phi1_deriv_sup() -> f64 {
    (-4.0f64).exp() / *BUMP_MASS
}

/// Smooth window ψ_{r1,r2,t1,t2}: 0 outside [r1, r2], 1 on [r1+t1, r2−t2].
#[derive(Debug, Clone, Copy)]
pub struct SmoothWindow {
    pub r1: f64,
    pub r2: f64,
    pub t1: f64,
    pub t2: f64,
}

impl SmoothWindow {
    pub fn new(r1: f64, r2: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(r1 + t1 < r2 - t2) {
            return Err(Error::Domain(format!(
                "window needs r1+t1 < r2-t2, got {r1}+{t1} vs {r2}-{t2}"
            )));
        }
        Ok(SmoothWindow { r1, r2, t1, t2 })
    }

    pub fn eval(&self, s: f64) -> f64 {
        phi1((s - self.r1) / self.t1) * phi1((self.r2 - s) / self.t2)
    }

    pub fn deriv(&self, s: f64) -> f64 {
        phi1_deriv((s - self.r1) / self.t1) / self.t1 * phi1((self.r2 - s) / self.t2)
            - phi1((s - self.r1) / self.t1) * phi1_deriv((self.r2 - s) / self.t2) / self.t2
    }
}

/// r_k = 2^k − 2.
pub fn shell_radius(k: usize) -> f64 {
    2.0f64.powi(k as i32) - 2.0
}

fn psi_1k(k: usize) -> SmoothWindow {
    let p = 2.0f64.powi(k as i32);
    SmoothWindow::new(shell_radius(k), shell_radius(k + 1), p / 2.0, p / 20.0).expect("valid window")
}

fn psi_2k(k: usize) -> SmoothWindow {
    let p = 2.0f64.powi(k as i32);
    SmoothWindow::new(shell_radius(k), shell_radius(k + 1), p / 36.0, 17.0 / 18.0 * p)
        .expect("valid window")
}

/// ξ_{k,j}(x), nonzero only on the shell B_k.
pub fn xi(k: usize, j: usize, x: &[f64; 3]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let w1 = psi_1k(k).eval(r);
    if w1 == 0.0 {
        return 0.0;
    }
    let w2 = psi_2k(k).eval(x[j]);
    w1 * (x[j] - shell_radius(k)) * w2 / shell_radius(k + 1)
}

/// ∂_ℓ ξ_{k,j}(x), analytic.
pub fn xi_deriv(k: usize, j: usize, l: usize, x: &[f64; 3]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    let w1 = psi_1k(k);
    let w2 = psi_2k(k);
    let v1 = w1.eval(r);
    let dv1 = w1.deriv(r) * x[l] / r;
    let v2 = w2.eval(x[j]);
    let rk = shell_radius(k);
    let mut out = dv1 * (x[j] - rk) * v2;
    if l == j {
        out += v1 * v2 + v1 * (x[j] - rk) * w2.deriv(x[j]);
    }
    out / shell_radius(k + 1)
}

/// Shell indices k whose B_k can contain a point at radius r (at most two).
fn active_shells(r: f64, k_max: usize) -> std::ops::RangeInclusive<usize> {
    if r < shell_radius(2) {
        return 2..=2.min(k_max);
    }
    let k_est = ((r + 2.0).log2().floor() as usize).clamp(2, k_max);
    k_est.saturating_sub(1).max(2)..=(k_est + 1).min(k_max)
}

/// The counterexample potential truncated at shell `k_max`, together with
/// its shell bookkeeping.
#[derive(Clone)]
pub struct CounterexamplePotential {
    pub k_min: usize,
    pub k_max: usize,
}

impl CounterexamplePotential {
    pub fn eval(&self, x: &[f64; 3]) -> ComplexMatrix {
        let sig = [sigma1(), sigma2(), sigma3()];
        let mut coeff = [1.0f64; 3];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        for k in active_shells(r, self.k_max) {
            if k < self.k_min {
                continue;
            }
            let amp = (k as f64).powf(-1.0 / 3.0);
            for j in 0..3 {
                coeff[j] += amp * xi(k, j, x);
            }
        }
        sig[0].scale(coeff[0]) + sig[1].scale(coeff[1]) + sig[2].scale(coeff[2])
    }

    pub fn deriv(&self, x: &[f64; 3], l: usize) -> ComplexMatrix {
        let sig = [sigma1(), sigma2(), sigma3()];
        let mut coeff = [0.0f64; 3];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        for k in active_shells(r, self.k_max) {
            if k < self.k_min {
                continue;
            }
            let amp = (k as f64).powf(-1.0 / 3.0);
            for j in 0..3 {
                coeff[j] += amp * xi_deriv(k, j, l, x);
            }
        }
        sig[0].scale(coeff[0]) + sig[1].scale(coeff[1]) + sig[2].scale(coeff[2])
    }

    /// Inner cube of B̃_k: [r_k + 2^k/36, r_{k+1} − (17/18)2^k] per axis.
    pub fn inner_cube(&self, k: usize) -> (f64, f64) {
        let p = 2.0f64.powi(k as i32);
        (shell_radius(k) + p / 36.0, shell_radius(k + 1) - 17.0 / 18.0 * p)
    }

    /// Radial band of B̃_k: [r_k + 2^k/2, r_{k+1} − 2^k/20].
    pub fn radial_band(&self, k: usize) -> (f64, f64) {
        let p = 2.0f64.powi(k as i32);
        (shell_radius(k) + p / 2.0, shell_radius(k + 1) - p / 20.0)
    }

    /// Whether the inner cube lies entirely inside the radial band, so that
    /// vol(B̃_k) equals the cube volume (2^k/36)³.
    pub fn cube_inside_band(&self, k: usize) -> bool {
        let (lo, hi) = self.inner_cube(k);
        let (b_lo, b_hi) = self.radial_band(k);
        let s3 = 3.0f64.sqrt();
        s3 * lo >= b_lo && s3 * hi <= b_hi
    }
}

/// The counterexample as a [`Potential`] (n = 3, d = 2), truncated at shell
/// `k_max`; beyond r_{k_max+1} it is the constant Σσ_j.
pub fn appendix_b_potential(k_max: usize) -> Result<Potential> {
    if k_max < 3 {
        return Err(Error::Domain(format!("appendix_b needs kmax >= 3, got {k_max}")));
    }
    let ce = CounterexamplePotential { k_min: 2, k_max };
    let ce_eval = ce.clone();
    let eval = move |x: &[f64]| ce_eval.eval(&[x[0], x[1], x[2]]);
    let ce_deriv = ce.clone();
    let deriv = move |x: &[f64], l: usize| ce_deriv.deriv(&[x[0], x[1], x[2]], l);
    Ok(Potential {
        n: 3,
        d: 2,
        eval: Arc::new(eval),
        derivative: Some(Arc::new(deriv)),
        // Φ² = (Σ_j (1 + k^{−1/3}ξ_{k,j})²) I ≥ I everywhere
        gap_radius: 0.0,
        gap_c: 1.0,
        label: format!("appendix_b(kmax={k_max})"),
        generalized_witten: false,
    })
}

/// Per-shell diagnostics of the counterexample.
#[derive(Debug, Clone)]
pub struct ShellReport {
    pub k: usize,
    pub r_k: f64,
    /// vol(B̃_k)·36³/2^{3k} (1 once the inner cube fits in the radial band)
    pub volume_ratio: f64,
    /// coefficient c in ∂_jΦ = c·σ_j observed at the cube center
    pub observed_derivative: f64,
    /// k^{−1/3}/r_{k+1}, the constant implied by the ξ definition
    pub expected_derivative: f64,
    /// max |∂_ℓξ_{k,j} − δ_{ℓj}/r_{k+1}| over sampled cube points
    pub shell_derivative_defect: f64,
}

/// Diagnostics record: shell facts, first regular shell k₀, and the
/// divergent partial sums S_K = Σ_{k=k₀}^K (1/k)·2^{3k}/(2^k−2)³·36^{−3}.
#[derive(Debug, Clone)]
pub struct AppendixBDiagnostics {
    pub k0: usize,
    pub shells: Vec<ShellReport>,
    /// (K, S_K) pairs for K = k₀ .. k_max
    pub partial_sums: Vec<(usize, f64)>,
}

impl AppendixBDiagnostics {
    /// S_K by direct summation (the same summation the report stores).
    pub fn partial_sum(&self, upper: usize) -> f64 {
        self.partial_sums
            .iter()
            .rev()
            .find(|(k, _)| *k <= upper)
            .map(|(_, s)| *s)
            .unwrap_or(0.0)
    }

    /// Growth per doubling S_{2K} − S_K.
    pub fn doubling_increment(&self, k: usize) -> f64 {
        self.partial_sum(2 * k) - self.partial_sum(k)
    }
}

/// Runs the shell diagnostics up to `k_max` shells.
pub fn appendix_b_diagnostics(k_max: usize) -> Result<AppendixBDiagnostics> {
    let ce = CounterexamplePotential { k_min: 2, k_max };
    // first shell where the cube-in-band geometry (and hence the closed-form
    // volume) holds for this and all later shells we inspect
    let mut k0 = None;
    for k in 2..=k_max {
        if ce.cube_inside_band(k) {
            if k0.is_none() {
                k0 = Some(k);
            }
        } else if k0.is_some() {
            return Err(Error::Numerical {
                context: format!("cube-in-band geometry regressed at shell {k}"),
                residual: k as f64,
            });
        }
    }
    let k0 = k0.ok_or_else(|| Error::Domain(format!("k_max={k_max} too small: no regular shell found")))?;

    let mut shells = Vec::new();
    let sample_cap = k_max.min(24); // beyond this the cube coordinates overflow nothing, but sampling adds no info
    for k in 2..=sample_cap {
        let (lo, hi) = ce.inner_cube(k);
        let volume_ratio = if ce.cube_inside_band(k) {
            let side = hi - lo;
            side.powi(3) * 36.0f64.powi(3) / 2.0f64.powi(3 * k as i32)
        } else {
            f64::NAN
        };
        let mid = 0.5 * (lo + hi);
        let center = [mid, mid, mid];
        let d0 = ce.deriv(&center, 0);
        // c from the σ₁ component: entry (0,1) is real for σ₁·c
        let observed = d0[(0, 1)].re;
        let expected = (k as f64).powf(-1.0 / 3.0) / shell_radius(k + 1);

        // ∂_ℓ ξ_{k,j} = δ_{ℓj}/r_{k+1} on sampled cube points
        let mut defect = 0.0f64;
        if ce.cube_inside_band(k) {
            for (si, sj, sk) in [(0.3, 0.5, 0.7), (0.5, 0.5, 0.5), (0.7, 0.4, 0.6)] {
                let pt = [lo + si * (hi - lo), lo + sj * (hi - lo), lo + sk * (hi - lo)];
                let r = (pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2]).sqrt();
                let (b_lo, b_hi) = ce.radial_band(k);
                if !(b_lo <= r && r <= b_hi) {
                    continue;
                }
                for j in 0..3 {
                    for l in 0..3 {
                        let want = if l == j { 1.0 / shell_radius(k + 1) } else { 0.0 };
                        defect = defect.max((xi_deriv(k, j, l, &pt) - want).abs());
                    }
                }
            }
        }
        shells.push(ShellReport {
            k,
            r_k: shell_radius(k),
            volume_ratio,
            observed_derivative: observed,
            expected_derivative: expected,
            shell_derivative_defect: defect,
        });
    }

    let mut partial_sums = Vec::new();
    let mut s = 0.0f64;
    for k in k0..=k_max {
        let p = 2.0f64.powi(3 * k as i32);
        s += (1.0 / k as f64) * p / (2.0f64.powi(k as i32) - 2.0).powi(3) / 36.0f64.powi(3);
        partial_sums.push((k, s));
    }
    Ok(AppendixBDiagnostics { k0, shells, partial_sums })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolant_shape() {
        assert_eq!(phi1(-0.2), 0.0);
        assert_eq!(phi1(1.3), 1.0);
        assert!(phi1(0.5) > 0.0 && phi1(0.5) < 1.0);
        // symmetric bump → φ₁(1/2) = 1/2
        assert!((phi1(0.5) - 0.5).abs() < 1e-12);
        // derivative sup is attained at 1/2
        assert!((phi1_deriv(0.5) - phi1_deriv_sup()).abs() < 1e-14);
        assert!(phi1_deriv(0.31) < phi1_deriv_sup());
    }

    #[test]
    fn window_properties() {
        // 0 ≤ ψ ≤ 1, ψ = 1 on [r1+t1, r2−t2], ψ = 0 outside [r1, r2]
        let w = SmoothWindow::new(2.0, 6.0, 0.5, 1.0).unwrap();
        for i in 0..200 {
            let s = -1.0 + 9.0 * i as f64 / 199.0;
            let v = w.eval(s);
            assert!((0.0..=1.0).contains(&v), "s={s} v={v}");
            if (2.5..=5.0).contains(&s) {
                assert_eq!(v, 1.0, "s={s}");
            }
            if !(2.0..=6.0).contains(&s) {
                assert_eq!(v, 0.0, "s={s}");
            }
        }
        // derivative bound d₁·max(1/t1, 1/t2) on the ramps
        let d1 = phi1_deriv_sup();
        for i in 0..100 {
            let s = 2.0 + 4.0 * i as f64 / 99.0;
            assert!(w.deriv(s).abs() <= d1 * (1.0 / 0.5f64).max(1.0 / 1.0) + 1e-12);
        }
    }

    #[test]
    fn shell_radii() {
        assert_eq!(shell_radius(2), 2.0);
        assert_eq!(shell_radius(5), 30.0);
    }

    #[test]
    fn xi_supported_on_shell() {
        // ξ_{k,j}(x) ≠ 0 ⇒ x ∈ B_k
        for k in [2usize, 3, 5, 8] {
            let (rk, rk1) = (shell_radius(k), shell_radius(k + 1));
            for i in 0..60 {
                let t = i as f64 / 59.0;
                let r = 0.5 + (rk1 * 1.4 - 0.5) * t;
                let x = [r / 3.0f64.sqrt(); 3];
                let inside_radius = (rk..=rk1).contains(&r);
                for j in 0..3 {
                    let v = xi(k, j, &x);
                    if v != 0.0 {
                        assert!(inside_radius && (rk..=rk1).contains(&x[j]), "k={k} x={x:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn xi_deriv_matches_fd() {
        let k = 4usize;
        let x = [11.0, 12.0, 9.5];
        let h = 1e-5;
        for j in 0..3 {
            for l in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[l] += h;
                xm[l] -= h;
                let fd = (xi(k, j, &xp) - xi(k, j, &xm)) / (2.0 * h);
                let an = xi_deriv(k, j, l, &x);
                assert!((fd - an).abs() < 1e-8, "j={j} l={l}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn shell_derivative_is_sigma_multiple() {
        let diag = appendix_b_diagnostics(20).unwrap();
        for shell in &diag.shells {
            if shell.k < diag.k0 {
                continue;
            }
            assert!(
                shell.shell_derivative_defect < 1e-12,
                "k={}: defect {:.3e}",
                shell.k,
                shell.shell_derivative_defect
            );
            assert!(
                (shell.observed_derivative - shell.expected_derivative).abs()
                    < 1e-12 * shell.expected_derivative.max(1e-300),
                "k={}",
                shell.k
            );
        }
    }

    #[test]
    fn volume_formula_from_k0() {
        let diag = appendix_b_diagnostics(24).unwrap();
        assert!(diag.k0 >= 2);
        for shell in &diag.shells {
            if shell.k >= diag.k0 {
                assert!(
                    (shell.volume_ratio - 1.0).abs() < 1e-12,
                    "k={} ratio={}",
                    shell.k,
                    shell.volume_ratio
                );
            }
        }
    }

    #[test]
    fn r5_is_30_and_partial_sums_diverge() {
        let diag = appendix_b_diagnostics(80).unwrap();
        assert_eq!(shell_radius(5), 30.0);
        // direct-summation oracle for the divergence floor: the k-th term is
        // (1/k)(1−2^{1−k})^{−3}/36³ ≥ 1/(36³k), so S_{2K} − S_K ≥ ln2/36³
        // asymptotically; assert the 0.9-weighted floor at K = 40
        let inc = diag.doubling_increment(40);
        let floor = 0.9 / 36.0f64.powi(3) * std::f64::consts::LN_2;
        assert!(inc > floor, "increment {inc:.6e} floor {floor:.6e}");
        // oracle recomputation of S_K
        let k0 = diag.k0;
        let mut s = 0.0;
        for k in k0..=60 {
            s += (1.0 / k as f64) * (1.0 - 2.0f64.powi(1 - (k as i32))).powi(-3) / 36.0f64.powi(3);
        }
        assert!((diag.partial_sum(60) - s).abs() < 1e-15 * s.abs().max(1.0));
    }
}
