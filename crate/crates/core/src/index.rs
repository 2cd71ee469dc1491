//! The surface-integral index formula and its consistency checks.
//!
//! For a sign-type potential U on ℝⁿ (n odd) the index of Q + U is
//!
//! ```text
//! (i/8π)^((n-1)/2) / ((n-1)/2)! · lim_Λ (1/2Λ) Σ_{i₁…i_n} ε_{i₁…i_n}
//!     ∮_{ΛS^{n-1}} tr(U ∂_{i₁}U … ∂_{i_{n-1}}U)(x) · x_{i_n} dσ(x)
//! ```
//!
//! Quadrature is an iterated product rule over spherical angles, exact for
//! polynomials up to a declared degree. The ε-sum runs over the n!
//! permutations only; derivative matrices are evaluated once per node.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::clifford::signed_permutations;
use crate::helmholtz::{gamma_half_integer, unit_sphere_area};
use crate::linalg::{self, pairwise_sum, ComplexMatrix};
use crate::matrixfn::gauss_legendre;
use crate::potential::{Potential, SmoothMap};
use crate::{Error, Result};

/// Quadrature rule on the unit sphere S^{n−1}: unit nodes and positive
/// weights summing to the surface area ω_{n−1}.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub n: usize,
    pub degree: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Gauss–Chebyshev (second kind) rule: exact for polynomials of degree
/// ≤ 2m−1 against the weight √(1−u²) on (−1,1).
fn gauss_chebyshev2(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for j in 1..=m {
        let t = j as f64 * std::f64::consts::PI / (m as f64 + 1.0);
        nodes.push(t.cos());
        weights.push(std::f64::consts::PI / (m as f64 + 1.0) * t.sin() * t.sin());
    }
    (nodes, weights)
}

fn build_rule(n: usize, degree: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if n == 2 {
        let m = (degree + 1).max(4);
        let w = 2.0 * std::f64::consts::PI / m as f64;
        let mut nodes = Vec::with_capacity(m);
        for j in 0..m {
            let phi = w * (j as f64 + 0.5);
            nodes.push(vec![phi.cos(), phi.sin()]);
        }
        return (nodes, vec![w; m]);
    }
    // polar layer: weight (1−u²)^{(n−3)/2} du times a rule on S^{n−2}
    let p = n - 3;
    let (u_nodes, u_weights) = if p % 2 == 0 {
        // polynomial weight folded into Gauss–Legendre
        let m = (degree + p) / 2 + 1;
        let (nodes, mut weights) = gauss_legendre(m);
        for (u, w) in nodes.iter().zip(weights.iter_mut()) {
            *w *= (1.0 - u * u).powi((p / 2) as i32);
        }
        (nodes, weights)
    } else {
        // (1−u²)^{1/2} handled by Chebyshev-2, remaining even power folded in
        let m = (degree + p) / 2 + 1;
        let (nodes, mut weights) = gauss_chebyshev2(m);
        for (u, w) in nodes.iter().zip(weights.iter_mut()) {
            *w *= (1.0 - u * u).powi(((p - 1) / 2) as i32);
        }
        (nodes, weights)
    };
    let (inner_nodes, inner_weights) = build_rule(n - 1, degree);
    let mut nodes = Vec::with_capacity(u_nodes.len() * inner_nodes.len());
    let mut weights = Vec::with_capacity(u_nodes.len() * inner_nodes.len());
    for (u, uw) in u_nodes.iter().zip(&u_weights) {
        let s = (1.0 - u * u).sqrt();
        for (y, yw) in inner_nodes.iter().zip(&inner_weights) {
            let mut x = Vec::with_capacity(n);
            for yi in y {
                x.push(s * yi);
            }
            x.push(*u);
            nodes.push(x);
            weights.push(uw * yw);
        }
    }
    (nodes, weights)
}

impl SphereRule {
    /// Product rule of the given polynomial exactness degree.
    pub fn product(n: usize, degree: usize) -> Result<SphereRule> {
        if n < 2 {
            return Err(Error::Domain(format!("sphere rule needs n >= 2, got {n}")));
        }
        if degree < 7 {
            return Err(Error::Domain(format!("rule degree must be >= 7, got {degree}")));
        }
        let (nodes, weights) = build_rule(n, degree);
        Ok(SphereRule { n, degree, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i f(x_i) over unit nodes, bit-reproducible across thread counts.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> Complex64 + Send + Sync) -> Complex64 {
        let vals: Vec<Complex64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(x, w)| f(x) * *w)
            .collect();
        pairwise_sum(&vals)
    }

    /// Closed-form moment ∫ x^α dσ for the exactness check: zero when any
    /// exponent is odd, else 2 Π Γ((α_i+1)/2) / Γ((|α|+n)/2).
    pub fn exact_monomial_moment(n: usize, alpha: &[usize]) -> f64 {
        if alpha.iter().any(|a| a % 2 == 1) {
            return 0.0;
        }
        let total: usize = alpha.iter().sum();
        let mut num = 2.0;
        for &a in alpha {
            num *= gamma_half_integer(a + 1);
        }
        num / gamma_half_integer(total + n)
    }
}

/// The ε-weighted surface integrand
/// Σ ε_{i₁…i_n} tr(U ∂_{i₁}U … ∂_{i_{n-1}}U)(x) · x_{i_n}.
pub fn surface_integrand(u: &Potential, x: &[f64]) -> Complex64 {
    let n = u.n();
    let u0 = u.eval(x);
    let derivs: Vec<ComplexMatrix> = (0..n).map(|j| u.derivative(x, j)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (perm, sign) in signed_permutations(n) {
        let mut prod = u0.clone();
        for &i in &perm[..n - 1] {
            prod = prod * &derivs[i - 1];
        }
        acc += linalg::trace(&prod) * (sign as f64) * x[perm[n - 1] - 1];
    }
    acc
}

/// M_U(x) = Σ ε_{i₁…i_n} tr(∂_{i₁}U … ∂_{i_n}U)(x), the volume density.
pub fn m_density(u: &Potential, x: &[f64]) -> Complex64 {
    let n = u.n();
    let derivs: Vec<ComplexMatrix> = (0..n).map(|j| u.derivative(x, j)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (perm, sign) in signed_permutations(n) {
        let mut prod = derivs[perm[0] - 1].clone();
        for &i in &perm[1..] {
            prod = prod * &derivs[i - 1];
        }
        acc += linalg::trace(&prod) * (sign as f64);
    }
    acc
}

/// (i/8π)^{(n−1)/2} / ((n−1)/2)!, the prefactor applied with 1/(2Λ).
pub fn index_prefactor(n: usize) -> Complex64 {
    let nhat = (n - 1) / 2;
    let i_over = Complex64::new(0.0, 1.0 / (8.0 * std::f64::consts::PI));
    let fact: f64 = (1..=nhat).map(|k| k as f64).product();
    i_over.powu(nhat as u32) / fact
}

/// Result of a surface-formula index evaluation.
#[derive(Debug, Clone)]
pub struct IndexResult {
    /// (Λ, prefactor·(1/2Λ)·∮ integrand) per configured radius
    pub per_radius: Vec<(f64, Complex64)>,
    pub extrapolated: Complex64,
    pub index_real: f64,
    pub imag_residual: f64,
    pub integer_distance: f64,
    /// c_n = ½(i/8π)^{(n−1)/2}/((n−1)/2)! as used in the volume form
    pub c_n: Complex64,
    /// false when no plateau was found and the limit was extrapolated
    pub converged: bool,
    /// the evaluated potential has an identically-zero block, so the value
    /// is a generalized Witten index of a non-Fredholm operator
    pub generalized_witten: bool,
}

/// Default geometric Λ schedule {R+1, 2(R+1), 4(R+1), 8(R+1)}.
pub fn default_radii(gap_radius: f64) -> Vec<f64> {
    let base = gap_radius.max(0.0) + 1.0;
    vec![base, 2.0 * base, 4.0 * base, 8.0 * base]
}

pub const PLATEAU_TOL: f64 = 1e-7;

/// Evaluates the surface index formula on the Λ schedule and extrapolates.
///
/// Radii must lie at or beyond the potential's gap radius. A missing plateau
/// is not an error: the result is flagged `converged = false` and the values
/// are still returned (non-Fredholm exploration needs them).
pub fn callias_index(u: &Potential, radii: &[f64], rule: &SphereRule) -> Result<IndexResult> {
    let n = u.n();
    if n % 2 == 0 {
        return Err(Error::Domain(
            "the index vanishes identically in even dimensions; only odd n is computed".into(),
        ));
    }
    if rule.n != n {
        return Err(Error::Dimension(format!(
            "rule dimension {} does not match potential dimension {n}",
            rule.n
        )));
    }
    if radii.is_empty() {
        return Err(Error::Domain("empty radius schedule".into()));
    }
    let gap = u.gap_radius();
    if gap.is_finite() {
        for &r in radii {
            if r < gap {
                return Err(Error::Domain(format!(
                    "radius {r} is inside the gap radius {gap}"
                )));
            }
        }
    }
    let pref = index_prefactor(n);
    let mut per_radius = Vec::with_capacity(radii.len());
    for &lambda in radii {
        let scale = lambda.powi(n as i32 - 1);
        let surf = rule.integrate(|dir| {
            let x: Vec<f64> = dir.iter().map(|&v| v * lambda).collect();
            surface_integrand(u, &x)
        });
        per_radius.push((lambda, pref * surf * scale / (2.0 * lambda)));
    }

    // plateau: three consecutive radii within PLATEAU_TOL
    let mut plateau_at = None;
    for w in per_radius.windows(3) {
        if (w[0].1 - w[1].1).norm() < PLATEAU_TOL && (w[1].1 - w[2].1).norm() < PLATEAU_TOL {
            plateau_at = Some(w[2].1);
        }
    }
    let (extrapolated, converged) = match plateau_at {
        Some(v) => (v, true),
        None if per_radius.len() >= 2 => {
            // Richardson in 1/Λ from the last two radii
            let (l1, v1) = per_radius[per_radius.len() - 2];
            let (l2, v2) = per_radius[per_radius.len() - 1];
            let (t1, t2) = (1.0 / l1, 1.0 / l2);
            let v = (v2 * t1 - v1 * t2) / (t1 - t2);
            let residual = (v - v2).norm();
            (v, residual < 1e-4)
        }
        None => (per_radius[0].1, false),
    };
    let index_real = extrapolated.re;
    Ok(IndexResult {
        per_radius,
        extrapolated,
        index_real,
        imag_residual: extrapolated.im.abs(),
        integer_distance: (index_real - index_real.round()).abs(),
        c_n: pref.unscale(2.0),
        converged,
        generalized_witten: u.is_generalized_witten(),
    })
}

/// Volume form of the index: c_n ∫_{B(0,Λ)} M_U dx by radial shells over the
/// same sphere rule. Agrees with the surface value at the same Λ by the
/// divergence identity.
pub fn volume_index(
    u: &Potential,
    lambda: f64,
    rule: &SphereRule,
    radial_panels: usize,
) -> Result<Complex64> {
    let n = u.n();
    if rule.n != n {
        return Err(Error::Dimension("rule dimension mismatch".into()));
    }
    let (gl_nodes, gl_weights) = gauss_legendre(16);
    let panels = radial_panels.max(4);
    let h = lambda / panels as f64;
    let mut shell_vals = Vec::with_capacity(panels * gl_nodes.len());
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (t, w) in gl_nodes.iter().zip(&gl_weights) {
            let r = mid + 0.5 * h * t;
            let sphere = rule.integrate(|dir| {
                let x: Vec<f64> = dir.iter().map(|&v| v * r).collect();
                m_density(u, &x)
            });
            shell_vals.push(sphere * (w * 0.5 * h * r.powi(n as i32 - 1)));
        }
    }
    let integral = pairwise_sum(&shell_vals);
    Ok(index_prefactor(n).unscale(2.0) * integral)
}

/// Max residual of M_{U∘T}(x) = M_U(T(x))·det T′(x) over the samples.
pub fn chain_rule_check(u: &Potential, map: &SmoothMap, samples: &[Vec<f64>]) -> f64 {
    let composed = u.compose(map, format!("{}∘T", u.label()));
    let mut worst = 0.0f64;
    for x in samples {
        let lhs = m_density(&composed, x);
        let rhs = m_density(u, &map.apply(x)) * map.det_jacobian(x);
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}

/// Both indices around an orientation-signed transformation:
/// returns (ind(Q+U), sgn(T)·ind(Q+U∘T), difference).
pub fn invariance_check(
    u: &Potential,
    map: &SmoothMap,
    radii: &[f64],
    rule: &SphereRule,
) -> Result<(f64, f64, f64)> {
    let direct = callias_index(u, radii, rule)?;
    let composed = u.compose(map, format!("{}∘T", u.label()));
    let transformed = callias_index(&composed, radii, rule)?;
    let signed = map.orientation() as f64 * transformed.index_real;
    Ok((direct.index_real, signed, (direct.index_real - signed).abs()))
}

/// |ind(Φ) − ind(Φ(t·))| for the scaling homotopy.
pub fn scaling_check(u: &Potential, t_scale: f64, radii: &[f64], rule: &SphereRule) -> Result<f64> {
    if t_scale <= 0.0 {
        return Err(Error::Domain("scaling factor must be positive".into()));
    }
    let direct = callias_index(u, radii, rule)?;
    let scaled_pot = u.rescale_argument(t_scale);
    let scaled_radii: Vec<f64> = radii.iter().map(|r| r / t_scale.min(1.0)).collect();
    let scaled = callias_index(&scaled_pot, &scaled_radii, rule)?;
    Ok((direct.index_real - scaled.index_real).abs())
}
