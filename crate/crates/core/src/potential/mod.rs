//! Potentials Φ: ℝⁿ → ℂ^{d×d}: representation, admissibility analysis,
//! derived potentials (smoothed sign, mollification, block embeddings), and
//! the named example potentials.

mod builtins;
mod classify;
mod counterexample;
mod io;

pub use builtins::{builtin, block_embed, linear_from_matrices, Params};
pub use classify::{classify, default_radii, AdmissibilityClass, AdmissibilityReport};
pub use counterexample::{appendix_b_diagnostics, AppendixBDiagnostics, CounterexamplePotential, ShellReport};
pub use io::{parse_potential_spec, read_grid_potential, write_grid_potential};

use std::sync::Arc;

use crate::linalg::{self, ComplexMatrix};
use crate::matrixfn::{self, SpectralDecomposition};
use crate::{Error, Result};

type EvalFn = Arc<dyn Fn(&[f64]) -> ComplexMatrix + Send + Sync>;
type DerivFn = Arc<dyn Fn(&[f64], usize) -> ComplexMatrix + Send + Sync>;

/// A matrix-valued potential on ℝⁿ with optional analytic derivative and
/// gap metadata: |Φ(x)| ≥ gap_c for |x| > gap_radius.
#[derive(Clone)]
pub struct Potential {
    n: usize,
    d: usize,
    eval: EvalFn,
    derivative: Option<DerivFn>,
    gap_radius: f64,
    gap_c: f64,
    label: String,
    /// potentials with an identically-zero block: the surface formula
    /// computes a generalized Witten index rather than a Fredholm index
    generalized_witten: bool,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential")
            .field("n", &self.n)
            .field("d", &self.d)
            .field("gap_radius", &self.gap_radius)
            .field("gap_c", &self.gap_c)
            .field("label", &self.label)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl Potential {
    pub fn new(
        n: usize,
        d: usize,
        eval: impl Fn(&[f64]) -> ComplexMatrix + Send + Sync + 'static,
        derivative: Option<DerivFn>,
        gap_radius: f64,
        gap_c: f64,
        label: impl Into<String>,
    ) -> Self {
        Potential {
            n,
            d,
            eval: Arc::new(eval),
            derivative,
            gap_radius,
            gap_c,
            label: label.into(),
            generalized_witten: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gap_radius(&self) -> f64 {
        self.gap_radius
    }

    pub fn gap_c(&self) -> f64 {
        self.gap_c
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_generalized_witten(&self) -> bool {
        self.generalized_witten
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Φ(x)
    pub fn eval(&self, x: &[f64]) -> ComplexMatrix {
        debug_assert_eq!(x.len(), self.n);
        (self.eval)(x)
    }

    /// ∂_j Φ(x), analytic when available, 4th-order finite differences
    /// otherwise.
    pub fn derivative(&self, x: &[f64], j: usize) -> ComplexMatrix {
        debug_assert!(j < self.n);
        match &self.derivative {
            Some(df) => df(x, j),
            None => {
                let f = self.eval.clone();
                matrixfn::fd_derivative(&move |y| f(y), x, j, matrixfn::fd_default_step(x))
            }
        }
    }

    /// −Φ
    pub fn negate(&self) -> Potential {
        let eval = self.eval.clone();
        let deriv = self.derivative.clone().map(|df| {
            Arc::new(move |x: &[f64], j: usize| -df(x, j)) as DerivFn
        });
        Potential {
            n: self.n,
            d: self.d,
            eval: Arc::new(move |x| -eval(x)),
            derivative: deriv,
            gap_radius: self.gap_radius,
            gap_c: self.gap_c,
            label: format!("-({})", self.label),
            generalized_witten: self.generalized_witten,
        }
    }

    /// s·Φ
    pub fn scale(&self, s: f64) -> Potential {
        let eval = self.eval.clone();
        let deriv = self.derivative.clone().map(|df| {
            Arc::new(move |x: &[f64], j: usize| df(x, j).scale(s)) as DerivFn
        });
        Potential {
            n: self.n,
            d: self.d,
            eval: Arc::new(move |x| eval(x).scale(s)),
            derivative: deriv,
            gap_radius: self.gap_radius,
            gap_c: self.gap_c * s.abs(),
            label: format!("{}*({})", s, self.label),
            generalized_witten: self.generalized_witten,
        }
    }

    /// Φ ∘ T for a smooth map with Jacobian; derivatives by the chain rule.
    pub fn compose(&self, map: &SmoothMap, label: impl Into<String>) -> Potential {
        let eval = self.eval.clone();
        let tmap = map.clone();
        let composed_eval = move |x: &[f64]| eval(&tmap.apply(x));
        let deriv = self.derivative.clone().map(|df| {
            let tmap = map.clone();
            Arc::new(move |x: &[f64], j: usize| {
                let y = tmap.apply(x);
                let jac = tmap.jacobian(x);
                let n = y.len();
                let mut out = df(&y, 0).scale(0.0);
                for l in 0..n {
                    // ∂_j (Φ∘T) = Σ_l (∂_l Φ)(T x) ∂_j T_l
                    out += df(&y, l).scale(jac[l * n + j]);
                }
                out
            }) as DerivFn
        });
        Potential {
            n: self.n,
            d: self.d,
            eval: Arc::new(composed_eval),
            derivative: deriv,
            gap_radius: self.gap_radius,
            gap_c: self.gap_c,
            label: label.into(),
            generalized_witten: self.generalized_witten,
        }
    }

    /// Φ(t·x), the scaling homotopy.
    pub fn rescale_argument(&self, t: f64) -> Potential {
        let map = SmoothMap::linear_scale(self.n, t);
        let mut p = self.compose(&map, format!("{}(t x), t={}", self.label, t));
        p.gap_radius = self.gap_radius / t;
        p
    }

    /// Samples Hermiticity and the gap invariant; used by constructors and
    /// tests rather than on every evaluation.
    pub fn validate_samples(&self, points: &[Vec<f64>], tol: f64) -> Result<()> {
        for x in points {
            let m = self.eval(x);
            let defect = linalg::hermiticity_defect(&m);
            if defect > tol * (1.0 + linalg::max_norm(&m)) {
                return Err(Error::NotHermitian { defect, tol });
            }
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > self.gap_radius && !self.generalized_witten {
                let sd = SpectralDecomposition::new(&m)?;
                let min_abs = sd.min_abs_eigenvalue();
                if min_abs < self.gap_c * (1.0 - 1e-8) {
                    return Err(Error::GapViolation {
                        min_abs_eig: min_abs,
                        required: self.gap_c,
                    });
                }
            }
        }
        Ok(())
    }
}

/// A differentiable map ℝⁿ → ℝⁿ with explicit Jacobian (row-major), used for
/// invariance and chain-rule checks.
#[derive(Clone)]
pub struct SmoothMap {
    n: usize,
    map: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    jac: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    /// sgn det T' when constant; 0 when unknown
    orientation: i32,
}

impl SmoothMap {
    pub fn new(
        n: usize,
        map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jac: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        orientation: i32,
    ) -> Self {
        SmoothMap {
            n,
            map: Arc::new(map),
            jac: Arc::new(jac),
            orientation,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.map)(x)
    }

    /// Row-major Jacobian ∂T_i/∂x_j.
    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        (self.jac)(x)
    }

    pub fn orientation(&self) -> i32 {
        self.orientation
    }

    pub fn det_jacobian(&self, x: &[f64]) -> f64 {
        let j = self.jacobian(x);
        let m = nalgebra::DMatrix::from_row_slice(self.n, self.n, &j);
        m.determinant()
    }

    pub fn identity(n: usize) -> Self {
        SmoothMap::new(
            n,
            |x| x.to_vec(),
            move |x| {
                let n = x.len();
                let mut j = vec![0.0; n * n];
                for i in 0..n {
                    j[i * n + i] = 1.0;
                }
                j
            },
            1,
        )
    }

    pub fn linear_scale(n: usize, t: f64) -> Self {
        SmoothMap::new(
            n,
            move |x| x.iter().map(|v| t * v).collect(),
            move |x| {
                let n = x.len();
                let mut j = vec![0.0; n * n];
                for i in 0..n {
                    j[i * n + i] = t;
                }
                j
            },
            if t > 0.0 { 1 } else { 1 - 2 * (n as i32 % 2) },
        )
    }

    /// Reflection of one coordinate; orientation −1.
    pub fn reflection(n: usize, axis: usize) -> Self {
        SmoothMap::new(
            n,
            move |x| {
                let mut y = x.to_vec();
                y[axis] = -y[axis];
                y
            },
            move |x| {
                let n = x.len();
                let mut j = vec![0.0; n * n];
                for i in 0..n {
                    j[i * n + i] = if i == axis { -1.0 } else { 1.0 };
                }
                j
            },
            -1,
        )
    }

    /// Rotation in the (a,b) coordinate plane by angle θ; orientation +1.
    pub fn plane_rotation(n: usize, a: usize, b: usize, theta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        SmoothMap::new(
            n,
            move |x| {
                let mut y = x.to_vec();
                y[a] = c * x[a] - s * x[b];
                y[b] = s * x[a] + c * x[b];
                y
            },
            move |x| {
                let n = x.len();
                let mut j = vec![0.0; n * n];
                for i in 0..n {
                    j[i * n + i] = 1.0;
                }
                j[a * n + a] = c;
                j[a * n + b] = -s;
                j[b * n + a] = s;
                j[b * n + b] = c;
                j
            },
            1,
        )
    }

    /// Inversion T(x) = x/|x|², a transformation of constant orientation on
    /// ℝⁿ∖{0} (orientation −1 in odd dimensions).
    pub fn inversion(n: usize) -> Self {
        SmoothMap::new(
            n,
            |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                x.iter().map(|v| v / r2).collect()
            },
            |x| {
                let n = x.len();
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mut j = vec![0.0; n * n];
                for i in 0..n {
                    for k in 0..n {
                        let delta = if i == k { 1.0 } else { 0.0 };
                        j[i * n + k] = delta / r2 - 2.0 * x[i] * x[k] / (r2 * r2);
                    }
                }
                j
            },
            if n % 2 == 1 { -1 } else { 1 },
        )
    }
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1, strictly increasing in between, flat
/// to infinite order at both ends.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let e1 = (-1.0 / t).exp();
        let e2 = (-1.0 / (1.0 - t)).exp();
        e1 / (e1 + e2)
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let e1 = (-1.0 / t).exp();
        let e2 = (-1.0 / (1.0 - t)).exp();
        (e1 * e2 / (t * t) + e1 * e2 / ((1.0 - t) * (1.0 - t))) / (e1 + e2).powi(2)
    }
}

/// Smoothed sign potential U with U = sgn(Φ) outside the gap radius and
/// U² = u·I for a smooth scalar u ∈ [0,1] equal to 1 outside B(0, τ∨R).
///
/// Built as U(x) = φ(x)·sgn(Φ(α(x))) with α the radial retraction onto
/// |x| ≥ R′ (a radius where the sampled gap still holds) and φ a smooth
/// cutoff vanishing on B(0, τ/2).
pub fn smoothed_sign(p: &Potential, tau: f64) -> Result<Potential> {
    let n = p.n();
    let big_r = p.gap_radius();
    let c = p.gap_c();

    // find R' <= R where the sampled gap is still >= c/2
    let dirs = sample_directions(n, 26);
    let mut r_inner = big_r;
    if big_r > 0.0 {
        for frac in [0.9f64, 0.8, 0.7, 0.6, 0.5] {
            let r = big_r * frac;
            let mut ok = true;
            for dir in &dirs {
                let x: Vec<f64> = dir.iter().map(|&v| v * r).collect();
                let sd = SpectralDecomposition::new(&p.eval(&x))?;
                if sd.min_abs_eigenvalue() < c / 2.0 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
            r_inner = r;
        }
        // the retraction target itself must be gapped
        for dir in &dirs {
            let x: Vec<f64> = dir.iter().map(|&v| v * r_inner.max(1e-6)).collect();
            let sd = SpectralDecomposition::new(&p.eval(&x))?;
            if sd.min_abs_eigenvalue() < c / 2.0 * (1.0 - 1e-9) {
                return Err(Error::GapViolation {
                    min_abs_eig: sd.min_abs_eigenvalue(),
                    required: c / 2.0,
                });
            }
        }
    }
    let r_outer = big_r.max(r_inner);

    let retract = move |x: &[f64]| -> Vec<f64> {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if big_r == 0.0 || r >= r_outer {
            return x.to_vec();
        }
        if r < 1e-300 {
            // direction degenerate; any point at radius r_inner works since
            // the cutoff φ vanishes here
            let mut y = vec![0.0; x.len()];
            y[0] = r_inner;
            return y;
        }
        let t = if r_outer > r_inner {
            (r - r_inner) / (r_outer - r_inner)
        } else {
            1.0
        };
        let eta = r_inner + (r - r_inner).max(0.0) * smooth_step(t);
        x.iter().map(|&v| v * eta / r).collect()
    };

    let cutoff = move |r: f64| smooth_step((r - tau / 2.0) / (tau / 2.0));
    let cutoff_deriv = move |r: f64| smooth_step_deriv((r - tau / 2.0) / (tau / 2.0)) / (tau / 2.0);

    let base_eval = p.eval.clone();
    let dim = p.d();
    let eval = move |x: &[f64]| -> ComplexMatrix {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let phi = cutoff(r);
        if phi == 0.0 {
            return linalg::zeros(dim, dim);
        }
        let y = retract(x);
        let m = base_eval(&y);
        match SpectralDecomposition::new(&m) {
            Ok(sd) => sd.apply(f64::signum).scale(phi),
            Err(_) => linalg::zeros(dim, dim),
        }
    };

    // analytic derivative via the Daleckii–Krein derivative of sgn when the
    // base has analytic derivatives
    let deriv: Option<DerivFn> = if p.has_analytic_derivative() {
        let base_eval = p.eval.clone();
        let base_deriv = p.derivative.clone().unwrap();
        Some(Arc::new(move |x: &[f64], j: usize| {
            let nloc = x.len();
            let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let phi = cutoff(r);
            let dphi = if r > 0.0 { cutoff_deriv(r) * x[j] / r } else { 0.0 };
            if phi == 0.0 && dphi == 0.0 {
                return linalg::zeros(dim, dim);
            }
            let y = retract(x);
            let m = base_eval(&y);
            let sd = match SpectralDecomposition::new(&m) {
                Ok(sd) => sd,
                Err(_) => return linalg::zeros(dim, dim),
            };
            let sgn = sd.apply(f64::signum);
            // Jacobian of the retraction α
            let jac_alpha = |x: &[f64]| -> Vec<f64> {
                if big_r == 0.0 || r >= r_outer {
                    let mut jm = vec![0.0; nloc * nloc];
                    for i in 0..nloc {
                        jm[i * nloc + i] = 1.0;
                    }
                    return jm;
                }
                // finite differences on the retraction; smooth and cheap
                let h = 1e-6 * (1.0 + r);
                let mut jm = vec![0.0; nloc * nloc];
                for col in 0..nloc {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[col] += h;
                    xm[col] -= h;
                    let yp = retract(&xp);
                    let ym = retract(&xm);
                    for row in 0..nloc {
                        jm[row * nloc + col] = (yp[row] - ym[row]) / (2.0 * h);
                    }
                }
                jm
            };
            let ja = jac_alpha(x);
            let mut dm = linalg::zeros(dim, dim);
            for l in 0..nloc {
                let coeff = ja[l * nloc + j];
                if coeff != 0.0 {
                    dm += base_deriv(&y, l).scale(coeff);
                }
            }
            let dsgn = matrixfn::herm_fn_derivative(&sd, &dm, f64::signum, |_| 0.0);
            dsgn.scale(phi) + sgn.scale(dphi)
        }))
    } else {
        None
    };

    let mut out = Potential {
        n,
        d: p.d(),
        eval: Arc::new(eval),
        derivative: deriv,
        gap_radius: r_outer.max(tau),
        gap_c: 1.0,
        label: format!("sgn({})", p.label()),
        generalized_witten: false,
    };
    // the cutoff makes U vanish near 0; keep the non-Fredholm marker off but
    // remember that |U| has no global gap
    out.generalized_witten = p.generalized_witten;
    Ok(out)
}

/// Smooth nonnegative bump supported in the unit ball with unit mass under
/// the tensor-Gauss quadrature used by [`mollify`].
#[derive(Clone)]
pub struct Mollifier {
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl Mollifier {
    pub fn new(eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Mollifier { eval: Arc::new(eval) }
    }

    /// exp(−1/(1−|y|²)) on the unit ball, 0 outside.
    pub fn standard_bump() -> Self {
        Mollifier::new(|y: &[f64]| {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            if r2 >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - r2)).exp()
            }
        })
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.eval)(y)
    }
}

/// Φ_γ = ζ_γ ∗ Φ by tensor Gauss quadrature with 8 nodes per axis over the
/// scaled bump support. The quadrature mass of the bump is used as the
/// normalization, so constants are reproduced exactly.
pub fn mollify(p: &Potential, gamma: f64, mollifier: &Mollifier) -> Result<Potential> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(Error::Domain(format!("mollification width must be in (0,1), got {gamma}")));
    }
    let n = p.n();
    let (nodes, weights) = matrixfn::gauss_legendre(8);

    // tensor nodes over [-1,1]^n with bump weights
    let mut offsets: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let y: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
        let w: f64 = idx.iter().map(|&i| weights[i]).product();
        let b = mollifier.eval(&y);
        if b > 0.0 {
            offsets.push((y, w * b));
        }
        let mut c = 0;
        loop {
            if c == n {
                break;
            }
            idx[c] += 1;
            if idx[c] < nodes.len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
        if c == n {
            break;
        }
    }
    let mass: f64 = offsets.iter().map(|(_, w)| w).sum();
    if mass <= 0.0 {
        return Err(Error::Numerical {
            context: "mollifier quadrature mass vanished".into(),
            residual: mass,
        });
    }
    let offsets = Arc::new(offsets);

    let base_eval = p.eval.clone();
    let offs = offsets.clone();
    let eval = move |x: &[f64]| -> ComplexMatrix {
        let mut acc: Option<ComplexMatrix> = None;
        for (y, w) in offs.iter() {
            let shifted: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| xi - gamma * yi).collect();
            let term = base_eval(&shifted).scale(*w / mass);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap()
    };

    let deriv: Option<DerivFn> = p.derivative.clone().map(|df| {
        let offs = offsets.clone();
        Arc::new(move |x: &[f64], j: usize| {
            let mut acc: Option<ComplexMatrix> = None;
            for (y, w) in offs.iter() {
                let shifted: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| xi - gamma * yi).collect();
                let term = df(&shifted, j).scale(*w / mass);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a + term,
                });
            }
            acc.unwrap()
        }) as DerivFn
    });

    Ok(Potential {
        n,
        d: p.d(),
        eval: Arc::new(eval),
        derivative: deriv,
        gap_radius: p.gap_radius() + gamma,
        gap_c: p.gap_c() / 2.0,
        label: format!("mollify({}, {})", p.label(), gamma),
        generalized_witten: p.generalized_witten,
    })
}

/// Deterministic, reasonably uniform unit directions (spherical Fibonacci for
/// n = 3, normalized low-discrepancy lattice otherwise).
pub fn sample_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(count);
    if n == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        for i in 0..count {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            dirs.push(vec![rho * phi.cos(), rho * phi.sin(), z]);
        }
    } else {
        // Weyl lattice mapped through the inverse normal-ish transform
        let mut alpha = Vec::with_capacity(n);
        let mut p = 2.0f64;
        for _ in 0..n {
            alpha.push(p.sqrt().fract());
            p += 1.0;
        }
        for i in 0..count {
            let mut v: Vec<f64> = (0..n)
                .map(|k| {
                    let u = ((i as f64 + 1.0) * alpha[k]).fract();
                    // crude symmetric transform to spread over the sphere
                    (2.0 * std::f64::consts::PI * u).sin() + 0.37 * (4.0 * std::f64::consts::PI * u).cos()
                })
                .collect();
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                v[0] = 1.0;
            } else {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            dirs.push(v);
        }
    }
    dirs
}

#[cfg(test)]
mod tests;
