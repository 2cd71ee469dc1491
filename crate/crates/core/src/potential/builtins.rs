//! The named example potentials.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::{counterexample, smooth_step, smooth_step_deriv, Potential};
use crate::clifford::{self, sigma2, sigma3};
use crate::linalg::{self, ComplexMatrix, C_I};
use crate::{Error, Result};

/// Free-form builtin parameters (stringly typed; parsed per builtin).
pub type Params = BTreeMap<String, String>;

fn get_usize(params: &Params, key: &str, default: usize) -> Result<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Parse(format!("parameter `{key}`: expected integer, got `{v}`"))),
    }
}

fn get_i64(params: &Params, key: &str, default: i64) -> Result<i64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Parse(format!("parameter `{key}`: expected integer, got `{v}`"))),
    }
}

/// Interior cap profile ρ: ρ(r) = r near 0, ρ(1) = 1, ρ′(1) = 0, identically
/// 1 for r ≥ 1, C^∞ and monotone. The index formula only reads |x| ≥ 1, so
/// the cap is inert there.
pub fn cap_profile(r: f64) -> f64 {
    if r >= 1.0 {
        return 1.0;
    }
    let s = smooth_step((r - 0.3) / 0.7);
    r + s * (1.0 - r)
}

/// Derivative of [`cap_profile`].
pub fn cap_profile_deriv(r: f64) -> f64 {
    if r >= 1.0 {
        return 0.0;
    }
    let t = (r - 0.3) / 0.7;
    1.0 + smooth_step_deriv(t) / 0.7 * (1.0 - r) - smooth_step(t)
}

/// Hedgehog Φ(x) = ρ(|x|) Σ_j γ_{j,n} x_j/|x| in odd dimension n (Pauli
/// matrices for n = 3), with the smooth interior cap ρ.
fn hedgehog(n: usize) -> Result<Potential> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::Domain(format!("hedgehog needs odd n >= 3, got {n}")));
    }
    let alg = clifford::build_algebra(n)?;
    let d = alg.dim();
    let alg_eval = alg.clone();
    let eval = move |x: &[f64]| -> ComplexMatrix {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut m = linalg::zeros(alg_eval.dim(), alg_eval.dim());
        if r <= 0.3 {
            // cap is exactly linear here: Φ = Σ γ_j x_j
            for (j, g) in alg_eval.gammas().iter().enumerate() {
                m += g.scale(x[j]);
            }
            return m;
        }
        let q = cap_profile(r) / r;
        for (j, g) in alg_eval.gammas().iter().enumerate() {
            m += g.scale(q * x[j]);
        }
        m
    };
    let alg_deriv = alg.clone();
    let deriv = move |x: &[f64], k: usize| -> ComplexMatrix {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= 0.3 {
            return alg_deriv.gamma(k + 1).clone();
        }
        // Φ = q(r) Σ γ_j x_j with q = ρ(r)/r:
        // ∂_k Φ = Σ_j γ_j (δ_{kj} q + x_j x_k q'(r)/r)
        let q = cap_profile(r) / r;
        let qp = (cap_profile_deriv(r) * r - cap_profile(r)) / (r * r);
        let mut m = linalg::zeros(alg_deriv.dim(), alg_deriv.dim());
        for (j, g) in alg_deriv.gammas().iter().enumerate() {
            let coeff = if j == k { q } else { 0.0 } + x[j] * x[k] * qp / r;
            m += g.scale(coeff);
        }
        m
    };
    Ok(Potential {
        n,
        d,
        eval: Arc::new(eval),
        derivative: Some(Arc::new(deriv)),
        gap_radius: 1.0,
        gap_c: 1.0,
        label: format!("hedgehog(n={n})"),
        generalized_witten: false,
    })
}

/// Constant Hermitian-unitary potential (σ₃ ⊗ I by default).
fn constant_unitary(n: usize, d: usize) -> Result<Potential> {
    if d % 2 != 0 && d != 1 {
        return Err(Error::Domain(format!("constant potential size must be 1 or even, got {d}")));
    }
    let m = if d == 1 {
        linalg::identity(1)
    } else {
        sigma3().kronecker(&linalg::identity(d / 2))
    };
    let value = m.clone();
    let dm = d;
    Ok(Potential {
        n,
        d,
        eval: Arc::new(move |_x: &[f64]| value.clone()),
        derivative: Some(Arc::new(move |_x: &[f64], _j: usize| linalg::zeros(dm, dm))),
        gap_radius: 0.0,
        gap_c: 1.0,
        label: format!("constant_unitary(n={n}, d={d})"),
        generalized_witten: false,
    })
}

/// Everywhere-unitary potential U(x) = cos(2ψ)σ₃ + sin(2ψ)σ₂ with
/// ψ(x) = π e^{−|x|²/4}: a smooth rotation of the constant σ₃, with
/// exponentially decaying derivatives. Its index vanishes.
fn rotated_constant(n: usize) -> Result<Potential> {
    let psi = |r2: f64| std::f64::consts::PI * (-r2 / 4.0).exp();
    let eval = move |x: &[f64]| -> ComplexMatrix {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let a = 2.0 * psi(r2);
        sigma3().scale(a.cos()) + sigma2().scale(a.sin())
    };
    let deriv = move |x: &[f64], j: usize| -> ComplexMatrix {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let a = 2.0 * psi(r2);
        // da/dx_j = 2 ψ'(r²)·2x_j with ψ' = −ψ/4
        let da = -psi(r2) * x[j];
        (sigma3().scale(-a.sin()) + sigma2().scale(a.cos())).scale(da)
    };
    Ok(Potential {
        n,
        d: 2,
        eval: Arc::new(eval),
        derivative: Some(Arc::new(deriv)),
        gap_radius: 0.0,
        gap_c: 1.0,
        label: format!("rotated_constant(n={n})"),
        generalized_witten: false,
    })
}

/// Winding-m hedgehog on ℝ³ (experimental): the unit field
/// (sinθ cos mφ, sinθ sin mφ, cosθ)·σ, capped inside the unit ball.
/// Smooth away from the x₃-axis; derivatives fall back to finite differences.
fn winding_m(m: i64) -> Result<Potential> {
    let eval = move |x: &[f64]| -> ComplexMatrix {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < 1e-14 {
            return linalg::zeros(2, 2);
        }
        let rho2 = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let cos_t = x[2] / r;
        let sin_t = rho2 / r;
        let (cos_mphi, sin_mphi) = if rho2 < 1e-14 {
            (1.0, 0.0)
        } else {
            let phi = x[1].atan2(x[0]);
            ((m as f64 * phi).cos(), (m as f64 * phi).sin())
        };
        let nvec = [sin_t * cos_mphi, sin_t * sin_mphi, cos_t];
        let cap = cap_profile(r);
        let s1 = clifford::sigma1();
        (s1.scale(nvec[0]) + sigma2().scale(nvec[1]) + sigma3().scale(nvec[2])).scale(cap)
    };
    Ok(Potential {
        n: 3,
        d: 2,
        eval: Arc::new(eval),
        derivative: None,
        gap_radius: 1.0,
        gap_c: 1.0,
        label: format!("winding_m(m={m})"),
        generalized_witten: false,
    })
}

/// Block embedding diag(0_ℓ, Φ_base): the zero block makes the operator
/// non-Fredholm while the surface formula still computes the generalized
/// Witten index of the base.
pub fn block_embed(base: &Potential, l: usize) -> Result<Potential> {
    if l == 0 {
        return Err(Error::Domain("block embedding needs l >= 1".into()));
    }
    let d = base.d() + l;
    let base_eval = base.eval.clone();
    let eval = move |x: &[f64]| -> ComplexMatrix {
        let inner = base_eval(x);
        let mut m = linalg::zeros(l + inner.nrows(), l + inner.ncols());
        for i in 0..inner.nrows() {
            for j in 0..inner.ncols() {
                m[(l + i, l + j)] = inner[(i, j)];
            }
        }
        m
    };
    let deriv = base.derivative.clone().map(|df| {
        Arc::new(move |x: &[f64], j: usize| {
            let inner = df(x, j);
            let mut m = linalg::zeros(l + inner.nrows(), l + inner.ncols());
            for a in 0..inner.nrows() {
                for b in 0..inner.ncols() {
                    m[(l + a, l + b)] = inner[(a, b)];
                }
            }
            m
        }) as Arc<dyn Fn(&[f64], usize) -> ComplexMatrix + Send + Sync>
    });
    Ok(Potential {
        n: base.n(),
        d,
        eval: Arc::new(eval),
        derivative: deriv,
        gap_radius: base.gap_radius(),
        gap_c: base.gap_c(),
        label: format!("block_embed({}, l={l})", base.label()),
        generalized_witten: true,
    })
}

/// Linear potential Φ(x) = Σ_j A_j x_j whose ε-weighted derivative trace at
/// any point is exactly 24i: A₁ = [[1,2],[2,1]], A₂ = [[1,2],[2,−1]],
/// A₃ = [[0,i],[−i,0]].
fn local_24i() -> Potential {
    let a1 = linalg::from_rows_re(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    let a2 = linalg::from_rows_re(2, 2, &[1.0, 2.0, 2.0, -1.0]);
    let a3 = linalg::from_rows(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            C_I,
            -C_I,
            Complex64::new(0.0, 0.0),
        ],
    );
    let mats = Arc::new([a1, a2, a3]);
    let me = mats.clone();
    let eval = move |x: &[f64]| -> ComplexMatrix {
        me[0].scale(x[0]) + me[1].scale(x[1]) + me[2].scale(x[2])
    };
    let md = mats.clone();
    let deriv = move |_x: &[f64], j: usize| -> ComplexMatrix { md[j].clone() };
    Potential {
        n: 3,
        d: 2,
        eval: Arc::new(eval),
        derivative: Some(Arc::new(deriv)),
        gap_radius: f64::INFINITY,
        gap_c: 1.0,
        label: "local_24i".into(),
        generalized_witten: false,
    }
}

/// Linear matrix potential Φ(x) = M₀ + Σ_j M_j x_j from explicit matrices.
pub fn linear_from_matrices(n: usize, mats: Vec<ComplexMatrix>) -> Result<Potential> {
    if mats.len() != n + 1 {
        return Err(Error::Dimension(format!(
            "linear potential needs {} matrices (constant + one per axis), got {}",
            n + 1,
            mats.len()
        )));
    }
    let d = mats[0].nrows();
    for m in &mats {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension("linear potential matrices must share one size".into()));
        }
    }
    let mats = Arc::new(mats);
    let me = mats.clone();
    let eval = move |x: &[f64]| -> ComplexMatrix {
        let mut acc = me[0].clone();
        for (j, xi) in x.iter().enumerate() {
            acc += me[j + 1].scale(*xi);
        }
        acc
    };
    let md = mats.clone();
    let deriv = move |_x: &[f64], j: usize| -> ComplexMatrix { md[j + 1].clone() };
    Ok(Potential {
        n,
        d,
        eval: Arc::new(eval),
        derivative: Some(Arc::new(deriv)),
        gap_radius: f64::INFINITY,
        gap_c: 1.0,
        label: "linear".into(),
        generalized_witten: false,
    })
}

/// Builds a named potential. Known names: `hedgehog`, `anti_hedgehog`,
/// `constant_unitary`, `rotated_constant`, `winding_m`, `block_embed`,
/// `appendix_b`, `local_24i`.
pub fn builtin(name: &str, params: &Params) -> Result<Potential> {
    match name {
        "hedgehog" => hedgehog(get_usize(params, "n", 3)?),
        "anti_hedgehog" => Ok(hedgehog(get_usize(params, "n", 3)?)?.negate()),
        "constant_unitary" | "constant" => {
            constant_unitary(get_usize(params, "n", 3)?, get_usize(params, "d", 2)?)
        }
        "rotated_constant" => rotated_constant(get_usize(params, "n", 3)?),
        "winding_m" | "winding" => winding_m(get_i64(params, "m", 2)?),
        "block_embed" | "block" => {
            let base_name = params
                .get("base")
                .map(String::as_str)
                .unwrap_or("hedgehog");
            if base_name == "block_embed" || base_name == "block" {
                return Err(Error::Domain("block embeddings do not nest".into()));
            }
            let base = builtin(base_name, params)?;
            block_embed(&base, get_usize(params, "l", 1)?)
        }
        "appendix_b" => counterexample::appendix_b_potential(get_usize(params, "kmax", 40)?),
        "local_24i" => Ok(local_24i()),
        other => Err(Error::Domain(format!("unknown builtin potential `{other}`"))),
    }
}
