use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use super::*;
use crate::clifford::{self, sigma1, sigma2, sigma3};
use crate::linalg::{max_diff, max_norm};

fn params() -> Params {
    Params::new()
}

fn with(entries: &[(&str, &str)]) -> Params {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[test]
fn hedgehog_values() {
    let p = builtin("hedgehog", &params()).unwrap();
    // at (0,0,2) the field points along σ₃
    assert!(max_diff(&p.eval(&[0.0, 0.0, 2.0]), &sigma3()) < 1e-14);
    // unit sphere and beyond: Φ² = I
    for &r in &[1.0f64, 1.7, 4.0] {
        let x = [r / 3.0f64.sqrt(); 3];
        let m = p.eval(&x);
        assert!(max_diff(&(&m * &m), &linalg::identity(2)) < 1e-12);
    }
    // cap: exactly linear near the origin and continuous at 1
    assert!(max_diff(&p.eval(&[0.1, 0.0, 0.0]), &sigma1().scale(0.1)) < 1e-14);
}

#[test]
fn hedgehog_analytic_derivative_matches_fd() {
    let p = builtin("hedgehog", &params()).unwrap();
    for x in [[2.0, 0.0, 0.0], [0.8, -0.4, 0.6], [0.2, 0.1, -0.05], [1.2, 2.0, -0.7]] {
        for j in 0..3 {
            let pj = p.clone();
            let f = move |y: &[f64]| pj.eval(y);
            let fd = crate::matrixfn::fd_derivative(&f, &x, j, 1e-3);
            let an = p.derivative(&x, j);
            assert!(max_diff(&fd, &an) < 1e-8, "x={x:?} j={j}");
        }
    }
    // the classical formula at (2,0,0), direction 2
    assert!(max_diff(&p.derivative(&[2.0, 0.0, 0.0], 1), &sigma2().scale(0.5)) < 1e-14);
}

#[test]
fn builtins_are_hermitian_at_random_points() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let names: &[(&str, Params)] = &[
        ("hedgehog", params()),
        ("anti_hedgehog", params()),
        ("constant_unitary", params()),
        ("rotated_constant", params()),
        ("winding_m", with(&[("m", "2")])),
        ("block_embed", with(&[("base", "hedgehog"), ("l", "2")])),
        ("appendix_b", with(&[("kmax", "12")])),
        ("local_24i", params()),
    ];
    for (name, pars) in names {
        let p = builtin(name, pars).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..p.n()).map(|_| 8.0 * (rng.gen::<f64>() - 0.5)).collect();
            let m = p.eval(&x);
            assert!(
                linalg::hermiticity_defect(&m) < 1e-10 * (1.0 + max_norm(&m)),
                "{name} at {x:?}"
            );
        }
    }
}

#[test]
fn constant_and_rotated_are_unitary_everywhere() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    for name in ["constant_unitary", "rotated_constant"] {
        let p = builtin(name, &params()).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| 6.0 * (rng.gen::<f64>() - 0.5)).collect();
            let m = p.eval(&x);
            assert!(max_diff(&(&m * &m), &linalg::identity(p.d())) < 1e-12, "{name}");
        }
    }
}

#[test]
fn rotated_constant_derivative_matches_fd() {
    let p = builtin("rotated_constant", &params()).unwrap();
    for x in [[0.5, -0.3, 0.8], [1.5, 0.2, -2.0]] {
        for j in 0..3 {
            let pj = p.clone();
            let f = move |y: &[f64]| pj.eval(y);
            let fd = crate::matrixfn::fd_derivative(&f, &x, j, 1e-3);
            assert!(max_diff(&fd, &p.derivative(&x, j)) < 1e-9);
        }
    }
}

#[test]
fn block_embed_shape() {
    let p = builtin("block_embed", &with(&[("base", "hedgehog"), ("l", "1")])).unwrap();
    assert_eq!(p.d(), 3);
    assert!(p.is_generalized_witten());
    let m = p.eval(&[0.0, 0.0, 2.0]);
    // upper-left 1×1 zero block, σ₃ in the lower-right block
    assert_eq!(m[(0, 0)], Complex64::new(0.0, 0.0));
    assert_eq!(m[(0, 1)], Complex64::new(0.0, 0.0));
    assert_eq!(m[(1, 1)], Complex64::new(1.0, 0.0));
    assert_eq!(m[(2, 2)], Complex64::new(-1.0, 0.0));
}

#[test]
fn local_24i_epsilon_trace() {
    // Σ ε tr(∂Φ ∂Φ ∂Φ) = 24i exactly at any point (the derivatives are constant)
    let p = builtin("local_24i", &params()).unwrap();
    let x = [0.7, -0.2, 1.1];
    let d: Vec<ComplexMatrix> = (0..3).map(|j| p.derivative(&x, j)).collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for (perm, sign) in clifford::signed_permutations(3) {
        let prod = &d[perm[0] - 1] * &d[perm[1] - 1] * &d[perm[2] - 1];
        sum += linalg::trace(&prod) * (sign as f64);
    }
    assert!((sum - Complex64::new(0.0, 24.0)).norm() < 1e-12, "sum = {sum}");
}

#[test]
fn hedgehog_epsilon_trace_vanishes_outside_unit_ball() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
    let p = builtin("hedgehog", &params()).unwrap();
    for _ in 0..100 {
        let dir: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() - 0.5).collect();
        let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = 1.0 + 4.0 * rng.gen::<f64>();
        let x: Vec<f64> = dir.iter().map(|v| v * r / norm).collect();
        let d: Vec<ComplexMatrix> = (0..3).map(|j| p.derivative(&x, j)).collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for (perm, sign) in clifford::signed_permutations(3) {
            let prod = &d[perm[0] - 1] * &d[perm[1] - 1] * &d[perm[2] - 1];
            sum += linalg::trace(&prod) * (sign as f64);
        }
        assert!(sum.norm() < 1e-9, "x={x:?}, sum={sum}");
    }
}

#[test]
fn classification_table() {
    let radii = classify::default_radii(12);
    let hedgehog = builtin("hedgehog", &params()).unwrap();
    let rep = classify(&hedgehog, &radii, 1e-8).unwrap();
    assert_eq!(rep.class, AdmissibilityClass::CalliasAdmissible, "{rep:?}");
    assert!(rep.epsilon >= 1.0, "eps = {}", rep.epsilon);
    assert!(rep.scalar_square);

    let constant = builtin("constant_unitary", &params()).unwrap();
    let rep = classify(&constant, &radii, 1e-8).unwrap();
    assert_eq!(rep.class, AdmissibilityClass::Admissible);
    for (_, k) in &rep.kappa {
        assert!(*k < 1e-8, "constant potential has zero derivative bounds");
    }

    let rotated = builtin("rotated_constant", &params()).unwrap();
    let rep = classify(&rotated, &radii, 1e-8).unwrap();
    assert_eq!(rep.class, AdmissibilityClass::Admissible);

    let appb = builtin("appendix_b", &with(&[("kmax", "14")])).unwrap();
    let rep = classify(&appb, &radii, 1e-8).unwrap();
    assert_eq!(rep.class, AdmissibilityClass::GeneralC2, "{rep:?}");
    assert!(rep.epsilon > 0.5);
    assert!(rep.scalar_square);
}

#[test]
fn smoothed_sign_of_hedgehog_is_hedgehog_outside() {
    let p = builtin("hedgehog", &params()).unwrap();
    let u = smoothed_sign(&p, 1.0).unwrap();
    for x in [[1.0, 0.2, 0.3], [0.0, 0.0, 2.0], [-1.5, 1.0, 0.4]] {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r >= 1.0 {
            assert!(max_diff(&u.eval(&x), &p.eval(&x)) < 1e-10, "x={x:?}");
        }
    }
    // scaling the base does not change the sign
    let p3 = p.scale(3.0);
    let u3 = smoothed_sign(&p3, 1.0).unwrap();
    assert!(max_diff(&u3.eval(&[0.0, 0.0, 2.0]), &sigma3()) < 1e-10);
}

#[test]
fn smoothed_sign_square_is_scalar() {
    let p = builtin("hedgehog", &params()).unwrap();
    let tau = 1.0;
    let u = smoothed_sign(&p, tau).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
    for _ in 0..60 {
        let x: Vec<f64> = (0..3).map(|_| 5.0 * (rng.gen::<f64>() - 0.5)).collect();
        let m = u.eval(&x);
        let m2 = &m * &m;
        // U² = u·I: off-diagonal vanishes, diagonal is one scalar
        let mean = (m2[(0, 0)] + m2[(1, 1)]).unscale(2.0);
        assert!(max_diff(&m2, &(linalg::identity(2) * mean)) < 1e-9, "x={x:?}");
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > tau {
            assert!((mean - Complex64::new(1.0, 0.0)).norm() < 1e-9, "u=1 outside tau, x={x:?}");
        }
    }
}

#[test]
fn smoothed_sign_pointwise_scalar_example() {
    // diag(2, −0.5)-type scalar field: sign is diag(1, −1) outside the gap radius
    let eval = |x: &[f64]| {
        let s = 1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt();
        linalg::from_rows_re(2, 2, &[2.0 * s, 0.0, 0.0, -0.5 * s])
    };
    let p = Potential::new(3, 2, eval, None, 0.5, 0.5, "diag-field");
    let u = smoothed_sign(&p, 0.5).unwrap();
    assert!(max_diff(&u.eval(&[2.0, 0.0, 0.0]), &sigma3()) < 1e-10);
}

#[test]
fn smoothed_sign_analytic_derivative_matches_fd() {
    let p = builtin("hedgehog", &params()).unwrap();
    let u = smoothed_sign(&p, 1.0).unwrap();
    assert!(u.has_analytic_derivative());
    for x in [[1.5, 0.3, -0.2], [0.9, 0.9, 0.9], [0.4, 0.1, 0.45]] {
        for j in 0..3 {
            let uj = u.clone();
            let f = move |y: &[f64]| uj.eval(y);
            let fd = crate::matrixfn::fd_derivative(&f, &x, j, 1e-4);
            let an = u.derivative(&x, j);
            assert!(max_diff(&fd, &an) < 1e-6, "x={x:?} j={j}: {:.3e}", max_diff(&fd, &an));
        }
    }
}

#[test]
fn mollify_preserves_constants_and_linearity() {
    let c = builtin("constant_unitary", &params()).unwrap();
    let cm = mollify(&c, 0.2, &Mollifier::standard_bump()).unwrap();
    assert!(max_diff(&cm.eval(&[0.4, 0.5, -0.6]), &c.eval(&[0.4, 0.5, -0.6])) < 1e-13);

    // linear entry x₁σ₁: symmetric bump ⇒ odd moments vanish
    let lin = Potential::new(
        3,
        2,
        |x: &[f64]| sigma1().scale(x[0]),
        None,
        f64::INFINITY,
        1.0,
        "linear-x1",
    );
    let lm = mollify(&lin, 0.3, &Mollifier::standard_bump()).unwrap();
    let x = [0.7, -0.1, 0.2];
    assert!(max_diff(&lm.eval(&x), &lin.eval(&x)) < 1e-13);
}

#[test]
fn mollify_tracks_hedgehog_with_derivative_bound() {
    let p = builtin("hedgehog", &params()).unwrap();
    let gamma = 0.1;
    let pm = mollify(&p, gamma, &Mollifier::standard_bump()).unwrap();
    let x = [5.0 / 3.0f64.sqrt(); 3];
    let diff = max_diff(&pm.eval(&x), &p.eval(&x));
    // ‖Φ − Φ_γ‖ ≤ γ sup_{B(0,γ)} ‖Φ'‖ with ‖∂Φ‖ ≤ 6/|y| near |x| = 5
    assert!(diff <= gamma * 6.0 / 4.9, "diff = {diff}");
    // Hermitian and gapped
    let m = pm.eval(&x);
    assert!(linalg::hermiticity_defect(&m) < 1e-12);
    let sd = crate::matrixfn::SpectralDecomposition::new(&m).unwrap();
    assert!(sd.min_abs_eigenvalue() >= p.gap_c() / 2.0);
}

#[test]
fn compose_chain_rule_derivative() {
    let p = builtin("hedgehog", &params()).unwrap();
    let rot = SmoothMap::plane_rotation(3, 0, 1, 0.7);
    let q = p.compose(&rot, "rotated hedgehog");
    for x in [[1.4, 0.2, 0.3], [0.5, -0.8, 1.1]] {
        for j in 0..3 {
            let qj = q.clone();
            let f = move |y: &[f64]| qj.eval(y);
            let fd = crate::matrixfn::fd_derivative(&f, &x, j, 1e-4);
            assert!(max_diff(&fd, &q.derivative(&x, j)) < 1e-8);
        }
    }
}

#[test]
fn inversion_map_jacobian() {
    let inv = SmoothMap::inversion(3);
    let x = [0.5, 0.25, -0.3];
    // T(T(x)) = x
    let y = inv.apply(&x);
    let z = inv.apply(&y);
    for (a, b) in x.iter().zip(&z) {
        assert!((a - b).abs() < 1e-14);
    }
    // Jacobian against finite differences
    let h = 1e-6;
    let jac = inv.jacobian(&x);
    for col in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[col] += h;
        xm[col] -= h;
        let yp = inv.apply(&xp);
        let ym = inv.apply(&xm);
        for row in 0..3 {
            let fd = (yp[row] - ym[row]) / (2.0 * h);
            assert!((jac[row * 3 + col] - fd).abs() < 1e-7);
        }
    }
    assert_eq!(inv.orientation(), -1);
    assert!(inv.det_jacobian(&x) < 0.0);
}

#[test]
fn builtin_rejects_unknown() {
    assert!(builtin("nonsense", &params()).is_err());
    assert!(builtin("hedgehog", &with(&[("n", "4")])).is_err());
}
