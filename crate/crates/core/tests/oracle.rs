//! Independent check of the radial eigen-solver: a cosine-basis Galerkin
//! discretization with analytic curvature, solved densely.

use std::f64::consts::PI;

use horizonforge::profiles;
use horizonforge::spectral::lambda1;
use nalgebra::{DMatrix, SymmetricEigen};

/// Smallest eigenvalue of `-Δ + kR` on the dumbbell `φ = sin ρ (1 - a sin²ρ)`
/// over radial functions, from `modes` cosines and composite Simpson quadrature.
fn galerkin_lambda1(a: f64, k: f64, modes: usize) -> f64 {
    let phi = |r: f64| r.sin() * (1.0 - a * r.sin().powi(2));
    // φ'' of sin ρ - a sin³ρ
    let phi2 = |r: f64| -r.sin() - 3.0 * a * (2.0 * r.sin() * r.cos().powi(2) - r.sin().powi(3));
    let q = 20_000;
    let h = PI / q as f64;
    let mut stiff = DMatrix::<f64>::zeros(modes, modes);
    let mut mass = DMatrix::<f64>::zeros(modes, modes);
    for s in 0..=q {
        let r = s as f64 * h;
        let w = h / 3.0 * if s == 0 || s == q { 1.0 } else if s % 2 == 1 { 4.0 } else { 2.0 };
        let (p, p2) = (phi(r), phi2(r));
        let u: Vec<f64> = (0..modes).map(|j| (j as f64 * r).cos()).collect();
        let du: Vec<f64> = (0..modes).map(|j| -(j as f64) * (j as f64 * r).sin()).collect();
        for i in 0..modes {
            for j in 0..modes {
                // R φ = -2 φ'' keeps the integrand regular at the poles
                stiff[(i, j)] += w * (du[i] * du[j] * p - 2.0 * k * p2 * u[i] * u[j]);
                mass[(i, j)] += w * u[i] * u[j] * p;
            }
        }
    }
    let l = mass.cholesky().expect("mass matrix is positive definite").l();
    let li = l.clone().try_inverse().unwrap();
    let c = &li * stiff * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    SymmetricEigen::new(c).eigenvalues.iter().cloned().fold(f64::MAX, f64::min)
}

#[test]
fn dumbbell_matches_dense_galerkin() {
    for (a, k) in [(0.3, 0.5), (0.3, 1.0), (0.5, 0.5)] {
        let oracle = galerkin_lambda1(a, k, 40);
        let refined = galerkin_lambda1(a, k, 48);
        assert!((oracle - refined).abs() <= 1e-10 * oracle.abs(), "oracle not converged: {oracle} vs {refined}");
        let m = profiles::dumbbell(2, a, 8192).unwrap();
        let got = lambda1(&m, k).unwrap().lambda1;
        let rel = (got - oracle).abs() / oracle.abs();
        assert!(rel <= 1e-6, "a={a} k={k}: solver {got}, oracle {oracle}, rel {rel:e}");
    }
}

#[test]
fn round_sphere_oracle_is_exact() {
    // R = 2 on the unit sphere, so λ₁ = 2k
    let l = galerkin_lambda1(0.0, 0.75, 12);
    assert!((l - 1.5).abs() <= 1e-12, "{l}");
}
