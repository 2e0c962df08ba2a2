//! Ground states of `-Δ + kR` on rotationally symmetric closed spheres.
//!
//! The radial operator is symmetrized as `M^{-1/2}(K + kRM)M^{-1/2}` with `K` the
//! flux (stiffness) matrix and `M` the diagonal cell masses of
//! [`RadialOperator`]. The smallest eigenvalue is bracketed by Sturm bisection
//! and refined by shifted inverse iteration from an all-ones start.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{ensure, Error, Result};
use crate::geomcore::{conformal_transform, scalar_curvature, RadialOperator, WarpedMetric};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda1: f64,
    pub k: f64,
    /// Positive, `∫ u² dμ = 1`.
    pub eigenfunction: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub in_strict: bool,
    pub in_weak: bool,
    pub lambda1: f64,
}

impl MembershipVerdict {
    pub fn new(lambda1: f64, tol: f64) -> Self {
        MembershipVerdict { in_strict: lambda1 > tol, in_weak: lambda1 >= -tol, lambda1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletBounds {
    pub lambda1: f64,
    pub dirichlet_lambda1: f64,
    pub upper_bound: f64,
    /// `λ₁ ≤ λ₁^Dir ≤ upper_bound`, up to the eigen-residual.
    pub holds: bool,
}

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e`.
struct Tridiag {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiag {
    fn sturm_count(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let off = if i == 0 { 0.0 } else { self.e[i - 1] * self.e[i - 1] / q };
            q = self.d[i] - x - off;
            if q == 0.0 {
                q = -f64::EPSILON * (self.d[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    fn norm_inf(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn smallest_bisect(&self) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve `(T - σ) y = b` by LDLᵀ; `σ` must lie below the spectrum.
    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut diag = vec![0.0; n];
        let mut y = b.to_vec();
        diag[0] = self.d[0] - sigma;
        for i in 1..n {
            let l = self.e[i - 1] / diag[i - 1];
            diag[i] = self.d[i] - sigma - l * self.e[i - 1];
            y[i] -= l * y[i - 1];
        }
        y[n - 1] /= diag[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (y[i] - self.e[i] * y[i + 1]) / diag[i];
        }
        y
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        (0..n)
            .map(|i| {
                let mut s = self.d[i] * v[i];
                if i > 0 {
                    s += self.e[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.e[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Ground state of `-Δ + V` restricted to nodes `lo..=hi`; nodes outside are
/// Dirichlet zeros, ends of the grid inside the range stay natural (Neumann).
/// Returns `(λ, u, residual)` with `u` on the full grid, `∫u² dμ = 1`, `u ≥ 0`.
fn ground_state(
    op: &RadialOperator,
    potential: &[f64],
    lo: usize,
    hi: usize,
    tol: &Tolerances,
) -> Result<(f64, Vec<f64>, f64)> {
    let n = op.len();
    let h = op.h;
    let len = hi - lo + 1;
    let mut d = Vec::with_capacity(len);
    let mut e = Vec::with_capacity(len.saturating_sub(1));
    for i in lo..=hi {
        let left = if i > 0 { op.flux[i - 1] } else { 0.0 };
        let right = if i + 1 < n { op.flux[i] } else { 0.0 };
        d.push((left + right) / (h * op.mass[i]) + potential[i]);
        if i < hi {
            e.push(-op.flux[i] / (h * (op.mass[i] * op.mass[i + 1]).sqrt()));
        }
    }
    let t = Tridiag { d, e };
    let norm = t.norm_inf().max(1.0);
    let lb = t.smallest_bisect();
    let shift = lb - (1e-6 * (1.0 + lb.abs())).max(1e3 * f64::EPSILON * norm);
    let mut v = vec![1.0 / (len as f64).sqrt(); len];
    let mut converged = false;
    for _ in 0..tol.max_iter() {
        let mut y = t.solve_shifted(shift, &v);
        let s: f64 = y.iter().sum();
        let nrm = y.iter().map(|x| x * x).sum::<f64>().sqrt() * s.signum();
        y.iter_mut().for_each(|x| *x /= nrm);
        let change = y.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = y;
        if change < 1e-14 {
            converged = true;
            break;
        }
    }
    // Rayleigh quotient in the energy form (no cancellation).
    let mut u = vec![0.0; n];
    for (k, i) in (lo..=hi).enumerate() {
        u[i] = v[k] / op.mass[i].sqrt();
    }
    let mut num = 0.0;
    for i in lo.saturating_sub(1)..hi.min(n - 2) + 1 {
        let du = u[i + 1] - u[i];
        num += op.flux[i] * du * du / h;
    }
    let mut den = 0.0;
    for i in lo..=hi {
        num += op.mass[i] * potential[i] * u[i] * u[i];
        den += op.mass[i] * u[i] * u[i];
    }
    let lambda = num / den;
    let tv = t.apply(&v);
    let residual = tv
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
        / norm;
    if !converged && residual > tol.eigen_residual {
        return Err(Error::nonconvergence(format!(
            "inverse iteration did not converge after {} iterations (residual {residual:e})",
            tol.max_iter()
        )));
    }
    if residual > tol.eigen_residual {
        return Err(Error::nonconvergence(format!(
            "eigen-residual {residual:e} exceeds tolerance {:e}",
            tol.eigen_residual
        )));
    }
    if let Some(i) = (lo..=hi).find(|&i| !(u[i] > 0.0)) {
        return Err(Error::nonconvergence(format!(
            "principal eigenfunction is not positive at node {i}"
        )));
    }
    let scale = (op.sigma * den).sqrt();
    u.iter_mut().for_each(|x| *x /= scale);
    Ok((lambda, u, residual))
}

fn check_input(m: &WarpedMetric, k: f64) -> Result<()> {
    ensure!(m.is_closed(), "lambda1 requires a closed_sphere metric");
    ensure!(k > 0.0 && k.is_finite(), "coupling k must be positive (got {k})");
    m.validate()
}

pub fn lambda1(m: &WarpedMetric, k: f64) -> Result<SpectralResult> {
    lambda1_with(m, k, &Tolerances::default())
}

pub fn lambda1_with(m: &WarpedMetric, k: f64, tol: &Tolerances) -> Result<SpectralResult> {
    check_input(m, k)?;
    let r = scalar_curvature(m);
    lambda1_with_curvature(m, &r, k, tol)
}

/// Same as [`lambda1_with`] with the scalar curvature already computed.
pub fn lambda1_with_curvature(
    m: &WarpedMetric,
    r: &[f64],
    k: f64,
    tol: &Tolerances,
) -> Result<SpectralResult> {
    let op = RadialOperator::new(m);
    let v: Vec<f64> = r.iter().map(|r| k * r).collect();
    let (lambda1, eigenfunction, residual) = ground_state(&op, &v, 0, m.len() - 1, tol)?;
    Ok(SpectralResult { lambda1, k, eigenfunction, residual })
}

/// `(∫|∇f|² + kRf²) / ∫f²` with the same discretization as the solver.
pub fn rayleigh_quotient(m: &WarpedMetric, k: f64, f: &[f64]) -> f64 {
    let (num, den) = rayleigh_parts(m, k, f);
    num / den
}

/// Numerator and denominator of the Rayleigh quotient.
pub fn rayleigh_parts(m: &WarpedMetric, k: f64, f: &[f64]) -> (f64, f64) {
    let op = RadialOperator::new(m);
    let r = scalar_curvature(m);
    let pot: Vec<f64> = r.iter().zip(f).map(|(r, f)| k * r * f * f).collect();
    let sq: Vec<f64> = f.iter().map(|f| f * f).collect();
    (op.energy(f) + op.integral(&pot), op.integral(&sq))
}

pub fn membership(m: &WarpedMetric, k: f64) -> Result<MembershipVerdict> {
    let tol = Tolerances::default();
    let res = lambda1_with(m, k, &tol)?;
    Ok(MembershipVerdict::new(res.lambda1, tol.membership))
}

/// `(min R, ∫R dμ / vol)`.
pub fn curvature_sandwich(m: &WarpedMetric) -> (f64, f64) {
    let r = scalar_curvature(m);
    let op = RadialOperator::new(m);
    let min = r.iter().cloned().fold(f64::MAX, f64::min);
    (min, op.integral(&r) / op.volume())
}

/// Two-sided bound `λ₁(M) ≤ λ₁^Dir(X) ≤ λ₁(M) + ∫|∇η|²ψ² / ∫η²ψ²` for a
/// radial band `X = sub`. An endpoint of `sub` at or beyond a pole keeps that pole.
pub fn dirichlet_lambda1_bounds(
    m: &WarpedMetric,
    k: f64,
    sub: (f64, f64),
    cutoff: &[f64],
) -> Result<DirichletBounds> {
    check_input(m, k)?;
    let tol = Tolerances::default();
    let np = m.len();
    ensure!(cutoff.len() == np, "cutoff has {} samples, grid has {np}", cutoff.len());
    let g = m.grid;
    let eps = 1e-12 * g.h();
    let active: Vec<usize> = (0..np)
        .filter(|&i| {
            let x = g.x(i);
            let left_ok = if sub.0 <= g.a + eps { true } else { x > sub.0 + eps };
            let right_ok = if sub.1 >= g.b - eps { true } else { x < sub.1 - eps };
            left_ok && right_ok
        })
        .collect();
    ensure!(active.len() >= 3, "sub-interval has empty interior on this grid");
    let (lo, hi) = (active[0], *active.last().unwrap());
    if let Some(i) = (0..np).find(|&i| (i < lo || i > hi) && cutoff[i] != 0.0) {
        return Err(Error::validation(format!(
            "cutoff support violates sub: cutoff[{i}] = {} outside the band",
            cutoff[i]
        )));
    }
    let r = scalar_curvature(m);
    let op = RadialOperator::new(m);
    let pot: Vec<f64> = r.iter().map(|r| k * r).collect();
    let (l1, psi, res1) = ground_state(&op, &pot, 0, np - 1, &tol)?;
    let (ld, _, res2) = ground_state(&op, &pot, lo, hi, &tol)?;
    let mut grad = 0.0;
    for i in 0..np - 1 {
        let d = cutoff[i + 1] - cutoff[i];
        grad += op.flux[i] * psi[i] * psi[i + 1] * d * d / op.h;
    }
    let mass: f64 = (0..np).map(|i| op.mass[i] * (cutoff[i] * psi[i]).powi(2)).sum();
    ensure!(mass > 0.0, "cutoff vanishes identically");
    let upper = l1 + grad / mass;
    let slack = 1e3 * (res1 + res2).max(f64::EPSILON) * (1.0 + upper.abs());
    Ok(DirichletBounds {
        lambda1: l1,
        dirichlet_lambda1: ld,
        upper_bound: upper,
        holds: l1 <= ld + slack && ld <= upper + slack,
    })
}

/// Conformal change by the principal eigenfunction at the conformal coupling
/// `k = (n-2)/(4(n-1))`; the new scalar curvature is `λ₁ u^{-4/(n-2)} / k`.
pub fn conformal_sign_check(m: &WarpedMetric) -> Result<(MembershipVerdict, Vec<f64>)> {
    let n = m.dim();
    ensure!(n >= 3, "conformal_sign_check needs n >= 3");
    let tol = Tolerances::default();
    let k = (n as f64 - 2.0) / (4.0 * (n as f64 - 1.0));
    check_input(m, k)?;
    let r = scalar_curvature(m);
    let res = lambda1_with_curvature(m, &r, k, &tol)?;
    let op = RadialOperator::new(m);
    let u = &res.eigenfunction;
    let lu = op.apply(u);
    let zeros = vec![0.0; u.len()];
    let (rbar, _) = conformal_transform(&r, u, &lu, n, &zeros, &zeros)?;
    let verdict = MembershipVerdict::new(res.lambda1, tol.membership);
    let min = rbar.iter().cloned().fold(f64::MAX, f64::min);
    let max = rbar.iter().cloned().fold(f64::MIN, f64::max);
    let consistent = if verdict.in_strict {
        min > 0.0
    } else if !verdict.in_weak {
        max < 0.0
    } else {
        min <= tol.membership.sqrt() && max >= -tol.membership.sqrt()
    };
    if !consistent {
        return Err(Error::nonconvergence(format!(
            "conformal sign mismatch: lambda1 = {}, min Rbar = {min}",
            res.lambda1
        )));
    }
    Ok((verdict, rbar))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_spheres_have_constant_ground_state() {
        for n in 2..=4 {
            let g = WarpedMetric::round_sphere(n, 2.0, 257).unwrap();
            let r = lambda1(&g, 0.5).unwrap();
            let exact = 0.5 * (n * (n - 1)) as f64 / 4.0;
            assert!((r.lambda1 - exact).abs() < 1e-8, "n={n}: {}", r.lambda1);
            let (lo, hi) = r.eigenfunction.iter().fold((f64::MAX, 0.0f64), |(a, b), u| (a.min(*u), b.max(*u)));
            assert!(hi - lo < 1e-7 * hi, "n={n}: spread {:e}", (hi - lo) / hi);
        }
    }

    #[test]
    fn nonpositive_coupling_is_refused() {
        let g = crate::profiles::bumpy(2, &[0.2, -0.1], 513).unwrap();
        assert!(lambda1(&g, 0.0).is_err());
        assert!(lambda1(&g, -1.0).is_err());
    }

    #[test]
    fn membership_bands() {
        let v = MembershipVerdict::new(-1e-10, 1e-8);
        assert!(!v.in_strict && v.in_weak);
        let v = MembershipVerdict::new(1e-6, 1e-8);
        assert!(v.in_strict && v.in_weak);
        let v = MembershipVerdict::new(-1e-6, 1e-8);
        assert!(!v.in_strict && !v.in_weak);
    }
}
