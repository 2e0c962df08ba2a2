//! Rotationally symmetric Ricci flow on `S³` with a `λ₁(-Δ + kR)` monitor.
//!
//! For `g = a² dx² + φ² g_{S²}` the flow `∂_t g = -2 Ric` reads
//! `∂_t a = 2 (φ_ss/φ) a` and `∂_t φ = φ_ss - (1 - φ_s²)/φ`. The profile is
//! evolved through `ψ = φ²`, for which the second equation becomes the regular
//! `∂_t ψ = ψ_ss - 2`; evolving `φ` directly is unstable at the poles, where the
//! linearized `(1 - φ_s²)/φ` acts as a `2/s²` potential.
//! Each step starts from arclength form; after the Heun update the profile is
//! re-sampled on a uniform arclength grid, which keeps `a ≡ 1` between steps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::geomcore::{scalar_curvature, RadialOperator, WarpedMetric};
use crate::grid::RadialGrid;
use crate::spectral::lambda1;
use crate::stencil::{self, End};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Coupling of the monitored operator.
    pub k: f64,
    /// Record state and `λ₁` every this many steps.
    pub monitor_every: usize,
    /// Stop once `max |R|` exceeds this.
    pub curvature_limit: f64,
    /// `dt ≤ cfl · h²`.
    pub cfl: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { k: 0.5, monitor_every: 10, curvature_limit: 1e6, cfl: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<WarpedMetric>,
    pub lambda1_series: Vec<f64>,
    pub volume_series: Vec<f64>,
    pub total_scalar_series: Vec<f64>,
    pub k: f64,
    /// Integration stopped early near a singularity.
    pub blowup: bool,
}

/// `(∂_t ψ, ∂_t a)` at every node, `ψ = φ²`.
fn rates(g: &WarpedMetric) -> (Vec<f64>, Vec<f64>) {
    let n = g.len();
    let h = g.grid.h();
    let a = g.radial_coeff();
    let psi: Vec<f64> = g.profile.iter().map(|p| p * p).collect();
    let px = stencil::d1(&psi, h, End::Even, End::Even);
    let pxx = stencil::d2(&psi, h, End::Even, End::Even);
    let ax = stencil::d1(&a, h, End::Even, End::Even);
    let (_, phi_ss) = g.arclength_derivatives();
    let mut ratio = vec![0.0; n];
    let mut dpsi = vec![0.0; n];
    for i in 0..n {
        dpsi[i] = (pxx[i] - px[i] * ax[i] / a[i]) / (a[i] * a[i]) - 2.0;
        if i > 0 && i < n - 1 {
            ratio[i] = phi_ss[i] / g.profile[i];
        }
    }
    dpsi[0] = 0.0;
    dpsi[n - 1] = 0.0;
    stencil::fill_pole_limits(&mut ratio, true, true);
    let da = ratio.iter().zip(&a).map(|(r, a)| 2.0 * r * a).collect();
    (dpsi, da)
}

fn advance(g: &WarpedMetric, dpsi: &[f64], da: &[f64], dt: f64) -> Result<WarpedMetric> {
    let a = g.radial_coeff();
    let mut out = g.clone();
    for (p, d) in out.profile.iter_mut().zip(dpsi) {
        let psi = *p * *p + dt * d;
        ensure!(psi >= 0.0, "profile collapsed");
        *p = psi.sqrt();
    }
    let a1: Vec<f64> = a.iter().zip(da).map(|(a, d)| a + dt * d).collect();
    let arc = stencil::cumulative(&a1, g.grid.h(), End::Even, End::Even);
    close_poles(&mut out.profile, &arc);
    out.radial = Some(a1);
    out.validate()?;
    Ok(out)
}

/// Resample on a uniform arclength grid, using the odd reflection of `φ` at
/// the poles so the interpolation stencils stay centered.
fn regrid(g: &WarpedMetric) -> Result<WarpedMetric> {
    let n = g.len();
    let a = g.radial_coeff();
    let s = stencil::cumulative(&a, g.grid.h(), End::Even, End::Even);
    let len = s[n - 1];
    let pad = 3;
    let mut xs = Vec::with_capacity(n + 2 * pad);
    let mut ys = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        xs.push(-s[i]);
        ys.push(-g.profile[i]);
    }
    xs.extend_from_slice(&s);
    ys.extend_from_slice(&g.profile);
    for i in 1..=pad {
        xs.push(2.0 * len - s[n - 1 - i]);
        ys.push(-g.profile[n - 1 - i]);
    }
    let grid = RadialGrid::new(0.0, len, n)?;
    let order = 6;
    let mut profile = vec![0.0; n];
    for (j, p) in profile.iter_mut().enumerate().take(n - 1).skip(1) {
        let x = grid.x(j);
        let k = xs.partition_point(|v| *v <= x);
        let i0 = k.saturating_sub(order / 2).min(xs.len() - order);
        let mut acc = 0.0;
        for r in i0..i0 + order {
            let mut w = 1.0;
            for q in i0..i0 + order {
                if q != r {
                    w *= (x - xs[q]) / (xs[r] - xs[q]);
                }
            }
            acc += w * ys[r];
        }
        *p = acc;
    }
    close_poles(&mut profile, &grid.xs());
    WarpedMetric::closed(3, grid, profile)
}

/// Smooth closure as an algebraic constraint: `v = (φ/s)²` is even with
/// `v(0) = 1`, so the node next to each pole is fixed by `v(0)`, `v(s₂)`,
/// `v(s₃)` (quadratic in `s²`). Applied at every stage, it keeps the scheme
/// second order. Without it the cone-angle mode `φ ≈ c s` grows like
/// `exp(2t/h²)`.
fn close_poles(p: &mut [f64], s: &[f64]) {
    let n = p.len();
    let fit = |u1: f64, u2: f64, u3: f64, v2: f64, v3: f64| {
        (u1 - u2) * (u1 - u3) / (u2 * u3) + v2 * u1 * (u1 - u3) / (u2 * (u2 - u3)) + v3 * u1 * (u1 - u2) / (u3 * (u3 - u2))
    };
    let l = s[n - 1];
    let d = |i: usize| if i < n / 2 { s[i] } else { l - s[i] };
    for (i1, i2, i3) in [(1, 2, 3), (n - 2, n - 3, n - 4)] {
        let (s1, s2, s3) = (d(i1), d(i2), d(i3));
        let v = fit(s1 * s1, s2 * s2, s3 * s3, (p[i2] / s2).powi(2), (p[i3] / s3).powi(2));
        p[i1] = s1 * v.sqrt();
    }
}

/// `∫ R dμ`.
pub fn total_scalar(g: &WarpedMetric) -> f64 {
    let r = scalar_curvature(g);
    RadialOperator::new(g).integral(&r)
}

pub fn evolve(initial: &WarpedMetric, dt: f64, t_end: f64) -> Result<FlowTrajectory> {
    evolve_with(initial, dt, t_end, &FlowOptions::default())
}

pub fn evolve_with(initial: &WarpedMetric, dt: f64, t_end: f64, opts: &FlowOptions) -> Result<FlowTrajectory> {
    ensure!(initial.is_closed() && initial.n == 3, "flow requires a closed S^3 metric");
    ensure!(dt > 0.0 && t_end > 0.0, "dt and T must be positive");
    ensure!(opts.monitor_every >= 1, "monitor_every must be at least 1");
    ensure!(opts.k > 0.0, "monitor coupling k must be positive");
    initial.check_closure(1e-3)?;
    let mut g = if initial.radial.is_some() { regrid(initial)? } else { initial.clone() };
    let mut traj = FlowTrajectory {
        times: vec![],
        states: vec![],
        lambda1_series: vec![],
        volume_series: vec![],
        total_scalar_series: vec![],
        k: opts.k,
        blowup: false,
    };
    let record = |traj: &mut FlowTrajectory, t: f64, g: &WarpedMetric| -> Result<()> {
        traj.times.push(t);
        traj.lambda1_series.push(lambda1(g, opts.k)?.lambda1);
        traj.volume_series.push(g.volume());
        traj.total_scalar_series.push(total_scalar(g));
        traj.states.push(g.clone());
        Ok(())
    };
    record(&mut traj, 0.0, &g)?;
    let mut t = 0.0;
    let mut step = 0usize;
    while t < t_end * (1.0 - 1e-14) {
        let h = g.grid.h();
        let limit = opts.cfl * h * h;
        let max_r = scalar_curvature(&g).iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if max_r > opts.curvature_limit || limit < 1e-14 {
            traj.blowup = true;
            break;
        }
        let tau = dt.min(limit).min(t_end - t);
        let stepped = (|| -> Result<WarpedMetric> {
            let (p1, a1) = rates(&g);
            let g1 = advance(&g, &p1, &a1, tau)?;
            let (p2, a2) = rates(&g1);
            let pm: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| 0.5 * (x + y)).collect();
            let am: Vec<f64> = a1.iter().zip(&a2).map(|(x, y)| 0.5 * (x + y)).collect();
            regrid(&advance(&g, &pm, &am, tau)?)
        })();
        match stepped {
            Ok(next) => g = next,
            Err(Error::Validation(_)) => {
                traj.blowup = true;
                break;
            }
            Err(e) => return Err(e),
        }
        t += tau;
        step += 1;
        if step.is_multiple_of(opts.monitor_every) || t >= t_end * (1.0 - 1e-14) {
            record(&mut traj, t, &g)?;
        }
    }
    if traj.blowup && *traj.times.last().unwrap() < t {
        record(&mut traj, t, &g)?;
    }
    Ok(traj)
}

/// Second-order derivative of samples `v` at nonuniform `ts` (interior only).
fn centered_rates(ts: &[f64], v: &[f64]) -> Vec<f64> {
    (1..ts.len() - 1)
        .map(|i| {
            let (h0, h1) = (ts[i] - ts[i - 1], ts[i + 1] - ts[i]);
            (-h1 / (h0 * (h0 + h1))) * v[i - 1] + ((h1 - h0) / (h0 * h1)) * v[i] + (h0 / (h1 * (h0 + h1))) * v[i + 1]
        })
        .collect()
}

/// Samples of `dλ₁/dt` at interior times. Requires `k ≥ ¼`.
pub fn monotonicity_report(traj: &FlowTrajectory, k: f64) -> Result<Vec<f64>> {
    ensure!(k >= 0.25, "monotonicity needs k >= 1/4 (got {k}); use monotonicity_report_unchecked to explore");
    monotonicity_report_unchecked(traj, k)
}

/// [`monotonicity_report`] without the coupling precondition.
pub fn monotonicity_report_unchecked(traj: &FlowTrajectory, k: f64) -> Result<Vec<f64>> {
    ensure!(traj.times.len() >= 3, "trajectory too short: {} samples, need 3", traj.times.len());
    let series = if k == traj.k {
        traj.lambda1_series.clone()
    } else {
        traj.states.iter().map(|g| lambda1(g, k).map(|r| r.lambda1)).collect::<Result<Vec<_>>>()?
    };
    Ok(centered_rates(&traj.times, &series))
}

/// Worst relative mismatch of `-dV/dt` against `∫R dμ` at interior samples.
pub fn volume_identity_error(traj: &FlowTrajectory) -> Result<f64> {
    ensure!(traj.times.len() >= 3, "trajectory too short");
    let dv = centered_rates(&traj.times, &traj.volume_series);
    Ok(dv
        .iter()
        .zip(&traj.total_scalar_series[1..])
        .map(|(d, r)| (-d - r).abs() / r.abs())
        .fold(0.0, f64::max))
}

impl FlowTrajectory {
    /// Rows `t, r_max, lambda1, volume` with `r_max = max φ`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,r_max,lambda1,volume\n");
        for i in 0..self.times.len() {
            let r = self.states[i].profile.iter().cloned().fold(0.0, f64::max);
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], r, self.lambda1_series[i], self.volume_series[i]
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_shrinks() {
        let g = WarpedMetric::round_sphere(3, 1.0, 129).unwrap();
        let tr = evolve(&g, 1e-3, 0.2).unwrap();
        assert!(!tr.blowup);
        let t = *tr.times.last().unwrap();
        let s = tr.states.last().unwrap();
        let r = s.grid.b / std::f64::consts::PI;
        assert!((r * r - (1.0 - 4.0 * t)).abs() < 1e-6, "{}", r * r - (1.0 - 4.0 * t));
    }
}
