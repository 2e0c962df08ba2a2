//! Boundary-collar smoothing in the radial reduction: cutoffs, C-normal
//! deformation, prescribed second fundamental form, and the harmonic/torsion
//! barriers on annular bands.
//!
//! A collar here is `h = dt² + w(t) g₀` near a boundary at `t = 0`, with `t`
//! increasing into the manifold. Second fundamental forms are scalar multiples
//! `s g₀` taken with respect to the outward normal `-∂_t`, so `s₀ = -½ w'(0)`
//! and the slice mean curvature is `H = -(m/2) w'/w` (`m` the slice dimension).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::geomcore::{scalar_curvature, MetricKind, WarpedMetric};
use crate::grid::RadialGrid;
use crate::stencil::{self, End};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffKind {
    LogCutoff { delta: f64, epsilon: f64 },
    Chi { eps1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub kind: CutoffKind,
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// Bound on `t |τ'(t)| |log δ|` for the log cutoff: the peak slope of the step.
pub const LOG_CUTOFF_C1: f64 = 2.0;
/// Bound on `|χ'|`.
pub const CHI_C0: f64 = 1.0;

/// `τ = S(log(ε/t) / log(1/δ))` with `S` the C^∞ step; `(τ, τ', τ'')`.
pub fn log_cutoff(delta: f64, epsilon: f64, t: f64) -> (f64, f64, f64) {
    if t <= delta * epsilon {
        return (1.0, 0.0, 0.0);
    }
    if t >= epsilon {
        return (0.0, 0.0, 0.0);
    }
    let ell = (1.0 / delta).ln();
    let l = (epsilon / t).ln() / ell;
    let l1 = -1.0 / (t * ell);
    let l2 = 1.0 / (t * t * ell);
    let (s, s1, s2) = stencil::smooth_step(l);
    (s, s1 * l1, s2 * l1 * l1 + s1 * l2)
}

/// The χ cutoff: `χ' = 1` up to `t₀`, then `χ''` ramps to `-K = -1.96/ε₁` until
/// `χ'` reaches `-q`, holds, and finally rises back to 0 on `[ε₁, √ε₁]`. `q` is
/// fixed by bisection so that `χ(√ε₁) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chi {
    pub eps1: f64,
    pub q: f64,
    t0: f64,
    ramp: f64,
    k: f64,
    tq: f64,
    tb: f64,
    te: f64,
    table: RadialGrid,
    chi: Vec<f64>,
    chi1: Vec<f64>,
}

const CHI_TABLE: usize = 1 << 15;

impl Chi {
    pub fn new(eps1: f64) -> Result<Self> {
        ensure!(eps1 > 0.0 && eps1 < 0.5, "eps1 must lie in (0, 1/2)");
        let t0 = 0.02 * eps1;
        let ramp = 0.02 * eps1;
        let k = 1.96 / eps1;
        let tb = eps1;
        let te = eps1.sqrt();
        let table = RadialGrid::new(0.0, te, CHI_TABLE + 1)?;
        let mut c = Chi { eps1, q: 0.0, t0, ramp, k, tq: 0.0, tb, te, table, chi: vec![], chi1: vec![] };
        let end_value = |c: &mut Chi, q: f64| -> f64 {
            c.set_q(q);
            c.integrate();
            c.chi[CHI_TABLE]
        };
        let (mut lo, mut hi) = (0.0, 0.85);
        ensure!(end_value(&mut c, hi) < 0.0, "chi construction failed for eps1 = {eps1}");
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if end_value(&mut c, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        end_value(&mut c, lo);
        Ok(c)
    }

    fn set_q(&mut self, q: f64) {
        self.q = q;
        self.tq = self.t0 + (1.0 + q) / self.k;
    }

    fn integrate(&mut self) {
        let h = self.table.h();
        let d2: Vec<f64> = self.table.xs().iter().map(|&t| self.second(t)).collect();
        let d1: Vec<f64> = stencil::cumulative(&d2, h, End::Open, End::Open).iter().map(|v| 1.0 + v).collect();
        self.chi = stencil::cumulative(&d1, h, End::Open, End::Open);
        self.chi1 = d1;
    }

    /// `χ''` in closed form.
    pub fn second(&self, t: f64) -> f64 {
        let (t0, r, k) = (self.t0, self.ramp, self.k);
        if t < t0 {
            0.0
        } else if t < t0 + r {
            -k * stencil::smoothstep5((t - t0) / r).0
        } else if t < self.tq {
            -k
        } else if t < self.tq + r {
            -k * (1.0 - stencil::smoothstep5((t - self.tq) / r).0)
        } else if t < self.tb {
            0.0
        } else if t < self.te {
            let w = self.te - self.tb;
            self.q * stencil::smoothstep5((t - self.tb) / w).1 / w
        } else {
            0.0
        }
    }

    /// `(χ, χ', χ'')` at `t ≥ 0`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        if t >= self.te {
            return (0.0, 0.0, 0.0);
        }
        if t <= self.t0 {
            return (t, 1.0, 0.0);
        }
        let h = self.table.h();
        // χ' ≤ 1 exactly since χ'' ≤ 0 before it first turns up; high-order
        // quadrature and interpolation overshoot by ~1e-12 just past t0
        (
            stencil::interp(0.0, h, &self.chi, t, 6),
            stencil::interp(0.0, h, &self.chi1, t, 6).min(1.0),
            self.second(t),
        )
    }

    pub fn support_end(&self) -> f64 {
        self.te
    }
}

pub fn build_cutoff(kind: CutoffKind, points: usize) -> Result<CutoffFunction> {
    match kind {
        CutoffKind::LogCutoff { delta, epsilon } => {
            ensure!(delta > 0.0 && delta < 0.25, "delta must lie in (0, 1/4)");
            ensure!(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
            let grid = RadialGrid::new(0.0, 1.5 * epsilon, points)?;
            let v: Vec<_> = grid.xs().iter().map(|&t| log_cutoff(delta, epsilon, t)).collect();
            Ok(CutoffFunction {
                kind,
                grid,
                values: v.iter().map(|v| v.0).collect(),
                d1: v.iter().map(|v| v.1).collect(),
                d2: v.iter().map(|v| v.2).collect(),
            })
        }
        CutoffKind::Chi { eps1 } => {
            let chi = Chi::new(eps1)?;
            let grid = RadialGrid::new(0.0, 1.25 * chi.support_end(), points)?;
            let v: Vec<_> = grid.xs().iter().map(|&t| chi.eval(t)).collect();
            Ok(CutoffFunction {
                kind,
                grid,
                values: v.iter().map(|v| v.0).collect(),
                d1: v.iter().map(|v| v.1).collect(),
                d2: v.iter().map(|v| v.2).collect(),
            })
        }
    }
}

/// Named pass/fail result of one invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
}

fn check(name: &str, pass: bool, value: f64) -> Check {
    Check { name: name.to_string(), pass, value }
}

impl CutoffFunction {
    /// Per-sample type invariants plus a finite-difference C² consistency check.
    pub fn checks(&self) -> Vec<Check> {
        let ts = self.grid.xs();
        let tol = 1e-12;
        let mut out = Vec::new();
        match self.kind {
            CutoffKind::LogCutoff { delta, epsilon } => {
                let inner = ts.iter().zip(&self.values).filter(|(t, _)| **t <= delta * epsilon);
                out.push(check("one_on_inner", inner.clone().all(|(_, v)| *v == 1.0), 0.0));
                let outer = ts.iter().zip(&self.values).filter(|(t, _)| **t >= epsilon);
                out.push(check("zero_beyond_epsilon", outer.clone().all(|(_, v)| *v == 0.0), 0.0));
                out.push(check("range", self.values.iter().all(|v| (0.0..=1.0).contains(v)), 0.0));
                let ell = delta.ln().abs();
                let b = ts.iter().zip(&self.d1).map(|(t, d)| t * d.abs() * ell).fold(0.0, f64::max);
                out.push(check("log_derivative_bound", b <= LOG_CUTOFF_C1 + 1e-9, b));
            }
            CutoffKind::Chi { eps1 } => {
                let root = eps1.sqrt();
                let near0 = ts.iter().zip(&self.values).filter(|(t, _)| **t <= 0.02 * eps1);
                out.push(check("identity_near_zero", near0.clone().all(|(t, v)| (t - v).abs() <= tol), 0.0));
                out.push(check(
                    "zero_beyond_root",
                    ts.iter().zip(&self.values).filter(|(t, _)| **t >= root).all(|(_, v)| *v == 0.0),
                    0.0,
                ));
                let vmin = self.values.iter().cloned().fold(f64::MAX, f64::min);
                let vmax = self.values.iter().cloned().fold(f64::MIN, f64::max);
                out.push(check("nonnegative", vmin >= -tol, vmin));
                out.push(check("max_half_eps1", vmax <= 0.5 * eps1 + tol, vmax));
                let d1max = self.d1.iter().cloned().fold(f64::MIN, f64::max);
                let d1abs = self.d1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                out.push(check("slope_at_most_one", d1max <= 1.0 + tol, d1max));
                out.push(check("slope_bounded", d1abs <= CHI_C0 + tol, d1abs));
                let window: Vec<f64> = ts.iter().zip(&self.d2).filter(|(t, _)| **t <= eps1).map(|(_, d)| *d).collect();
                let lo = window.iter().cloned().fold(f64::MAX, f64::min);
                let hi = window.iter().cloned().fold(f64::MIN, f64::max);
                out.push(check("concave_on_window", hi <= 0.0, hi));
                out.push(check("curvature_floor", lo >= -2.0 / eps1 * (1.0 + tol), lo));
            }
        }
        // C²: finite differences of the samples reproduce the stored derivatives.
        let h = self.grid.h();
        let fd1 = stencil::d1(&self.values, h, End::Open, End::Open);
        let fd2 = stencil::d1(&self.d1, h, End::Open, End::Open);
        let s1 = self.d1.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let s2 = self.d2.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let e1 = fd1.iter().zip(&self.d1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / s1;
        let e2 = fd2.iter().zip(&self.d2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / s2;
        out.push(check("c2_consistent", e1.max(e2) <= 5e-2, e1.max(e2)));
        out
    }

    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }

    /// CSV `t,value,d1,d2`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value,d1,d2\n");
        for (i, t) in self.grid.xs().iter().enumerate() {
            let _ = writeln!(s, "{t:.16e},{:.16e},{:.16e},{:.16e}", self.values[i], self.d1[i], self.d2[i]);
        }
        s
    }
}

/// `h = dt² + w(t) g₀` on `t ∈ t_grid`, with `w` and two derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCollar {
    pub g0: WarpedMetric,
    pub t_grid: RadialGrid,
    pub w: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
}

impl RadialCollar {
    /// Derivatives of `w` by fourth-order differences.
    pub fn new(g0: WarpedMetric, t_grid: RadialGrid, w: Vec<f64>) -> Result<Self> {
        ensure!(w.len() == t_grid.points, "w has wrong length");
        let h = t_grid.h();
        let w1 = stencil::d1(&w, h, End::Open, End::Open);
        let w2 = stencil::d2(&w, h, End::Open, End::Open);
        Self::with_derivatives(g0, t_grid, w, w1, w2)
    }

    pub fn with_derivatives(g0: WarpedMetric, t_grid: RadialGrid, w: Vec<f64>, w1: Vec<f64>, w2: Vec<f64>) -> Result<Self> {
        ensure!(g0.is_closed(), "collar boundary must be a closed sphere");
        let n = t_grid.points;
        ensure!(w.len() == n && w1.len() == n && w2.len() == n, "collar arrays have wrong length");
        ensure!(w.iter().all(|v| *v > 0.0 && v.is_finite()), "w must stay positive");
        ensure!((w[0] - 1.0).abs() <= 1e-12, "w(0) must be 1 (the boundary metric is g0)");
        Ok(RadialCollar { g0, t_grid, w, w1, w2 })
    }

    /// `g_t ≡ g₀`.
    pub fn product(g0: WarpedMetric, length: f64, points: usize) -> Result<Self> {
        let t_grid = RadialGrid::new(0.0, length, points)?;
        Self::with_derivatives(g0, t_grid, vec![1.0; points], vec![0.0; points], vec![0.0; points])
    }

    /// Band of the mass-`mass` Schwarzschild foliation entered from the sphere of
    /// radius `x0`, moving inward (toward the horizon). The boundary is then
    /// mean-convex with respect to the outward normal `-∂_t`.
    pub fn schwarzschild_inward(mass: f64, x0: f64, length: f64, n: usize, points: usize, g0_points: usize) -> Result<Self> {
        let m = n as f64;
        let c = 2.0 * mass;
        let y = |x: f64| (1.0 - c * x.powi(1 - n as i32)).max(0.0).sqrt();
        ensure!(y(x0) > 0.0, "x0 must lie outside the horizon");
        let t_grid = RadialGrid::new(0.0, length, points)?;
        let sub = 16;
        let dt = t_grid.h() / sub as f64;
        let mut f = vec![x0];
        let mut x = x0;
        for _ in 1..points {
            for _ in 0..sub {
                let k1 = -y(x);
                let k2 = -y(x + 0.5 * dt * k1);
                let k3 = -y(x + 0.5 * dt * k2);
                let k4 = -y(x + dt * k3);
                x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            f.push(x);
        }
        ensure!(f.iter().all(|x| y(*x) > 0.0), "band reaches the horizon; shorten it");
        let x2 = x0 * x0;
        let w = f.iter().map(|f| f * f / x2).collect();
        let w1 = f.iter().map(|f| -2.0 * f * y(*f) / x2).collect();
        let w2 = f
            .iter()
            .map(|f| {
                let yy = y(*f);
                let f2 = (m - 1.0) * (1.0 - yy * yy) / (2.0 * f);
                2.0 * (yy * yy + f * f2) / x2
            })
            .collect();
        let g0 = WarpedMetric::round_sphere(n, x0, g0_points)?;
        Self::with_derivatives(g0, t_grid, w, w1, w2)
    }

    pub fn slice_dim(&self) -> usize {
        self.g0.n
    }

    /// `R_h(x_i, t_j)`; rows indexed by `t`.
    pub fn scalar_curvature(&self) -> Vec<Vec<f64>> {
        let r0 = scalar_curvature(&self.g0);
        (0..self.t_grid.points).map(|j| collar_scalar(&r0, self.slice_dim(), self.w[j], self.w1[j], self.w2[j])).collect()
    }

    /// Boundary second fundamental form scalar `s₀ = -½ w'(0)`.
    pub fn sff0(&self) -> f64 {
        -0.5 * self.w1[0]
    }

    /// Slice mean curvature `-(m/2) w'/w` (outward normal `-∂_t`).
    pub fn mean_curvature(&self) -> Vec<f64> {
        let m = self.slice_dim() as f64;
        self.w.iter().zip(&self.w1).map(|(w, w1)| -0.5 * m * w1 / w).collect()
    }
}

/// `R = R₀/w - m w''/w + m(3-m)/4 (w'/w)²` for `dt² + w g₀`.
pub fn collar_scalar(r0: &[f64], m: usize, w: f64, w1: f64, w2: f64) -> Vec<f64> {
    let mf = m as f64;
    let t = -mf * w2 / w + 0.25 * mf * (3.0 - mf) * (w1 / w).powi(2);
    r0.iter().map(|r| r / w + t).collect()
}

/// `g₀ + t g₁ - C t² g₀` with `g₁ = -2 sff₀`, i.e. `w = 1 - 2 s₀ t - C t²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CNormalCollar {
    pub g0: WarpedMetric,
    pub sff0: f64,
    pub c: f64,
    pub t_range: RadialGrid,
}

impl CNormalCollar {
    pub fn w(&self, t: f64) -> (f64, f64, f64) {
        (1.0 - 2.0 * self.sff0 * t - self.c * t * t, -2.0 * self.sff0 - 2.0 * self.c * t, -2.0 * self.c)
    }

    pub fn to_radial(&self) -> Result<RadialCollar> {
        let v: Vec<_> = self.t_range.xs().iter().map(|&t| self.w(t)).collect();
        RadialCollar::with_derivatives(
            self.g0.clone(),
            self.t_range,
            v.iter().map(|v| v.0).collect(),
            v.iter().map(|v| v.1).collect(),
            v.iter().map(|v| v.2).collect(),
        )
    }

    /// Smooth gluing across the boundary: same `g₀`, same `C`, opposite `sff₀`.
    pub fn glues_with(&self, other: &CNormalCollar) -> bool {
        self.g0 == other.g0 && self.c == other.c && self.sff0 == -other.sff0
    }
}

/// Outcome of [`make_c_normal`] with its guarantees measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CNormalResult {
    pub cnormal: CNormalCollar,
    pub deformed: RadialCollar,
    pub c0: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// `ĝ = g` beyond the window, and the C¹ size of `ĝ - g`.
    pub unchanged_outside: bool,
    pub c1_deviation: f64,
    /// Boundary metric kept, and the boundary sff drift.
    pub boundary_metric_preserved: bool,
    pub boundary_sff_error: f64,
    /// `min (R̂ - R)` over the window.
    pub min_scalar_change: f64,
    /// `max |ŵ - w_C|` on `[0, δε]`.
    pub inner_cnormal_error: f64,
}

impl CNormalResult {
    pub fn checks(&self, eta: f64) -> Vec<Check> {
        vec![
            check("unchanged_outside_window", self.unchanged_outside, 0.0),
            check("c1_deviation", self.c1_deviation <= eta, self.c1_deviation),
            check("boundary_metric", self.boundary_metric_preserved, 0.0),
            check("boundary_sff", self.boundary_sff_error <= 1e-12, self.boundary_sff_error),
            check("scalar_floor", self.min_scalar_change >= -eta, self.min_scalar_change),
            check("inner_cnormal", self.inner_cnormal_error <= 1e-14, self.inner_cnormal_error),
        ]
    }
}

/// `C₀ = max(-tr g̈₀)/(2m) = -w''(0)/2`.
pub fn c_normal_threshold(collar: &RadialCollar) -> f64 {
    -0.5 * collar.w2[0]
}

/// Replace the collar by `ŵ = w + τ_{δ,ε}(t)(w_C - w)` where `w_C` is the
/// C-normal form with the same `w(0)`, `w'(0)`. `δ` starts at `delta` and is
/// squared until `R̂ ≥ R - η` on every sample.
pub fn make_c_normal(collar: &RadialCollar, c: f64, eta: f64, window: f64, delta: f64) -> Result<CNormalResult> {
    ensure!(eta > 0.0, "eta must be positive");
    ensure!(delta > 0.0 && delta < 0.25, "delta must lie in (0, 1/4)");
    let tg = collar.t_grid;
    ensure!(window > 0.0 && window < 1.0 && window <= tg.b, "window must lie in (0, min(1, collar length)]");
    let c0 = c_normal_threshold(collar);
    ensure!(c >= c0 - 1e-12, "C = {c} is below the threshold C0 = {c0}");
    let m = collar.slice_dim() as f64;
    let s0 = collar.sff0();
    let cn = CNormalCollar { g0: collar.g0.clone(), sff0: s0, c, t_range: tg };
    let r0 = scalar_curvature(&collar.g0);
    let r_old = collar.scalar_curvature();
    let ts = tg.xs();
    let mut d = delta;
    loop {
        let mut w = collar.w.clone();
        let mut w1 = collar.w1.clone();
        let mut w2 = collar.w2.clone();
        let mut min_change = f64::MAX;
        let mut inner: f64 = 0.0;
        let mut c1: f64 = 0.0;
        for (j, &t) in ts.iter().enumerate() {
            let (tau, tau1, tau2) = log_cutoff(d, window, t);
            if tau == 0.0 && tau1 == 0.0 {
                continue;
            }
            let (p, p1, p2) = cn.w(t);
            let (e, e1, e2) = (p - collar.w[j], p1 - collar.w1[j], p2 - collar.w2[j]);
            w[j] = collar.w[j] + tau * e;
            w1[j] = collar.w1[j] + tau1 * e + tau * e1;
            w2[j] = collar.w2[j] + tau2 * e + 2.0 * tau1 * e1 + tau * e2;
            let rn = collar_scalar(&r0, collar.slice_dim(), w[j], w1[j], w2[j]);
            for (a, b) in rn.iter().zip(&r_old[j]) {
                min_change = min_change.min(a - b);
            }
            c1 = c1.max(m.sqrt() * ((w[j] - collar.w[j]).abs() + (w1[j] - collar.w1[j]).abs()) / collar.w[j]);
            if t <= d * window {
                inner = inner.max((w[j] - p).abs());
            }
        }
        if min_change == f64::MAX {
            min_change = 0.0;
        }
        if min_change >= -eta {
            ensure!(
                c1 <= eta,
                "eta unattainable: C1 deviation {c1:e} exceeds eta = {eta:e} at window {window}; shrink the window"
            );
            let unchanged = ts.iter().enumerate().filter(|(_, t)| **t >= window).all(|(j, _)| w[j] == collar.w[j]);
            let deformed = RadialCollar::with_derivatives(collar.g0.clone(), tg, w, w1, w2)?;
            return Ok(CNormalResult {
                boundary_metric_preserved: deformed.w[0] == collar.w[0],
                boundary_sff_error: (deformed.w1[0] - collar.w1[0]).abs(),
                cnormal: cn,
                deformed,
                c0,
                delta: d,
                epsilon: window,
                unchanged_outside: unchanged,
                c1_deviation: c1,
                min_scalar_change: min_change,
                inner_cnormal_error: inner,
            });
        }
        if d < 1e-150 {
            return Err(Error::nonconvergence(format!(
                "eta unattainable: scalar curvature drops by {:e} even at delta = {d:e}",
                -min_change
            )));
        }
        d = d * d;
    }
}

/// Outcome of [`prescribe_sff`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescribedResult {
    pub collar: RadialCollar,
    pub k: f64,
    pub eps1: f64,
    /// `C⁰` size of `g̃ - ĝ`.
    pub c0_deviation: f64,
    pub boundary_metric_preserved: bool,
    /// `|s̃₀ - k|`.
    pub boundary_sff_error: f64,
    /// `min (R̃ - R̂)`.
    pub min_scalar_change: f64,
    /// `min (H̃_t - tr k)`.
    pub min_mean_curvature_excess: f64,
    /// `min (-½ tr_{g₀} ġ̃_t - tr k - m C t)` and how many samples fall in
    /// each branch of the sign of `χ'`.
    pub foliation_margin: f64,
    pub branch_counts: (usize, usize),
}

impl PrescribedResult {
    pub fn checks(&self, eta: f64) -> Vec<Check> {
        vec![
            check("c0_deviation", self.c0_deviation <= eta, self.c0_deviation),
            check("boundary_metric", self.boundary_metric_preserved, 0.0),
            check("boundary_sff", self.boundary_sff_error <= 1e-9, self.boundary_sff_error),
            check("scalar_floor", self.min_scalar_change >= -eta, self.min_scalar_change),
            check("mean_curvature_floor", self.min_mean_curvature_excess >= -eta, self.min_mean_curvature_excess),
            check("foliation_inequality", self.foliation_margin >= -1e-12, self.foliation_margin),
        ]
    }
}

/// `w̃ = 1 - 2 s₀ t + 2 χ(t)(s₀ - k) - C t²`: boundary sff becomes `k g₀`.
pub fn prescribe_sff(cnormal: &CNormalCollar, k: f64, eta: f64, eps1: f64) -> Result<PrescribedResult> {
    ensure!(eta > 0.0, "eta must be positive");
    let m = cnormal.g0.n as f64;
    let s0 = cnormal.sff0;
    ensure!(
        m * k <= m * s0 + 1e-12,
        "precondition violated: tr k = {} exceeds the boundary mean curvature {}",
        m * k,
        m * s0
    );
    ensure!(cnormal.c >= 0.0, "precondition violated: C = {} is below the threshold 0", cnormal.c);
    let mut bound: f64 = 0.5;
    if cnormal.c > 0.0 {
        bound = bound.min(cnormal.c.powi(-2));
    }
    ensure!(eps1 > 0.0 && eps1 < bound, "eps1 must lie in (0, min(1/2, C^-2)) = (0, {bound})");
    let chi = Chi::new(eps1)?;
    let tg = cnormal.t_range;
    ensure!(tg.a == 0.0 && tg.b >= chi.support_end(), "t-range must cover [0, sqrt(eps1)]");
    let r0 = scalar_curvature(&cnormal.g0);
    let ts = tg.xs();
    let n = ts.len();
    let (mut w, mut w1, mut w2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut c0dev: f64 = 0.0;
    let mut dr = f64::MAX;
    let mut hmin = f64::MAX;
    let mut fol = f64::MAX;
    let mut branches = (0, 0);
    for (j, &t) in ts.iter().enumerate() {
        let (p, p1, p2) = cnormal.w(t);
        let (x, x1, x2) = chi.eval(t);
        let d = s0 - k;
        w[j] = p + 2.0 * x * d;
        w1[j] = p1 + 2.0 * x1 * d;
        w2[j] = p2 + 2.0 * x2 * d;
        c0dev = c0dev.max(m.sqrt() * (w[j] - p).abs() / p);
        let rt = collar_scalar(&r0, cnormal.g0.n, w[j], w1[j], w2[j]);
        let rh = collar_scalar(&r0, cnormal.g0.n, p, p1, p2);
        for (a, b) in rt.iter().zip(&rh) {
            dr = dr.min(a - b);
        }
        hmin = hmin.min(-0.5 * m * w1[j] / w[j] - m * k);
        fol = fol.min(-0.5 * m * w1[j] - m * k - m * cnormal.c * t);
        if t < chi.support_end() {
            if x1 >= 0.0 {
                branches.0 += 1;
            } else {
                branches.1 += 1;
            }
        }
    }
    let collar = RadialCollar::with_derivatives(cnormal.g0.clone(), tg, w, w1, w2)?;
    Ok(PrescribedResult {
        boundary_metric_preserved: collar.w[0] == 1.0,
        boundary_sff_error: (collar.sff0() - k).abs(),
        collar,
        k,
        eps1,
        c0_deviation: c0dev,
        min_scalar_change: dr,
        min_mean_curvature_excess: hmin,
        foliation_margin: fol,
        branch_counts: branches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierMode {
    Harmonic,
    Torsion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub values: Vec<f64>,
    /// Derivative with respect to arclength.
    pub slope: Vec<f64>,
    /// Strict outward normal derivative signs at both ends (Hopf lemma).
    pub hopf: bool,
}

/// Radial solutions on an annular tube band: `Δφ = 0` with `φ = 0, 1` at the
/// inner and outer ends, or `Δζ = -1` with `ζ = 0` at both ends. Both are
/// quadratures of the measure-weighted equation `(p u')' = -D f`.
pub fn radial_conformal_barrier(annulus: &WarpedMetric, mode: BarrierMode) -> Result<Barrier> {
    ensure!(annulus.kind == MetricKind::Tube, "barrier needs an annular (tube) band");
    annulus.validate()?;
    let h = annulus.grid.h();
    let a = annulus.radial_coeff();
    let dens = annulus.density();
    let inv_p: Vec<f64> = dens.iter().zip(&a).map(|(d, a)| a * a / d).collect();
    let n = annulus.len();
    let (values, flux): (Vec<f64>, Vec<f64>) = match mode {
        BarrierMode::Harmonic => {
            let c = stencil::cumulative(&inv_p, h, End::Open, End::Open);
            let total = c[n - 1];
            ensure!(total > 0.0 && total.is_finite(), "degenerate band");
            let mut v: Vec<f64> = c.iter().map(|c| c / total).collect();
            v[n - 1] = 1.0;
            (v, vec![1.0 / total; n])
        }
        BarrierMode::Torsion => {
            let vol = stencil::cumulative(&dens, h, End::Open, End::Open);
            let a1 = stencil::cumulative(&inv_p, h, End::Open, End::Open);
            let vp: Vec<f64> = vol.iter().zip(&inv_p).map(|(v, q)| v * q).collect();
            let a2 = stencil::cumulative(&vp, h, End::Open, End::Open);
            let c = a2[n - 1] / a1[n - 1];
            let mut v: Vec<f64> = (0..n).map(|i| c * a1[i] - a2[i]).collect();
            v[n - 1] = 0.0;
            (v, vol.iter().map(|v| c - v).collect())
        }
    };
    // u_s = flux / (p a) = flux · a / D
    let slope: Vec<f64> = (0..n).map(|i| flux[i] * inv_p[i] / a[i]).collect();
    let hopf = match mode {
        BarrierMode::Harmonic => slope[0] > 0.0 && slope[n - 1] > 0.0,
        BarrierMode::Torsion => slope[0] > 0.0 && slope[n - 1] < 0.0,
    };
    Ok(Barrier { values, slope, hopf })
}
