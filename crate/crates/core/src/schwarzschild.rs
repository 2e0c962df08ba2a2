//! Phase-plane engine for round normal foliations `f(t)² g_{S^n} + dt²`.
//!
//! A foliation is stored as `y(x)` with `x = f` the radius and `y = f'`. The
//! orbit constant `C(x) = x^{n-1}(1 - y²)` carries everything: `R = n C'/x^n`,
//! the PSC margin is `C'/((n-1) x^{n-1} y)`, and Schwarzschild orbits are the
//! level sets of `C` with mass `C/2`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{ensure, Error, Result};
use crate::geomcore::{sphere_area, WarpedMetric};
use crate::grid::RadialGrid;
use crate::stencil;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildOrbit {
    pub c: f64,
    pub mass: f64,
    pub horizon_radius: Option<f64>,
    pub n: usize,
}

/// Orbit through `(x0, y0)`.
pub fn orbit(x0: f64, y0: f64, n: usize) -> Result<SchwarzschildOrbit> {
    ensure!(x0 > 0.0 && x0.is_finite(), "x0 must be positive");
    ensure!((0.0..1.0).contains(&y0) || y0 == 1.0, "y0 must lie in [0,1]");
    ensure!(n >= 2, "n must be at least 2");
    Ok(SchwarzschildOrbit::from_constant(x0.powi(n as i32 - 1) * (1.0 - y0 * y0), n))
}

impl SchwarzschildOrbit {
    pub fn from_constant(c: f64, n: usize) -> Self {
        SchwarzschildOrbit {
            c,
            mass: 0.5 * c,
            horizon_radius: (c > 0.0).then(|| c.powf(1.0 / (n as f64 - 1.0))),
            n,
        }
    }

    pub fn from_mass(mass: f64, n: usize) -> Self {
        Self::from_constant(2.0 * mass, n)
    }

    /// `y(x) = √(1 - C x^{1-n})`; `None` inside the horizon.
    pub fn y(&self, x: f64) -> Option<f64> {
        let w = 1.0 - self.c * x.powi(1 - self.n as i32);
        (w >= 0.0).then(|| w.sqrt())
    }

    /// Band of the orbit sampled uniformly on `[x0, x1]`.
    pub fn band(&self, x0: f64, x1: f64, points: usize) -> Result<PlanarProfile> {
        ensure!(points >= 2 && x1 > x0, "band needs x1 > x0 and at least 2 points");
        let x: Vec<f64> = (0..points).map(|i| x0 + (x1 - x0) * i as f64 / (points - 1) as f64).collect();
        let mut y = Vec::with_capacity(points);
        for &xi in &x {
            y.push(self.y(xi).ok_or_else(|| Error::validation(format!("radius {xi} lies inside the horizon")))?);
        }
        if let Some(h) = self.horizon_radius {
            if x0 == h {
                y[0] = 0.0;
            }
        }
        PlanarProfile::with_slope(self.n, x, y, vec![0.0; points])
    }

    /// The orbit as a unit-speed tube `f(t)² g_{S^n} + dt²` starting at radius `x_start`,
    /// integrating `f' = y(f)` by RK4 with 16 substeps per grid cell.
    pub fn tube(&self, x_start: f64, length: f64, points: usize) -> Result<WarpedMetric> {
        ensure!(self.y(x_start).is_some_and(|y| y > 0.0), "tube must start outside the horizon");
        let grid = RadialGrid::new(0.0, length, points)?;
        let sub = 16;
        let dt = grid.h() / sub as f64;
        let rhs = |x: f64| self.y(x).unwrap_or(0.0);
        let mut f = Vec::with_capacity(points);
        let mut x = x_start;
        f.push(x);
        for _ in 1..points {
            for _ in 0..sub {
                let k1 = rhs(x);
                let k2 = rhs(x + 0.5 * dt * k1);
                let k3 = rhs(x + 0.5 * dt * k2);
                let k4 = rhs(x + dt * k3);
                x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            f.push(x);
        }
        WarpedMetric::tube(self.n, grid, f)
    }
}

/// RK4 for the equality case `(1 - y²)/(x y) = 2 y'/(n-1)`, written for
/// `w = y²` as `w' = (n-1)(1 - w)/x` so it stays regular at a horizon.
pub fn integrate_equality(x0: f64, y0: f64, n: usize, x1: f64, step: f64) -> Vec<(f64, f64)> {
    let rhs = |x: f64, w: f64| (n as f64 - 1.0) * (1.0 - w) / x;
    let steps = ((x1 - x0) / step).ceil().max(1.0) as usize;
    let h = (x1 - x0) / steps as f64;
    let mut w = y0 * y0;
    let mut out = vec![(x0, y0)];
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        let k1 = rhs(x, w);
        let k2 = rhs(x + 0.5 * h, w + 0.5 * h * k1);
        let k3 = rhs(x + 0.5 * h, w + 0.5 * h * k2);
        let k4 = rhs(x + h, w + h * k3);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push((x0 + (i + 1) as f64 * h, w.max(0.0).sqrt()));
    }
    out
}

/// A mean-convex round foliation in phase-plane form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarProfile {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `dC/dx` per sample: exact for constructed profiles, finite differences otherwise.
    #[serde(skip)]
    pub dc: Vec<f64>,
}

fn fd_nonuniform(x: &[f64], v: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 2 {
        let s = (v[1] - v[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    (0..n)
        .map(|i| {
            let (a, b, c) = match i {
                0 => (0, 1, 2),
                i if i == n - 1 => (n - 3, n - 2, n - 1),
                i => (i - 1, i, i + 1),
            };
            let w = stencil_weights(x[a], x[b], x[c], x[i]);
            w[0] * v[a] + w[1] * v[b] + w[2] * v[c]
        })
        .collect()
}

/// Derivative weights of the quadratic through three nodes, at `t`.
fn stencil_weights(a: f64, b: f64, c: f64, t: f64) -> [f64; 3] {
    [
        ((t - b) + (t - c)) / ((a - b) * (a - c)),
        ((t - a) + (t - c)) / ((b - a) * (b - c)),
        ((t - a) + (t - b)) / ((c - a) * (c - b)),
    ]
}

impl PlanarProfile {
    pub fn new(n: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let mut p = PlanarProfile { n, x, y, dc: Vec::new() };
        p.validate()?;
        p.dc = fd_nonuniform(&p.x, &p.orbit_constants());
        Ok(p)
    }

    fn with_slope(n: usize, x: Vec<f64>, y: Vec<f64>, dc: Vec<f64>) -> Result<Self> {
        let p = PlanarProfile { n, x, y, dc };
        p.validate()?;
        Ok(p)
    }

    /// Restore the derivative cache after deserialization.
    pub fn refresh(mut self) -> Result<Self> {
        self.validate()?;
        if self.dc.len() != self.x.len() {
            self.dc = fd_nonuniform(&self.x, &self.orbit_constants());
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.n >= 2, "n must be at least 2");
        ensure!(self.x.len() >= 2, "profile needs at least 2 samples");
        ensure!(self.x.len() == self.y.len(), "x and y differ in length");
        for (i, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            ensure!(x.is_finite() && *x > 0.0, "radius sample {i} must be positive and finite");
            ensure!(y.is_finite() && *y <= 1.0, "slope sample {i} = {y} outside (0,1]");
            ensure!(*y > 0.0 || (i == 0 && *y == 0.0), "slope sample {i} = {y} is not mean-convex");
        }
        if let Some(i) = self.x.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::validation(format!("radii not strictly increasing at sample {}", i + 1)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn orbit_constants(&self) -> Vec<f64> {
        let p = self.n as i32 - 1;
        self.x.iter().zip(&self.y).map(|(x, y)| x.powi(p) * (1.0 - y * y)).collect()
    }

    /// `(1 - y²)/(x y) - 2y'/(n-1)`; zero at a horizon sample.
    pub fn psc_margin(&self) -> Vec<f64> {
        let m = self.n as f64 - 1.0;
        (0..self.len())
            .map(|i| {
                let (x, y) = (self.x[i], self.y[i]);
                if y == 0.0 {
                    0.0
                } else {
                    self.dc[i] / (m * x.powi(self.n as i32 - 1) * y)
                }
            })
            .collect()
    }

    /// Scalar curvature `n C'/x^n` of the foliated region.
    pub fn scalar_curvature(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.x.iter().zip(&self.dc).map(|(x, d)| n * d / x.powi(self.n as i32)).collect()
    }

    pub fn initial(&self) -> (f64, f64) {
        (self.x[0], self.y[0])
    }

    pub fn terminal(&self) -> (f64, f64) {
        (self.x[self.len() - 1], self.y[self.len() - 1])
    }

    /// CSV `x,y,psc_margin` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,psc_margin\n");
        for ((x, y), m) in self.x.iter().zip(&self.y).zip(self.psc_margin()) {
            let _ = writeln!(s, "{x:.16e},{y:.16e},{m:.16e}");
        }
        s
    }

    /// Unit-speed tube via `t = ∫ dx / y` (trapezoid) and linear resampling.
    /// A horizon sample is dropped.
    pub fn to_tube(&self, points: usize) -> Result<WarpedMetric> {
        let start = usize::from(self.y[0] == 0.0);
        let x = &self.x[start..];
        let y = &self.y[start..];
        ensure!(x.len() >= 2, "profile too short for a tube");
        let mut t = vec![0.0];
        for i in 1..x.len() {
            t.push(t[i - 1] + 0.5 * (x[i] - x[i - 1]) * (1.0 / y[i] + 1.0 / y[i - 1]));
        }
        let grid = RadialGrid::new(0.0, t[t.len() - 1], points)?;
        let f = grid.sample(|s| {
            let j = t.partition_point(|v| *v < s).clamp(1, t.len() - 1) - 1;
            let w = ((s - t[j]) / (t[j + 1] - t[j])).clamp(0.0, 1.0);
            x[j] + w * (x[j + 1] - x[j])
        });
        WarpedMetric::tube(self.n, grid, f)
    }
}

/// The orbit through `p1`'s terminal state lies strictly above `p2`'s initial state.
pub fn gluing_feasible(p1: &PlanarProfile, p2: &PlanarProfile) -> Result<bool> {
    ensure!(p1.n == p2.n, "profiles have different dimensions");
    let (x1, y1) = p1.terminal();
    let (x2, y2) = p2.initial();
    ensure!(x1 < x2, "radius ranges overlap ({x1} >= {x2})");
    let o = orbit(x1, y1, p1.n)?;
    let y_orbit = o.y(x2).unwrap_or(0.0);
    Ok(y_orbit > y2)
}

/// Number of bridge samples strictly between two glued profiles.
pub const BRIDGE_POINTS: usize = 256;

/// Glue `p1` (inner) to `p2` (outer) by a bridge with orbit constant
/// `C(x) = C₁ + (C₂ - C₁) S(φ_β(s))`, `S` the quintic step and `φ_β` an
/// exponential time change; `β` is raised until every bridge sample is strictly
/// PSC with `0 < y ≤ 1`. `C` matches both ends to second order, so `y` is C².
pub fn glue_profiles(p1: &PlanarProfile, p2: &PlanarProfile) -> Result<PlanarProfile> {
    glue_profiles_with(p1, p2, BRIDGE_POINTS)
}

pub fn glue_profiles_with(p1: &PlanarProfile, p2: &PlanarProfile, bridge_points: usize) -> Result<PlanarProfile> {
    ensure!(p1.n == p2.n, "profiles have different dimensions");
    let n = p1.n;
    let (x1, y1) = p1.terminal();
    let (x2, y2) = p2.initial();
    ensure!(x1 < x2, "radius ranges overlap ({x1} >= {x2})");
    ensure!(bridge_points >= 2, "bridge needs at least 2 samples");
    let c1 = x1.powi(n as i32 - 1) * (1.0 - y1 * y1);
    let c2 = x2.powi(n as i32 - 1) * (1.0 - y2 * y2);
    let span = x2 - x1;
    let xs: Vec<f64> = (1..=bridge_points).map(|j| x1 + span * j as f64 / (bridge_points + 1) as f64).collect();
    for beta in [0.0f64, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        let warp = |s: f64| -> (f64, f64) {
            if beta == 0.0 {
                (s, 1.0)
            } else {
                let e = beta.exp_m1();
                ((beta * s).exp_m1() / e, beta * (beta * s).exp() / e)
            }
        };
        let mut y = Vec::with_capacity(bridge_points);
        let mut dc = Vec::with_capacity(bridge_points);
        let mut ok = true;
        for &x in &xs {
            let s = (x - x1) / span;
            let (phi, dphi) = warp(s);
            let (w, dw, _) = stencil::smoothstep5(phi);
            let c = c1 + (c2 - c1) * w;
            let slope = (c2 - c1) * dw * dphi / span;
            let yy = 1.0 - c * x.powi(1 - n as i32);
            if !(slope > 0.0 && yy > 0.0 && yy <= 1.0) {
                ok = false;
                break;
            }
            y.push(yy.sqrt());
            dc.push(slope);
        }
        if ok {
            let mut x = p1.x.clone();
            x.extend(&xs);
            x.extend(&p2.x);
            let mut yv = p1.y.clone();
            yv.extend(y);
            yv.extend(&p2.y);
            let mut d = p1.dc.clone();
            d.extend(dc);
            d.extend(&p2.dc);
            return PlanarProfile::with_slope(n, x, yv, d);
        }
    }
    Err(Error::validation(
        "gluing condition violated: no strictly PSC bridge joins the terminal orbit to the next profile",
    ))
}

/// Samples per orbit band in the bending constructions.
pub const BAND_POINTS: usize = 512;

/// Mass-`m₁` orbit from its horizon out to `ρ₁`, a strictly PSC bridge, then the
/// mass-`m₂` orbit from `ρ₂` to `10 ρ₂`.
pub fn bend_and_glue(m1: f64, m2: f64, rho1: f64, rho2: f64, n: usize) -> Result<PlanarProfile> {
    ensure!(m1 > 0.0, "inner mass must be positive");
    let o1 = SchwarzschildOrbit::from_mass(m1, n);
    let xh = o1.horizon_radius.unwrap_or(0.0);
    ensure!(rho1 > xh, "rho1 = {rho1} must lie outside the inner horizon {xh}");
    bend_and_glue_from(xh, 0.0, rho1, m2, rho2, n)
}

/// As [`bend_and_glue`], with the inner band on the orbit through `(x0, y0)` over `[x0, ρ₁]`.
pub fn bend_and_glue_from(x0: f64, y0: f64, rho1: f64, m2: f64, rho2: f64, n: usize) -> Result<PlanarProfile> {
    let o1 = orbit(x0, y0, n)?;
    ensure!(m2 > o1.mass, "outer mass {m2} must exceed inner mass {} strictly", o1.mass);
    ensure!(rho1 > x0 && rho2 > rho1, "need x0 < rho1 < rho2");
    let o2 = SchwarzschildOrbit::from_mass(m2, n);
    if let Some(h2) = o2.horizon_radius {
        ensure!(rho2 > h2, "hypothesis fails: rho2 = {rho2} lies inside the outer horizon {h2}");
    }
    let inner = o1.band(x0, rho1, BAND_POINTS)?;
    let outer = o2.band(rho2, 10.0 * rho2, BAND_POINTS)?;
    if !gluing_feasible(&inner, &outer)? {
        return Err(Error::validation("hypothesis fails: inner orbit does not lie above the outer one at rho2"));
    }
    glue_profiles(&inner, &outer)
}

/// Mass `C/2` of the terminal segment (last tenth, at least 8 samples).
pub fn adm_mass(p: &PlanarProfile) -> Result<f64> {
    adm_mass_with(p, Tolerances::default().orbit_drift)
}

pub fn adm_mass_with(p: &PlanarProfile, drift_tol: f64) -> Result<f64> {
    p.validate()?;
    let c = p.orbit_constants();
    let k = (p.len() / 10).max(8).min(p.len());
    let tail = &c[c.len() - k..];
    let last = tail[k - 1];
    let drift = tail.iter().map(|v| (v - last).abs()).fold(0.0, f64::max);
    ensure!(
        drift <= drift_tol * last.abs().max(1.0),
        "terminal segment is not Schwarzschild: orbit constant drifts by {drift:e}"
    );
    Ok(0.5 * last)
}

/// `½ (V / σ_n)^{(n-1)/n}`.
pub fn penrose_bound(volume: f64, n: usize) -> Result<f64> {
    ensure!(volume >= 0.0 && volume.is_finite(), "volume must be nonnegative");
    ensure!(n >= 2, "n must be at least 2");
    let nf = n as f64;
    Ok(0.5 * (volume / sphere_area(n)).powf((nf - 1.0) / nf))
}

/// Cap `u(r) = β + 2√α (√(r₁ - α) - √(r - α))` on `(α, r₁]`: the graph with
/// curvature `κ = sin θ / (2ρ)` that turns vertical at `ρ = α`.
pub fn torpedo_cap(alpha: f64, beta: f64, r1: f64, points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    ensure!(alpha > 0.0 && r1 > alpha, "need 0 < alpha < r1");
    ensure!(points >= 2, "need at least 2 samples");
    let r: Vec<f64> = (1..=points).map(|i| alpha + (r1 - alpha) * i as f64 / points as f64).collect();
    let u = r.iter().map(|&r| torpedo_value(alpha, beta, r1, r)).collect();
    Ok((r, u))
}

pub fn torpedo_value(alpha: f64, beta: f64, r1: f64, r: f64) -> f64 {
    beta + 2.0 * alpha.sqrt() * ((r1 - alpha).sqrt() - (r - alpha).sqrt())
}

/// `κ - sin θ/(2ρ)` for a graph `u(ρ)` given `u'` and `u''`, with `θ` the angle
/// of the tangent to the horizontal.
pub fn cap_residual(rho: f64, du: f64, d2u: f64) -> f64 {
    let s = 1.0 + du * du;
    let kappa = d2u / s.powf(1.5);
    let sin = -du / s.sqrt();
    kappa - sin / (2.0 * rho)
}
