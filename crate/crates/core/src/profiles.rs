//! Ready-made rotationally symmetric metrics used by examples, tests and the CLI.

use std::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::geomcore::WarpedMetric;
use crate::grid::RadialGrid;
use crate::paths::MetricPath;

/// Closed `S^n` in arclength form from `φ` on `[0, length]`; pole samples are pinned to 0.
pub fn closed_from_fn(n: usize, length: f64, points: usize, phi: impl Fn(f64) -> f64) -> Result<WarpedMetric> {
    let grid = RadialGrid::new(0.0, length, points)?;
    let mut p = grid.sample(phi);
    p[0] = 0.0;
    p[points - 1] = 0.0;
    WarpedMetric::closed(n, grid, p)
}

pub fn round(n: usize, radius: f64, points: usize) -> Result<WarpedMetric> {
    WarpedMetric::round_sphere(n, radius, points)
}

/// `φ = sin ρ · w(ρ)` with `w = 1 + Σ c_j sin²ρ cos^j ρ`; smooth at both poles.
pub fn bumpy(n: usize, coeffs: &[f64], points: usize) -> Result<WarpedMetric> {
    let w = |r: f64| 1.0 + coeffs.iter().enumerate().map(|(j, c)| c * r.sin().powi(2) * r.cos().powi(j as i32)).sum::<f64>();
    closed_from_fn(n, PI, points, |r| r.sin() * w(r))
}

/// Dumbbell `φ = sin ρ (1 - a sin²ρ)`: a neck at the equator for `a > 0`.
pub fn dumbbell(n: usize, a: f64, points: usize) -> Result<WarpedMetric> {
    ensure!(a < 1.0, "dumbbell amplitude must be below 1");
    bumpy(n, &[-a], points)
}

/// `φ = sin ρ (1 + a sin²ρ)`.
pub fn perturbed(n: usize, a: f64, points: usize) -> Result<WarpedMetric> {
    bumpy(n, &[a], points)
}

/// `c² g` with `vol(c² g) = volume`.
pub fn with_volume(g: &WarpedMetric, volume: f64) -> WarpedMetric {
    let c = (volume / g.volume()).powf(1.0 / g.dim() as f64);
    g.scaled(c)
}

/// Linear interpolation of `bumpy` coefficients, each slice rescaled to the
/// volume of the unit round sphere.
pub fn bumpy_path(n: usize, c0: &[f64], c1: &[f64], t_points: usize, points: usize) -> Result<MetricPath> {
    ensure!(c0.len() == c1.len(), "coefficient lists differ in length");
    let v = round(n, 1.0, points)?.volume();
    let t_grid = RadialGrid::new(0.0, 1.0, t_points)?;
    MetricPath::from_fn(t_grid, |t| {
        let c: Vec<f64> = c0.iter().zip(c1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        Ok(with_volume(&bumpy(n, &c, points)?, v))
    })
}
