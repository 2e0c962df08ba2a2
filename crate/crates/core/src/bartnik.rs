//! Minimizing sequences for the horizon Bartnik mass: a mean-convex collar
//! from the horizon to `(1+ε)` times the equal-area round sphere, then a
//! Schwarzschild bend out to an exact exterior of slightly larger mass.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::collar::{build_mean_convex_collar, min_scalar, CollarMetric, CollarReport};
use crate::config::Tolerances;
use crate::error::{ensure, Error, Result};
use crate::geomcore::WarpedMetric;
use crate::grid::RadialGrid;
use crate::paths::{moser_twist, MetricPath};
use crate::schwarzschild::{adm_mass, bend_and_glue_from, penrose_bound, PlanarProfile};
use crate::spectral;
use crate::stencil::{self, End};

/// t-samples of the collar path.
pub const COLLAR_T_POINTS: usize = 33;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionChecks {
    pub report: CollarReport,
    pub min_r_collar: f64,
    pub min_r_bridge: f64,
    /// Smallest strict PSC margin over the bridge samples (bands sit at 0).
    pub min_psc_margin: f64,
    pub horizon_minimal: bool,
    /// Smallest `H` over collar slices with `t > 0` and smallest `y` of the profile.
    pub min_h_collar: f64,
    pub min_y_bridge: f64,
    /// Area-radius and mean-curvature mismatch where the collar meets the profile.
    pub junction_radius_gap: f64,
    pub junction_h_gap: f64,
    pub penrose_bound: f64,
}

impl ExtensionChecks {
    pub fn min_r(&self) -> f64 {
        self.min_r_collar.min(self.min_r_bridge)
    }

    pub fn passes(&self, mass: f64, tol: &Tolerances) -> bool {
        self.min_r() >= -tol.curvature_floor
            && self.horizon_minimal
            && self.min_h_collar > 0.0
            && self.min_y_bridge > 0.0
            && self.junction_radius_gap <= 1e-12
            && self.junction_h_gap <= 1e-9
            && mass >= self.penrose_bound - 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub epsilon: f64,
    pub collar: CollarMetric,
    pub bridge: PlanarProfile,
    pub mass: f64,
    pub checks: ExtensionChecks,
}

/// Conformal path `e^{-2tw} g` from `g` to the round metric of equal area, where
/// `g = e^{2w} ψ^* g_round`. The Möbius freedom is fixed by sending the point
/// that halves the area to the equator.
pub fn uniformizing_path(horizon: &WarpedMetric, t_points: usize) -> Result<MetricPath> {
    ensure!(horizon.is_closed() && horizon.n == 2, "uniformization needs a closed S² metric");
    horizon.validate()?;
    let n = horizon.len();
    let grid = horizon.grid;
    let h = grid.h();
    let (x0, len) = (grid.a, grid.length());
    let a = horizon.radial_coeff();
    let phi = &horizon.profile;
    // q = ∫ a/φ, split as log(y/(L-y)) plus a smooth remainder
    let mut g: Vec<f64> = (0..n)
        .map(|i| {
            let y = grid.x(i) - x0;
            if i == 0 || i == n - 1 {
                0.0
            } else {
                a[i] / phi[i] - 1.0 / y - 1.0 / (len - y)
            }
        })
        .collect();
    // a/φ - 1/y is odd about the pole, so only the regular part survives there.
    g[0] = -1.0 / len;
    g[n - 1] = -1.0 / len;
    let big_g = stencil::cumulative(&g, h, End::Open, End::Open);
    let vol = horizon.cumulative_volume();
    let total = vol[n - 1];
    let k = vol.partition_point(|v| *v < 0.5 * total).clamp(1, n - 2);
    let ym = grid.x(k) - x0;
    let c = -((ym / (len - ym)).ln() + big_g[k]);
    let r: Vec<f64> = (0..n)
        .map(|i| {
            let y = grid.x(i) - x0;
            if i == 0 {
                0.0
            } else if i == n - 1 {
                std::f64::consts::PI
            } else {
                2.0 * ((y / (len - y)).ln() + big_g[i] + c).exp().atan()
            }
        })
        .collect();
    // e^{w} = φ / sin r, even at the poles
    let mut ew: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { 0.0 } else { phi[i] / r[i].sin() }).collect();
    stencil::fill_pole_limits(&mut ew, true, true);
    let area = horizon.volume();
    let tg = RadialGrid::new(0.0, 1.0, t_points)?;
    MetricPath::from_fn(tg, |t| {
        let w: Vec<f64> = ew.iter().map(|e| e.powf(-t)).collect();
        let gt = horizon.conformal(&w)?;
        let s = (area / gt.volume()).sqrt();
        let mut out = gt.scaled(s);
        if t == 0.0 {
            out = horizon.clone();
        }
        Ok(out)
    })
}

/// The equal-area path from the horizon to a round sphere, twisted so that the
/// slice volume form is constant. A round horizon gives the constant path.
pub fn horizon_path(horizon: &WarpedMetric) -> Result<MetricPath> {
    let (min_r, avg_r) = spectral::curvature_sandwich(horizon);
    let path = if horizon.radial.is_none() && (avg_r - min_r).abs() <= 1e-8 * avg_r.abs() {
        MetricPath::constant(horizon, COLLAR_T_POINTS)?
    } else {
        // the twist is the identity at t = 0; keep the input bit-exact there
        let mut p = moser_twist(&uniformizing_path(horizon, COLLAR_T_POINTS)?)?.path;
        p.metrics[0] = horizon.clone();
        p
    };
    path.with_lambda1(0.5)
}

/// One extension for a given `ε ∈ (0, ½]`.
pub fn extension(horizon: &WarpedMetric, path: &MetricPath, epsilon: f64) -> Result<Extension> {
    ensure!(epsilon > 0.0 && epsilon <= 0.5, "epsilon must lie in (0, 1/2]");
    let tol = Tolerances::default();
    let n = horizon.dim();
    let nf = n as f64;
    let volume = horizon.volume();
    let bound = penrose_bound(volume, n)?;
    let (mut collar, report) = build_mean_convex_collar(path, 0.5, epsilon, false, false)?;
    let nt = collar.t_grid().points;
    let rho = collar.rho_schedule.clone().ok_or_else(|| Error::validation("collar lacks a schedule"))?;
    let rho1 = stencil::d1(&rho, collar.t_grid().h(), End::Open, End::Open);
    let lapse_end = &collar.lapse[nt - 1];
    let u1 = lapse_end.iter().sum::<f64>() / lapse_end.len() as f64;
    let u_spread = lapse_end.iter().map(|u| (u - u1).abs()).fold(0.0, f64::max);
    ensure!(u_spread <= 1e-6 * u1, "outer slice is not round (lapse varies by {u_spread:e})");
    let x1 = (volume * (1.0 + epsilon).powf(nf / 2.0) / crate::geomcore::sphere_area(n)).powf(1.0 / nf);
    // y₁ = H₁ x₁ / n with H₁ = n ε ρ'(1) / (2 (1+ε) A u₁); pick A ≥ A_min so that y₁ ≤ ε/4.
    let slope = |a: f64| epsilon * rho1[nt - 1] * x1 / (2.0 * (1.0 + epsilon) * a * u1);
    let a_needed = slope(1.0) / (0.25 * epsilon);
    if a_needed > collar.amplitude {
        collar.amplitude = a_needed;
    }
    let y1 = slope(collar.amplitude);
    let min_r_collar = min_scalar(&collar, false)?;
    let h: Vec<Vec<f64>> = (0..nt)
        .map(|j| {
            let c = 1.0 + epsilon * rho[j];
            collar.lapse[j].iter().map(|u| nf * epsilon * rho1[j] / (2.0 * c * collar.amplitude * u)).collect()
        })
        .collect();
    let horizon_minimal = h[0].iter().all(|v| v.abs() <= 1e-9) && collar.slice(0) == horizon;
    let min_h_collar = h[1..].iter().flat_map(|r| r.iter().cloned()).fold(f64::MAX, f64::min);
    let m1 = 0.5 * x1.powi(n as i32 - 1) * (1.0 - y1 * y1);
    let m2 = m1 * (1.0 + epsilon / 16.0);
    let bridge = bend_and_glue_from(x1, y1, 1.5 * x1, m2, 3.0 * x1, n)?;
    let mass = adm_mass(&bridge)?;
    let rb = bridge.scalar_curvature();
    let margins = bridge.psc_margin();
    let min_psc_margin = bridge
        .dc
        .iter()
        .zip(&margins)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, m)| *m)
        .fold(f64::MAX, f64::min);
    let (bx, by) = bridge.initial();
    let checks = ExtensionChecks {
        report: CollarReport { slice_h: h, ..report },
        min_r_collar,
        min_r_bridge: rb.iter().cloned().fold(f64::MAX, f64::min),
        min_psc_margin,
        horizon_minimal,
        min_h_collar,
        min_y_bridge: bridge.y.iter().cloned().fold(f64::MAX, f64::min),
        junction_radius_gap: (bx - x1).abs(),
        junction_h_gap: (nf * by / bx - nf * y1 / x1).abs(),
        penrose_bound: bound,
    };
    ensure!(
        checks.passes(mass, &tol),
        "extension at epsilon = {epsilon} fails its checks: min R = {:e}, min H = {:e}, mass = {mass}, junction gaps {:e} {:e}, horizon minimal {}",
        checks.min_r(),
        checks.min_h_collar,
        checks.junction_radius_gap,
        checks.junction_h_gap,
        checks.horizon_minimal
    );
    Ok(Extension { epsilon, collar, bridge, mass, checks })
}

/// Extensions for each `ε` (decreasing), with masses decreasing to the Penrose bound.
pub fn minimizing_sequence(horizon: &WarpedMetric, epsilons: &[f64]) -> Result<Vec<Extension>> {
    minimizing_sequence_jobs(horizon, epsilons, 1)
}

/// As [`minimizing_sequence`], spreading the independent `ε` runs over `jobs`
/// threads. Results are identical to the serial run.
pub fn minimizing_sequence_jobs(horizon: &WarpedMetric, epsilons: &[f64], jobs: usize) -> Result<Vec<Extension>> {
    ensure!(horizon.is_closed(), "horizon must be a closed sphere");
    ensure!(!epsilons.is_empty(), "need at least one epsilon");
    ensure!(epsilons.windows(2).all(|w| w[1] < w[0]), "epsilons must strictly decrease");
    let tol = Tolerances::default();
    let l = spectral::lambda1(horizon, 0.5)?.lambda1;
    ensure!(l >= -tol.membership, "not an admissible horizon: lambda1(-Δ + R/2) = {l}");
    if horizon.n > 2 {
        let (lo, hi) = spectral::curvature_sandwich(horizon);
        ensure!((hi - lo).abs() <= 1e-9 * hi.abs(), "for n >= 3 only round horizons are supported");
    }
    let path = horizon_path(horizon)?;
    let jobs = jobs.clamp(1, epsilons.len());
    let out: Vec<Extension> = if jobs == 1 {
        epsilons.iter().map(|&e| extension(horizon, &path, e)).collect::<Result<_>>()?
    } else {
        let chunk = epsilons.len().div_ceil(jobs);
        let parts: Vec<Result<Vec<Extension>>> = std::thread::scope(|sc| {
            let handles: Vec<_> = epsilons
                .chunks(chunk)
                .map(|c| sc.spawn(|| c.iter().map(|&e| extension(horizon, &path, e)).collect::<Result<Vec<_>>>()))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut v = Vec::with_capacity(epsilons.len());
        for p in parts {
            v.extend(p?);
        }
        v
    };
    if let Some(w) = out.windows(2).find(|w| w[1].mass >= w[0].mass) {
        return Err(Error::nonconvergence(format!(
            "masses fail to decrease: {} at epsilon {} then {} at {}",
            w[0].mass, w[0].epsilon, w[1].mass, w[1].epsilon
        )));
    }
    Ok(out)
}

/// `ε_i = 2^{-i}`, `i = 1..=count`.
pub fn dyadic_epsilons(count: usize) -> Vec<f64> {
    (1..=count).map(|i| 0.5f64.powi(i as i32)).collect()
}

/// CSV `i,epsilon,mass,min_R,min_psc_margin`.
pub fn masses_csv(seq: &[Extension]) -> String {
    let mut s = String::from("i,epsilon,mass,min_R,min_psc_margin\n");
    for (i, e) in seq.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            i + 1,
            e.epsilon,
            e.mass,
            e.checks.min_r(),
            e.checks.min_psc_margin
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles;

    #[test]
    fn dyadic_sequence() {
        assert_eq!(dyadic_epsilons(3), vec![0.5, 0.25, 0.125]);
        assert!(dyadic_epsilons(0).is_empty());
    }

    #[test]
    fn uniformizing_path_ends_round_with_equal_area() {
        let g = profiles::bumpy(2, &[0.15, -0.05], 513).unwrap();
        let p = uniformizing_path(&g, 9).unwrap();
        assert_eq!(p.first().profile, g.profile);
        let r = crate::geomcore::scalar_curvature(p.last());
        let (lo, hi) = r.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!((hi - lo) / hi < 1e-6);
        let v = p.volumes();
        assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-9 * v[0]));
    }

    #[test]
    fn round_horizon_sequence_approaches_half() {
        let g = profiles::round(2, 1.0, 257).unwrap();
        let seq = minimizing_sequence(&g, &dyadic_epsilons(3)).unwrap();
        assert!(seq.windows(2).all(|w| w[1].mass < w[0].mass));
        assert!(seq.iter().all(|e| e.mass >= 0.5 - 1e-9));
        let csv = masses_csv(&seq);
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn rejects_non_surfaces() {
        assert!(uniformizing_path(&profiles::round(3, 1.0, 65).unwrap(), 9).is_err());
    }
}
