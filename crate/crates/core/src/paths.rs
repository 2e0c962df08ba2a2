//! Explicit metric paths: 2D conformal paths, the Yamabe contraction, Moser's
//! volume-normalizing twist and the round-foliation isotopy.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{ensure, Error, Result};
use crate::geomcore::{scalar_curvature, MetricKind, WarpedMetric};
use crate::grid::RadialGrid;
use crate::spectral;
use crate::stencil::{self, End};

/// A sampled family `t ↦ g_t`, `t ∈ [0,1]`, on one shared spatial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPath {
    pub t_grid: RadialGrid,
    pub metrics: Vec<WarpedMetric>,
    /// `λ₁(t)` per sample once computed (empty otherwise).
    #[serde(default)]
    pub lambda1: Vec<f64>,
}

impl MetricPath {
    pub fn new(t_grid: RadialGrid, metrics: Vec<WarpedMetric>) -> Result<Self> {
        let p = MetricPath { t_grid, metrics, lambda1: Vec::new() };
        p.validate()?;
        Ok(p)
    }

    pub fn from_fn(t_grid: RadialGrid, f: impl Fn(f64) -> Result<WarpedMetric>) -> Result<Self> {
        let metrics = (0..t_grid.points).map(|j| f(t_grid.x(j))).collect::<Result<Vec<_>>>()?;
        Self::new(t_grid, metrics)
    }

    /// Constant path.
    pub fn constant(g: &WarpedMetric, t_points: usize) -> Result<Self> {
        let t_grid = RadialGrid::new(0.0, 1.0, t_points)?;
        Self::new(t_grid, vec![g.clone(); t_points])
    }

    pub fn validate(&self) -> Result<()> {
        self.t_grid.validate()?;
        ensure!(
            self.metrics.len() == self.t_grid.points,
            "path has {} metrics for {} t-samples",
            self.metrics.len(),
            self.t_grid.points
        );
        let g0 = &self.metrics[0];
        for (j, g) in self.metrics.iter().enumerate() {
            ensure!(
                g.kind == g0.kind && g.n == g0.n && g.grid == g0.grid,
                "path metric {j} does not share (kind, n, grid) with metric 0"
            );
        }
        Ok(())
    }

    pub fn first(&self) -> &WarpedMetric {
        &self.metrics[0]
    }

    pub fn last(&self) -> &WarpedMetric {
        &self.metrics[self.metrics.len() - 1]
    }

    /// Metric at arbitrary `t`: cubic interpolation of `φ` and of the density
    /// `a φ^m`, so interpolating a density-preserving path preserves density.
    pub fn at(&self, t: f64) -> WarpedMetric {
        let g = self.first();
        let nx = g.len();
        let (i0, w) = stencil::stencil_at(self.t_grid.a, self.t_grid.h(), self.t_grid.points, t, 4);
        if let Some(k) = w.iter().position(|w| (w - 1.0).abs() < 1e-15) {
            if w.iter().enumerate().all(|(j, w)| j == k || w.abs() < 1e-15) {
                return self.metrics[i0 + k].clone();
            }
        }
        let q = g.fiber_dim() as i32;
        let mut phi = vec![0.0; nx];
        let mut dens = vec![0.0; nx];
        let mut a_direct = vec![0.0; nx];
        for (k, wk) in w.iter().enumerate() {
            let gk = &self.metrics[i0 + k];
            let ak = gk.radial_coeff();
            for i in 0..nx {
                phi[i] += wk * gk.profile[i];
                dens[i] += wk * ak[i] * gk.profile[i].powi(q);
                a_direct[i] += wk * ak[i];
            }
        }
        let a: Vec<f64> = (0..nx)
            .map(|i| if phi[i] > 0.0 { dens[i] / phi[i].powi(q) } else { a_direct[i] })
            .collect();
        WarpedMetric { kind: g.kind, n: g.n, grid: g.grid, profile: phi, radial: Some(a) }
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.metrics.iter().map(|g| g.volume()).collect()
    }

    /// Fill the `λ₁(t)` cache.
    pub fn with_lambda1(mut self, k: f64) -> Result<Self> {
        let tol = Tolerances::default();
        self.lambda1 = self
            .metrics
            .iter()
            .map(|g| spectral::lambda1_with(g, k, &tol).map(|r| r.lambda1))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    /// The path traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        p.metrics.reverse();
        p.lambda1.reverse();
        p
    }
}

/// Concatenate two paths with matching ends. Each half is run through the
/// quintic time change `S(s) = 6s⁵ - 15s⁴ + 10s³`, so the joined path has
/// vanishing first and second `t`-derivatives at the junction and is C².
pub fn concatenate(p1: &MetricPath, p2: &MetricPath, t_points: usize) -> Result<MetricPath> {
    let (a, b) = (p1.last(), p2.first());
    ensure!(a.grid == b.grid && a.n == b.n && a.kind == b.kind, "paths live on different grids");
    let gap = a.profile.iter().zip(&b.profile).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    ensure!(gap <= 1e-12, "paths do not meet: endpoint gap {gap:e}");
    let t_grid = RadialGrid::new(0.0, 1.0, t_points)?;
    MetricPath::from_fn(t_grid, |s| {
        Ok(if s <= 0.5 {
            p1.at(stencil::smoothstep5(2.0 * s).0)
        } else {
            p2.at(stencil::smoothstep5(2.0 * s - 1.0).0)
        })
    })
}

/// Rayleigh energy of a test function at several `t`, with the largest deviation
/// from the least-squares affine fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighLinearity {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub max_affine_deviation: f64,
}

/// `e^{2(t u + (1 - t))} g₀` for a round `S²` metric `g₀`; optionally the Rayleigh
/// energy `∫|∇f|² + k R f²` of `f` at `t ∈ {0, ¼, ½, ¾, 1}` (`k = ½`).
pub fn conformal_path_2d(
    g0: &WarpedMetric,
    u: &[f64],
    t: f64,
    test_function: Option<&[f64]>,
) -> Result<(WarpedMetric, Option<RayleighLinearity>)> {
    ensure!(g0.is_closed() && g0.n == 2, "conformal_path_2d needs a closed S² metric");
    ensure!(u.len() == g0.len(), "u has {} samples, grid has {}", u.len(), g0.len());
    let at = |t: f64| -> Result<WarpedMetric> {
        let w: Vec<f64> = u.iter().map(|u| (t * u + (1.0 - t)).exp()).collect();
        g0.conformal(&w)
    };
    let g = at(t)?;
    let check = match test_function {
        None => None,
        Some(f) => {
            ensure!(f.len() == g0.len(), "test function length mismatch");
            let ts = vec![0.0, 0.25, 0.5, 0.75, 1.0];
            let energy = ts
                .iter()
                .map(|&s| {
                    let (num, _) = spectral::rayleigh_parts(&at(s)?, 0.5, f);
                    Ok(num)
                })
                .collect::<Result<Vec<f64>>>()?;
            let max_affine_deviation = affine_deviation(&ts, &energy);
            Some(RayleighLinearity { t: ts, energy, max_affine_deviation })
        }
    };
    Ok((g, check))
}

/// Largest residual of the least-squares line through `(x, y)`.
pub fn affine_deviation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    x.iter()
        .zip(y)
        .map(|(a, b)| (b - (my + slope * (a - mx))).abs())
        .fold(0.0, f64::max)
}

/// `[(1 - t) + t u]⁴ g` with `u` the principal eigenfunction of `-Δ + R/8` (n = 3).
pub fn yamabe_contraction_path(m: &WarpedMetric, t: f64) -> Result<WarpedMetric> {
    ensure!(m.is_closed() && m.n == 3, "yamabe_contraction_path needs a closed S³ metric");
    ensure!((0.0..=1.0).contains(&t), "t must lie in [0,1]");
    let res = spectral::lambda1(m, 0.125)?;
    let w: Vec<f64> = res.eigenfunction.iter().map(|u| ((1.0 - t) + t * u).powi(2)).collect();
    m.conformal(&w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistResult {
    /// Scale `ρ(t)` with `vol(ρ(t) g_t) = vol(g_0)`.
    pub rho: Vec<f64>,
    /// `ψ_t(x_i)` per t-sample: the flow of the radial field `X(t)`.
    pub reparametrization: Vec<Vec<f64>>,
    /// `∂_x ψ_t(x_i)`, integrated along the flow.
    pub jacobian: Vec<Vec<f64>>,
    /// The common volume density `a φ^m` of the twisted slices.
    pub slice_volume_form: Vec<f64>,
    /// Per t-sample: sup relative deviation of the pulled-back density from the
    /// initial one, evaluated from the flow Jacobian.
    pub volume_form_deviation: Vec<f64>,
    /// `ψ_t^*(ρ(t) g_t)`.
    pub path: MetricPath,
}

impl TwistResult {
    pub fn max_deviation(&self) -> f64 {
        self.volume_form_deviation.iter().cloned().fold(0.0, f64::max)
    }
}

/// Moser's twist along a path of closed metrics.
pub fn moser_twist(path: &MetricPath) -> Result<TwistResult> {
    path.validate()?;
    let g0 = path.first();
    ensure!(g0.is_closed(), "moser_twist needs closed metrics");
    let nt = path.t_grid.points;
    let nx = g0.len();
    let xg = g0.grid;
    let hx = xg.h();
    let ht = path.t_grid.h();
    let dim = g0.dim() as f64;
    let q = g0.fiber_dim() as i32;

    let vols = path.volumes();
    let rho: Vec<f64> = vols.iter().map(|v| (vols[0] / v).powf(2.0 / dim)).collect();
    // cumulative volume of ρ g_t
    let cum: Vec<Vec<f64>> = path
        .metrics
        .iter()
        .zip(&rho)
        .map(|(g, r)| g.cumulative_volume().into_iter().map(|v| v * r.powf(dim / 2.0)).collect())
        .collect();
    let dens: Vec<Vec<f64>> = path
        .metrics
        .iter()
        .zip(&rho)
        .map(|(g, r)| g.density().into_iter().map(|d| d * r.powf(dim / 2.0)).collect())
        .collect();
    let sigma = crate::geomcore::sphere_area(g0.fiber_dim());
    // X = -∂_t V / (σ D) at the nodes; zero at the poles.
    let mut field = vec![vec![0.0; nx]; nt];
    for i in 1..nx - 1 {
        let col: Vec<f64> = (0..nt).map(|j| cum[j][i]).collect();
        let d = stencil::d1(&col, ht, End::Open, End::Open);
        for j in 0..nt {
            field[j][i] = -d[j] / (sigma * dens[j][i]);
        }
    }
    let field_x: Vec<Vec<f64>> = field.iter().map(|x| stencil::d1(x, hx, End::Odd, End::Odd)).collect();
    // half-step fields by cubic interpolation in t
    let half = |arr: &Vec<Vec<f64>>, j: usize| -> Vec<f64> {
        let (i0, w) = stencil::stencil_at(0.0, 1.0, nt, j as f64 + 0.5, 4);
        (0..nx).map(|i| (0..4).map(|k| w[k] * arr[i0 + k][i]).sum()).collect()
    };
    let eval = |v: &[f64], x: f64| stencil::interp(xg.a, hx, v, x.clamp(xg.a, xg.b), 6);

    let mut psi = vec![xg.xs()];
    let mut jac = vec![vec![1.0; nx]];
    for j in 0..nt - 1 {
        let (xh, xhx) = (half(&field, j), half(&field_x, j));
        let stages = [(&field[j], &field_x[j]), (&xh, &xhx), (&xh, &xhx), (&field[j + 1], &field_x[j + 1])];
        let (p, jc) = (&psi[j], &jac[j]);
        let mut np = p.clone();
        let mut nj = jc.clone();
        for i in 1..nx - 1 {
            let (mut y, mut z) = (p[i], jc[i]);
            let (y0, z0) = (y, z);
            let mut ky = [0.0; 4];
            let mut kz = [0.0; 4];
            for s in 0..4 {
                if s > 0 {
                    let c = if s == 3 { 1.0 } else { 0.5 };
                    y = y0 + c * ht * ky[s - 1];
                    z = z0 + c * ht * kz[s - 1];
                }
                ky[s] = eval(stages[s].0, y);
                kz[s] = eval(stages[s].1, y) * z;
            }
            np[i] = y0 + ht / 6.0 * (ky[0] + 2.0 * ky[1] + 2.0 * ky[2] + ky[3]);
            nj[i] = z0 + ht / 6.0 * (kz[0] + 2.0 * kz[1] + 2.0 * kz[2] + kz[3]);
        }
        for &e in &[0, nx - 1] {
            // at the poles X = 0 and ∂_t J = X_x J
            let xs = [field_x[j][e], xhx[e], xhx[e], field_x[j + 1][e]];
            let mut z = jc[e];
            let z0 = z;
            let mut kz = [0.0; 4];
            for s in 0..4 {
                if s > 0 {
                    z = z0 + (if s == 3 { 1.0 } else { 0.5 }) * ht * kz[s - 1];
                }
                kz[s] = xs[s] * z;
            }
            nj[e] = z0 + ht / 6.0 * (kz[0] + 2.0 * kz[1] + 2.0 * kz[2] + kz[3]);
        }
        if np.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::nonconvergence("twist flow lost monotonicity; refine the t-grid"));
        }
        psi.push(np);
        jac.push(nj);
    }

    let d0 = g0.density();
    let mut metrics = Vec::with_capacity(nt);
    let mut deviation = Vec::with_capacity(nt);
    let dmax = d0.iter().cloned().fold(0.0, f64::max);
    for j in 0..nt {
        let g = &path.metrics[j];
        let ag = g.radial_coeff();
        let sr = rho[j].sqrt();
        let phi: Vec<f64> = (0..nx)
            .map(|i| if i == 0 || i == nx - 1 { 0.0 } else { sr * eval(&g.profile, psi[j][i]) })
            .collect();
        let pulled_a: Vec<f64> = (0..nx).map(|i| sr * eval(&ag, psi[j][i]) * jac[j][i]).collect();
        let a: Vec<f64> = (0..nx)
            .map(|i| if i == 0 || i == nx - 1 { pulled_a[i] } else { d0[i] / phi[i].powi(q) })
            .collect();
        let dev = (1..nx - 1)
            .map(|i| (pulled_a[i] * phi[i].powi(q) - d0[i]).abs() / dmax)
            .fold(0.0, f64::max);
        deviation.push(dev);
        metrics.push(WarpedMetric { kind: MetricKind::ClosedSphere, n: g0.n, grid: xg, profile: phi, radial: Some(a) });
    }
    let twisted = MetricPath::new(path.t_grid, metrics)?;
    Ok(TwistResult {
        rho,
        reparametrization: psi,
        jacobian: jac,
        slice_volume_form: d0,
        volume_form_deviation: deviation,
        path: twisted,
    })
}

const ISOTOPY_SLACK: f64 = 1e-6;

/// One member `(f_μ, h_μ)` of the isotopy from a round foliation
/// `f₀(t)² g_{S^n} + dt²` to the product `g_{S^n} + dt²`: conformal stage for
/// `μ ≤ ½`, product stage afterwards. The family metric is `f_μ² g_{S^n} + h_μ² dt²`.
pub fn round_isotopy(f0: &WarpedMetric, theta: f64, mu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    ensure!(f0.kind == MetricKind::Tube, "round_isotopy needs a tube profile");
    ensure!(f0.radial.is_none(), "round_isotopy needs a unit-speed foliation");
    ensure!((0.0..=1.0).contains(&theta), "theta must lie in [0,1]");
    ensure!((0.0..=1.0).contains(&mu), "mu must lie in [0,1]");
    let n = f0.n as f64;
    let r = scalar_curvature(f0);
    let floor = theta * n * (n - 1.0);
    // scalar-flat inputs sit at the floor up to discretization error
    if let Some((i, v)) = r.iter().enumerate().find(|(_, v)| **v < floor - ISOTOPY_SLACK) {
        return Err(Error::validation(format!(
            "input violates R >= theta n(n-1): R[{i}] = {v} < {floor}"
        )));
    }
    let f = &f0.profile;
    if mu <= 0.5 {
        let s: Vec<f64> = f
            .iter()
            .map(|f| (1.0 - 2.0 * mu) + 2.0 * mu * f.powf((1.0 - n) / 2.0))
            .collect();
        let c: Vec<f64> = s.iter().map(|s| s.powf(2.0 / (n - 1.0))).collect();
        Ok((c.iter().zip(f).map(|(c, f)| c * f).collect(), c))
    } else {
        let h = f
            .iter()
            .map(|f| ((2.0 - 2.0 * mu) / (f * f) + 2.0 * mu - 1.0).sqrt())
            .collect();
        Ok((vec![1.0; f.len()], h))
    }
}

/// The isotopy member as a tube metric (radial coefficient `h_μ`).
pub fn round_isotopy_metric(f0: &WarpedMetric, theta: f64, mu: f64) -> Result<WarpedMetric> {
    let (f, h) = round_isotopy(f0, theta, mu)?;
    WarpedMetric::build(MetricKind::Tube, f0.n, f0.grid, f, Some(h))
}

/// The conformal-stage expression whose sign is `R_{g_μ} ≥ θ n(n-1)`, at one `μ ∈ [0, ½]`.
pub fn isotopy_stage_one_expression(f0: &WarpedMetric, theta: f64, mu: f64) -> Vec<f64> {
    let n = f0.n as f64;
    let f = &f0.profile;
    let h = f0.grid.h();
    let w: Vec<f64> = f.iter().map(|f| 2.0 * mu * f.powf((1.0 - n) / 2.0)).collect();
    let fx = stencil::d1(f, h, End::Open, End::Open);
    let wx = stencil::d1(&w, h, End::Open, End::Open);
    let wxx = stencil::d2(&w, h, End::Open, End::Open);
    let r = scalar_curvature(f0);
    (0..f.len())
        .map(|i| {
            let lap = wxx[i] + n * fx[i] / f[i] * wx[i];
            let s = (1.0 - 2.0 * mu) + w[i];
            -4.0 * n / (n - 1.0) * lap + r[i] * s - theta * n * (n - 1.0) * s.powf((n + 3.0) / (n - 1.0))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles;

    #[test]
    fn interpolation_hits_samples() {
        let p = profiles::bumpy_path(2, &[0.1], &[-0.1], 9, 65).unwrap();
        assert_eq!(&p.at(0.0), p.first());
        assert_eq!(&p.at(1.0), p.last());
        assert_eq!(p.at(p.t_grid.x(3)).profile, p.metrics[3].profile);
    }

    #[test]
    fn yamabe_path_starts_at_input() {
        let g = profiles::perturbed(3, 0.2, 129).unwrap();
        let g0 = yamabe_contraction_path(&g, 0.0).unwrap();
        assert_eq!(g0.profile, g.profile);
        assert!(yamabe_contraction_path(&profiles::round(2, 1.0, 65).unwrap(), 0.5).is_err());
    }

    #[test]
    fn constant_path_twists_trivially() {
        let p = MetricPath::constant(&profiles::bumpy(3, &[0.1], 129).unwrap(), 9).unwrap();
        let tw = moser_twist(&p).unwrap();
        assert!(tw.max_deviation() < 1e-12);
        assert!(tw.rho.iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn affine_data_has_no_deviation() {
        let x = [0.0, 0.25, 0.5, 0.75, 1.0];
        let y: Vec<f64> = x.iter().map(|t| 3.0 - 2.0 * t).collect();
        assert!(affine_deviation(&x, &y) < 1e-14);
        assert!(affine_deviation(&x, &[0.0, 0.0, 1.0, 0.0, 0.0]) > 0.1);
    }

    #[test]
    fn mismatched_paths_refuse_to_concatenate() {
        let a = profiles::bumpy_path(2, &[0.1], &[0.0], 9, 65).unwrap();
        let b = profiles::bumpy_path(2, &[0.2], &[0.0], 9, 65).unwrap();
        assert!(concatenate(&a, &b, 17).unwrap_err().to_string().contains("do not meet"));
    }
}
