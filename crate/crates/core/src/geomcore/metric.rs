use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::grid::RadialGrid;
use crate::stencil::{self, End};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `a(x)² dx² + φ(x)² g_{S^{n-1}}` closing smoothly at both ends.
    ClosedSphere,
    /// `a(t)² dt² + f(t)² g_{S^n}`.
    Tube,
}

/// Rotationally symmetric metric sampled on a [`RadialGrid`].
///
/// `n` follows the per-kind convention: the dimension of the closed sphere for
/// `ClosedSphere`, the dimension of the round slices for `Tube`. The optional
/// radial coefficient `a` defaults to 1 (arclength parametrization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedMetric {
    pub kind: MetricKind,
    pub n: usize,
    pub grid: RadialGrid,
    pub profile: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<Vec<f64>>,
}

/// Volume of the unit round `S^m`, `2π^{(m+1)/2} / Γ((m+1)/2)`.
pub fn sphere_area(m: usize) -> f64 {
    let pi = std::f64::consts::PI;
    2.0 * pi.powf((m as f64 + 1.0) / 2.0) / gamma_half((m + 1) as u32)
}

/// `Γ(k/2)` for a positive integer `k`.
fn gamma_half(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        (1..k / 2).map(|j| j as f64).product()
    } else {
        // Γ(j + 1/2) = √π (2j)! / (4^j j!)
        let j = (k - 1) / 2;
        let mut g = std::f64::consts::PI.sqrt();
        for i in 0..j {
            g *= i as f64 + 0.5;
        }
        g
    }
}

impl WarpedMetric {
    pub fn closed(n: usize, grid: RadialGrid, profile: Vec<f64>) -> Result<Self> {
        Self::build(MetricKind::ClosedSphere, n, grid, profile, None)
    }

    pub fn closed_with_radial(
        n: usize,
        grid: RadialGrid,
        profile: Vec<f64>,
        radial: Vec<f64>,
    ) -> Result<Self> {
        Self::build(MetricKind::ClosedSphere, n, grid, profile, Some(radial))
    }

    pub fn tube(n: usize, grid: RadialGrid, profile: Vec<f64>) -> Result<Self> {
        Self::build(MetricKind::Tube, n, grid, profile, None)
    }

    pub fn build(
        kind: MetricKind,
        n: usize,
        grid: RadialGrid,
        profile: Vec<f64>,
        radial: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = WarpedMetric { kind, n, grid, profile, radial };
        m.validate()?;
        Ok(m)
    }

    /// Round `S^n` of the given radius in arclength form.
    pub fn round_sphere(n: usize, radius: f64, points: usize) -> Result<Self> {
        ensure!(radius > 0.0, "radius must be positive");
        let grid = RadialGrid::new(0.0, std::f64::consts::PI * radius, points)?;
        let mut profile = grid.sample(|r| radius * (r / radius).sin());
        profile[0] = 0.0;
        profile[points - 1] = 0.0;
        Self::closed(n, grid, profile)
    }

    pub fn is_closed(&self) -> bool {
        self.kind == MetricKind::ClosedSphere
    }

    /// Closed spheres always close smoothly at both ends.
    pub fn pole_closure(&self) -> bool {
        self.is_closed()
    }

    /// Dimension of the round factor `S^m` multiplying `φ²`.
    pub fn fiber_dim(&self) -> usize {
        match self.kind {
            MetricKind::ClosedSphere => self.n - 1,
            MetricKind::Tube => self.n,
        }
    }

    /// Dimension of the whole manifold.
    pub fn dim(&self) -> usize {
        self.fiber_dim() + 1
    }

    pub fn len(&self) -> usize {
        self.grid.points
    }

    pub fn is_empty(&self) -> bool {
        self.grid.points == 0
    }

    pub fn radial_coeff(&self) -> Vec<f64> {
        match &self.radial {
            Some(a) => a.clone(),
            None => vec![1.0; self.grid.points],
        }
    }

    /// Parities of `(φ, a)` at the two ends.
    pub(crate) fn ends(&self) -> (End, End) {
        if self.is_closed() {
            (End::Odd, End::Even)
        } else {
            (End::Open, End::Open)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let np = self.grid.points;
        ensure!(self.n >= 2, "dimension n must be at least 2 (got {})", self.n);
        ensure!(
            self.profile.len() == np,
            "profile has {} samples but the grid has {} points",
            self.profile.len(),
            np
        );
        if let Some((i, _)) = self.profile.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::validation(format!("profile sample {i} is not finite")));
        }
        if let Some(a) = &self.radial {
            ensure!(a.len() == np, "radial coefficient has {} samples, grid has {}", a.len(), np);
            if let Some((i, _)) = a.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::validation(format!(
                    "radial coefficient must be positive and finite (sample {i})"
                )));
            }
        }
        match self.kind {
            MetricKind::Tube => {
                if let Some((i, v)) = self.profile.iter().enumerate().find(|(_, v)| **v <= 0.0) {
                    return Err(Error::validation(format!(
                        "tube profile must be positive (sample {i} = {v})"
                    )));
                }
            }
            MetricKind::ClosedSphere => {
                let scale = self.profile.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
                for &i in &[0, np - 1] {
                    ensure!(
                        self.profile[i].abs() <= 1e-10 * scale,
                        "closed profile must vanish at the poles (sample {i} = {})",
                        self.profile[i]
                    );
                }
                if let Some((i, v)) = self.profile[1..np - 1]
                    .iter()
                    .enumerate()
                    .find(|(_, v)| **v <= 0.0)
                {
                    return Err(Error::validation(format!(
                        "profile touches zero in the interior (sample {} = {v})",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Check `φ_s → ±1` at the poles.
    pub fn check_closure(&self, tol: f64) -> Result<()> {
        if !self.is_closed() {
            return Ok(());
        }
        let (ps, _) = self.arclength_derivatives();
        let np = self.len();
        let (l, r) = (ps[0], ps[np - 1]);
        ensure!(
            (l - 1.0).abs() <= tol && (r + 1.0).abs() <= tol,
            "closure invariant violated: phi_s = {l} at the left pole and {r} at the right pole (tolerance {tol})"
        );
        Ok(())
    }

    /// `(φ_s, φ_ss)`: derivatives with respect to arclength `ds = a dx`.
    pub fn arclength_derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.grid.h();
        let (pe, ae) = self.ends();
        let px = stencil::d1(&self.profile, h, pe, pe);
        let pxx = stencil::d2(&self.profile, h, pe, pe);
        match &self.radial {
            None => (px, pxx),
            Some(a) => {
                let ax = stencil::d1(a, h, ae, ae);
                let ps = px.iter().zip(a).map(|(p, a)| p / a).collect();
                let pss = (0..self.len())
                    .map(|i| (pxx[i] - px[i] * ax[i] / a[i]) / (a[i] * a[i]))
                    .collect();
                (ps, pss)
            }
        }
    }

    /// Volume density `a φ^m` (per unit volume of the round fiber).
    pub fn density(&self) -> Vec<f64> {
        let m = self.fiber_dim() as i32;
        let a = self.radial_coeff();
        self.profile.iter().zip(&a).map(|(p, a)| a * p.powi(m)).collect()
    }

    /// Total volume by fourth-order quadrature of the density.
    pub fn volume(&self) -> f64 {
        let c = self.cumulative_volume();
        c[c.len() - 1]
    }

    /// `V(x) = σ_m ∫_a^x a φ^m`, fourth order.
    pub fn cumulative_volume(&self) -> Vec<f64> {
        let d = self.density();
        let e = self.density_end();
        let s = sphere_area(self.fiber_dim());
        stencil::cumulative(&d, self.grid.h(), e, e)
            .into_iter()
            .map(|v| s * v)
            .collect()
    }

    /// Parity of the density at the ends.
    pub(crate) fn density_end(&self) -> End {
        if !self.is_closed() {
            End::Open
        } else if self.fiber_dim() % 2 == 1 {
            End::Odd
        } else {
            End::Even
        }
    }

    /// The metric `c² g`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.profile.iter_mut().for_each(|p| *p *= c);
        out.radial = Some(self.radial_coeff().iter().map(|a| a * c).collect());
        out
    }

    /// The metric `w(x)² g` for a positive radial function `w`.
    pub fn conformal(&self, w: &[f64]) -> Result<Self> {
        ensure!(w.len() == self.len(), "conformal factor length mismatch");
        ensure!(w.iter().all(|v| *v > 0.0 && v.is_finite()), "conformal factor must be positive");
        let mut out = self.clone();
        out.profile.iter_mut().zip(w).for_each(|(p, w)| *p *= w);
        out.radial = Some(self.radial_coeff().iter().zip(w).map(|(a, w)| a * w).collect());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((sphere_area(1) - 2.0 * pi).abs() < 1e-14);
        assert!((sphere_area(2) - 4.0 * pi).abs() < 1e-13);
        assert!((sphere_area(3) - 2.0 * pi * pi).abs() < 1e-13);
        assert!((sphere_area(4) - 8.0 * pi * pi / 3.0).abs() < 1e-12);
    }

    #[test]
    fn interior_zero_rejected() {
        let g = RadialGrid::new(0.0, std::f64::consts::PI, 64).unwrap();
        let mut p = g.sample(f64::sin);
        p[0] = 0.0;
        p[63] = 0.0;
        p[30] = 0.0;
        assert!(WarpedMetric::closed(2, g, p).is_err());
    }

    #[test]
    fn closure_check_flags_cone_points() {
        let g = RadialGrid::new(0.0, std::f64::consts::PI, 256).unwrap();
        let mut p = g.sample(|x| 0.8 * x.sin());
        p[255] = 0.0;
        let m = WarpedMetric::closed(2, g, p).unwrap();
        assert!(m.check_closure(1e-4).is_err());
    }
}
