use super::metric::{sphere_area, WarpedMetric};

/// Measure-weighted three-point discretization of the radial Laplacian
/// `(a φ^m)^{-1} ∂_x (φ^m a^{-1} ∂_x u)`.
///
/// `flux[i]` couples nodes `i` and `i+1`; `mass[i]` is the cell volume of node `i`
/// (per unit fiber volume). Pole nodes get the exact cell mass of a pure power
/// `x^m`; open ends get half cells. The `u' = 0` condition at ends is natural.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialOperator {
    pub h: f64,
    pub flux: Vec<f64>,
    pub mass: Vec<f64>,
    /// Volume of the unit round fiber.
    pub sigma: f64,
}

impl RadialOperator {
    pub fn new(m: &WarpedMetric) -> Self {
        let a = m.radial_coeff();
        Self::from_parts(m.fiber_dim(), &a, &m.profile, m.grid.h(), m.is_closed())
    }

    pub fn from_parts(fiber: usize, a: &[f64], phi: &[f64], h: f64, poles: bool) -> Self {
        let n = phi.len();
        let q = fiber as i32;
        let mut flux = Vec::with_capacity(n - 1);
        let mut half_density = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let p = 0.5 * (phi[i] + phi[i + 1]);
            let am = 0.5 * (a[i] + a[i + 1]);
            flux.push(p.powi(q) / am);
            half_density.push(am * p.powi(q));
        }
        let mut mass: Vec<f64> = (0..n).map(|i| h * a[i] * phi[i].powi(q)).collect();
        if poles {
            let w = 1.0 / (fiber as f64 + 1.0);
            mass[0] = 0.5 * h * half_density[0] * w;
            mass[n - 1] = 0.5 * h * half_density[n - 2] * w;
        } else {
            mass[0] *= 0.5;
            mass[n - 1] *= 0.5;
        }
        RadialOperator { h, flux, mass, sigma: sphere_area(fiber) }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `Δu` at every node.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..n - 1 {
            let f = self.flux[i] * (u[i + 1] - u[i]) / self.h;
            out[i] += f;
            out[i + 1] -= f;
        }
        out.iter_mut().zip(&self.mass).for_each(|(o, m)| *o /= m);
        out
    }

    /// Dirichlet energy `∫|∇u|² dμ`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let e: f64 = (0..self.len() - 1)
            .map(|i| {
                let d = u[i + 1] - u[i];
                self.flux[i] * d * d
            })
            .sum();
        self.sigma * e / self.h
    }

    /// `∫ f dμ`.
    pub fn integral(&self, f: &[f64]) -> f64 {
        self.sigma * f.iter().zip(&self.mass).map(|(f, m)| f * m).sum::<f64>()
    }

    pub fn volume(&self) -> f64 {
        self.sigma * self.mass.iter().sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    #[test]
    fn laplacian_of_height_function_on_round_sphere() {
        // On the unit S², Δ cos ρ = -2 cos ρ.
        let m = WarpedMetric::round_sphere(2, 1.0, 1025).unwrap();
        let op = RadialOperator::new(&m);
        let u = m.grid.sample(f64::cos);
        let lu = op.apply(&u);
        let err = (1..1024).map(|i| (lu[i] + 2.0 * u[i]).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn volume_second_order() {
        let pi = std::f64::consts::PI;
        let e = |n| {
            let m = WarpedMetric::round_sphere(2, 1.0, n).unwrap();
            (RadialOperator::new(&m).volume() - 4.0 * pi).abs()
        };
        let r = e(257) / e(513);
        assert!((3.5..4.5).contains(&r), "ratio {r}");
        let g = RadialGrid::new(0.0, 1.0, 9).unwrap();
        assert_eq!(g.points, 9);
    }
}
