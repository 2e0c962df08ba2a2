use serde::{Deserialize, Serialize};

use super::metric::{MetricKind, WarpedMetric};
use crate::error::{ensure, Error, Result};
use crate::stencil;

/// Extrinsic and ambient curvature along a family of slices.
///
/// `sff_coeff` is the eigenvalue of the second fundamental form on the round
/// directions, `sff_radial` the one along the radial direction (equal to
/// `sff_coeff` for round slices of a tube).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceGeometry {
    pub sff_coeff: Vec<f64>,
    pub sff_radial: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Vec<f64>,
    pub sff_norm_sq: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub psc: Vec<bool>,
}

/// Scalar curvature of `a² dx² + φ² g_{S^m}`.
pub fn scalar_curvature(m: &WarpedMetric) -> Vec<f64> {
    let q = m.fiber_dim() as f64;
    let np = m.len();
    let (ps, pss) = m.arclength_derivatives();
    let mut t1 = vec![0.0; np];
    let mut t2 = vec![0.0; np];
    let closed = m.is_closed();
    let (lo, hi) = if closed { (1, np - 1) } else { (0, np) };
    for i in lo..hi {
        let p = m.profile[i];
        t1[i] = (1.0 - ps[i] * ps[i]) / (p * p);
        t2[i] = pss[i] / p;
    }
    if closed {
        stencil::fill_pole_limits(&mut t1, true, true);
        stencil::fill_pole_limits(&mut t2, true, true);
    }
    (0..np).map(|i| q * ((q - 1.0) * t1[i] - 2.0 * t2[i])).collect()
}

/// Round slices of a tube `f(t)² g_{S^n} + dt²`, outward normal `+∂_t`.
pub fn tube_geometry(m: &WarpedMetric) -> Result<SliceGeometry> {
    ensure!(m.kind == MetricKind::Tube, "tube_geometry requires a tube metric");
    m.validate()?;
    let n = m.n as f64;
    let (fs, fss) = m.arclength_derivatives();
    let r = scalar_curvature(m);
    let f = &m.profile;
    let sff: Vec<f64> = fs.iter().zip(f).map(|(d, f)| d / f).collect();
    let psc = (0..m.len())
        .map(|i| (n - 1.0) * (1.0 - fs[i] * fs[i]) - 2.0 * f[i] * fss[i] > 0.0)
        .collect();
    Ok(SliceGeometry {
        h: sff.iter().map(|s| n * s).collect(),
        sff_norm_sq: sff.iter().map(|s| n * s * s).collect(),
        sff_radial: sff.clone(),
        sff_coeff: sff,
        r,
        psc,
    })
}

/// Scalar curvature of a closed warped sphere, with the pole limits.
pub fn warped_closed_scalar(m: &WarpedMetric) -> Result<Vec<f64>> {
    ensure!(m.is_closed(), "warped_closed_scalar requires a closed_sphere metric");
    m.validate()?;
    m.check_closure(crate::config::Tolerances::default().closure)?;
    Ok(scalar_curvature(m))
}

/// Scalar and boundary mean curvature of `ū = u^{4/(n-2)} g`.
pub fn conformal_transform(
    r_g: &[f64],
    u: &[f64],
    laplacian_u: &[f64],
    n: usize,
    normal_derivative_u: &[f64],
    h: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    ensure!(n >= 3, "conformal_transform needs n >= 3");
    let len = u.len();
    ensure!(
        r_g.len() == len
            && laplacian_u.len() == len
            && normal_derivative_u.len() == len
            && h.len() == len,
        "sample arrays must share one length"
    );
    if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::validation(format!("conformal factor must be positive (sample {i} = {v})")));
    }
    let nf = n as f64;
    let c = 4.0 * (nf - 1.0) / (nf - 2.0);
    let pr = -(nf + 2.0) / (nf - 2.0);
    let ph = -nf / (nf - 2.0);
    let rbar = (0..len)
        .map(|i| u[i].powf(pr) * (-c * laplacian_u[i] + r_g[i] * u[i]))
        .collect();
    let hbar = (0..len)
        .map(|i| u[i].powf(ph) * (0.5 * c * normal_derivative_u[i] + h[i] * u[i]))
        .collect();
    Ok((rbar, hbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    #[test]
    fn round_sphere_curvature_is_constant() {
        let m = WarpedMetric::round_sphere(2, 1.0, 2048).unwrap();
        let r = warped_closed_scalar(&m).unwrap();
        let (lo, hi) = r.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(hi - lo < 1e-6, "spread {}", hi - lo);
        assert!((r[1000] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn round_three_sphere_radius() {
        let r0 = 1.7;
        let m = WarpedMetric::round_sphere(3, r0, 2048).unwrap();
        let r = warped_closed_scalar(&m).unwrap();
        let want = 6.0 / (r0 * r0);
        assert!(r.iter().all(|v| (v - want).abs() < 1e-7 * want));
    }

    #[test]
    fn cylinder_and_cone() {
        let g = RadialGrid::new(1.0, 2.0, 64).unwrap();
        let cyl = tube_geometry(&WarpedMetric::tube(2, g, vec![1.0; 64]).unwrap()).unwrap();
        assert!(cyl.r.iter().all(|v| (v - 2.0).abs() < 1e-12));
        assert!(cyl.h.iter().all(|v| v.abs() < 1e-12));
        let cone = tube_geometry(&WarpedMetric::tube(3, g, g.xs()).unwrap()).unwrap();
        assert!(cone.r.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn conformal_constant_scaling() {
        let (rb, hb) = conformal_transform(&[6.0], &[2.0], &[0.0], 3, &[0.0], &[1.0]).unwrap();
        assert!((rb[0] - 0.375).abs() < 1e-15);
        // lengths scale by c^{2/(n-2)} = 4, so H scales by 1/4
        assert!((hb[0] - 0.25).abs() < 1e-15);
    }
}
