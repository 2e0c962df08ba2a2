//! Scalar and mean curvature of tubes, closed warped spheres, and conformal changes.

use horizonforge::geomcore::{conformal_transform, tube_geometry, warped_closed_scalar, WarpedMetric};
use horizonforge::schwarzschild::SchwarzschildOrbit;
use horizonforge::{profiles, RadialGrid, Result};

fn spread(v: &[f64]) -> (f64, f64) {
    (v.iter().cloned().fold(f64::MAX, f64::min), v.iter().cloned().fold(f64::MIN, f64::max))
}

fn main() -> Result<()> {
    let cyl = WarpedMetric::tube(2, RadialGrid::new(0.0, 1.0, 64)?, vec![1.0; 64])?;
    let g = tube_geometry(&cyl)?;
    println!("cylinder S²×I: R in {:?}, H in {:?}", spread(&g.r), spread(&g.h));

    let grid = RadialGrid::new(1.0, 2.0, 256)?;
    let cone = WarpedMetric::tube(3, grid, grid.xs())?;
    println!("cone over S³: R in {:?}", spread(&tube_geometry(&cone)?.r));

    let schw = SchwarzschildOrbit::from_mass(0.5, 2).tube(1.2, 2.0, 4096)?;
    let g = tube_geometry(&schw)?;
    println!("Schwarzschild tube (mass 1/2): max|R| = {:.2e}, H > 0: {}", g.r.iter().fold(0.0f64, |m, r| m.max(r.abs())), g.h.iter().all(|h| *h > 0.0));

    let s3 = profiles::round(3, 2.0, 1024)?;
    println!("round S³ radius 2: R in {:?} (6/r² = 1.5)", spread(&warped_closed_scalar(&s3)?));

    // constant conformal factor u = 2 on the unit S³: R̄ = R/16
    let n = 128;
    let (r, hb) = conformal_transform(&vec![6.0; n], &vec![2.0; n], &vec![0.0; n], 3, &vec![0.0; n], &vec![1.0; n])?;
    println!("u = 2 on unit S³: R̄ = {} , H̄ = {}", r[0], hb[0]);
    Ok(())
}
