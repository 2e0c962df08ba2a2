//! Conformal paths: Rayleigh-energy linearity on S², the Yamabe contraction path
//! on S³, and the volume-form twist.

use horizonforge::paths::{self, MetricPath};
use horizonforge::{profiles, spectral, RadialGrid, Result};

fn main() -> Result<()> {
    let g0 = profiles::round(2, 1.0, 2048)?;
    let xs = g0.grid.xs();
    let u: Vec<f64> = xs.iter().map(|r| 0.3 * r.cos() + 0.1 * (2.0 * r).cos()).collect();
    let f: Vec<f64> = xs.iter().map(|r| 1.0 + 0.2 * (2.0 * r).cos()).collect();
    let (_, lin) = paths::conformal_path_2d(&g0, &u, 0.5, Some(&f))?;
    let lin = lin.expect("test function given");
    println!("Rayleigh energy at t = {:?}:", lin.t);
    println!("  {:?}\n  affine deviation {:.1e}", lin.energy, lin.max_affine_deviation);

    let s3 = profiles::perturbed(3, 0.2, 257)?;
    let path = MetricPath::from_fn(RadialGrid::new(0.0, 1.0, 9)?, |t| paths::yamabe_contraction_path(&s3, t))?;
    println!("\nYamabe contraction path on a perturbed S³:");
    for (t, g) in path.t_grid.xs().iter().zip(&path.metrics) {
        let (v, _) = spectral::conformal_sign_check(g)?;
        println!("  t = {t:.3}: conformal lambda1 = {:.6}, volume = {:.6}", v.lambda1, g.volume());
    }

    let bumpy = profiles::bumpy_path(2, &[0.1], &[-0.1], 9, 513)?;
    let tw = paths::moser_twist(&bumpy)?;
    println!("\ntwisted bumpy path: volume-form deviation {:.1e}", tw.max_deviation());
    Ok(())
}
