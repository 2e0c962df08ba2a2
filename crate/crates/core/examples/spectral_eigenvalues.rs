//! λ₁(-Δ + kR) on round and deformed spheres, the curvature sandwich, and the
//! two-sided Dirichlet bound on a band.

use horizonforge::profiles;
use horizonforge::spectral::{self, curvature_sandwich, dirichlet_lambda1_bounds};
use horizonforge::Result;

fn main() -> Result<()> {
    for n in [2, 3] {
        for k in [0.125, 0.25, 0.5, 1.0] {
            let r = spectral::lambda1(&profiles::round(n, 1.0, 2048)?, k)?;
            let exact = k * (n * (n - 1)) as f64;
            println!("round S^{n}  k = {k:<5}  lambda1 = {:.12}  rel. error {:.1e}", r.lambda1, (r.lambda1 - exact).abs() / exact);
        }
    }

    let dumbbell = profiles::dumbbell(2, 0.3, 2048)?;
    let k = 0.5;
    let r = spectral::lambda1(&dumbbell, k)?;
    let (lo, avg) = curvature_sandwich(&dumbbell);
    println!("\ndumbbell S²: min R = {lo:.6} <= lambda1/k = {:.6} <= avg R = {avg:.6}", r.lambda1 / k);
    let v = spectral::membership(&dumbbell, k)?;
    println!("in M^(>0)_k: {}, in M^(>=0)_k: {}", v.in_strict, v.in_weak);

    // Dirichlet problem on the left half, with a cutoff supported there
    let g = dumbbell.grid;
    let mid = 0.5 * (g.a + g.b);
    let eta: Vec<f64> = g.xs().iter().map(|&x| if x < mid { (std::f64::consts::PI * x / mid).sin().powi(2) } else { 0.0 }).collect();
    let b = dirichlet_lambda1_bounds(&dumbbell, k, (g.a, mid), &eta)?;
    println!(
        "left half: lambda1 = {:.6} <= lambda1_Dir = {:.6} <= {:.6}  (holds: {})",
        b.lambda1, b.dirichlet_lambda1, b.upper_bound, b.holds
    );
    Ok(())
}
