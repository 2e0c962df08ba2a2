//! Minimal and mean-convex PSC collars over an equal-area path of S² metrics.

use horizonforge::collar::{build_mean_convex_collar, build_minimal_collar, mean_convex_conclusions};
use horizonforge::{paths, profiles, Result};

fn main() -> Result<()> {
    let path = paths::moser_twist(&profiles::bumpy_path(2, &[0.15], &[-0.1], 17, 257)?)?.path;
    let (c, rep) = build_minimal_collar(&path, 0.5)?;
    println!("minimal collar: amplitude A = {:.3}, min R_h = {:.6} at (x, t) = {:?}", c.amplitude, rep.min_r, rep.min_r_location);

    for eps in [0.2, 0.1, 0.05] {
        let (c, _) = build_mean_convex_collar(&path, 0.5, eps, false, false)?;
        let con = mean_convex_conclusions(&c, &path)?;
        println!(
            "mean-convex collar eps = {eps}: left boundary exact {}, min R (t > 0) = {:.3e}, min H (t > 0) = {:.3e}",
            con.left_boundary_exact, con.min_r_off_left, con.min_h_positive_t
        );
    }
    Ok(())
}
