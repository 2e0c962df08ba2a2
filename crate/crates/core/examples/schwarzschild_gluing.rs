//! Schwarzschild orbits in the phase plane, the gluing criterion, bending, ADM mass.

use horizonforge::schwarzschild::{self, SchwarzschildOrbit};
use horizonforge::suite::{orbit_rk4_gap, phase_pair};
use horizonforge::Result;

fn main() -> Result<()> {
    for n in [2, 3, 4] {
        println!("n = {n}: closed-form orbit vs RK4 on [1, 10], max gap {:.1e}", orbit_rk4_gap(n)?);
    }

    let o = SchwarzschildOrbit::from_mass(0.5, 2);
    let xh = o.horizon_radius.expect("positive mass has a horizon");
    let band = o.band(xh, 10.0 * xh, 512)?;
    let area = 4.0 * std::f64::consts::PI * xh * xh;
    println!("\nmass 1/2 band: adm_mass = {:.15}, penrose_bound = {:.15}", schwarzschild::adm_mass(&band)?, schwarzschild::penrose_bound(area, 2)?);

    println!("\ngluing: feasible <=> a strictly PSC bridge exists");
    for y2 in [0.3, 0.7, 0.95] {
        let (p1, p2) = phase_pair(2, 1.0, 0.6, 0.5, y2)?;
        let feasible = schwarzschild::gluing_feasible(&p1, &p2)?;
        let glued = schwarzschild::glue_profiles(&p1, &p2);
        println!("  outer slope {y2}: feasible = {feasible}, glued = {}", glued.is_ok());
    }

    let p = schwarzschild::bend_and_glue(0.5, 0.6, 1.5, 3.0, 2)?;
    let margin = p.psc_margin().into_iter().fold(f64::MAX, f64::min);
    println!("\nbend 0.5 -> 0.6: adm_mass = {:.12}, min PSC margin = {margin:.2e}", schwarzschild::adm_mass(&p)?);

    let (r, u) = schwarzschild::torpedo_cap(0.5, 0.0, 2.0, 8)?;
    println!("\ntorpedo cap samples (rho, u):");
    for (r, u) in r.iter().zip(&u) {
        println!("  {r:.4} {u:.6}");
    }
    Ok(())
}
