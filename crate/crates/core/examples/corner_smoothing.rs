//! Cutoff functions, the C-normal deformation and boundary second fundamental
//! form prescription on product and Schwarzschild collars.

use horizonforge::smoothing::{self, build_cutoff, CutoffKind, RadialCollar};
use horizonforge::{profiles, Result};

fn main() -> Result<()> {
    let log = build_cutoff(CutoffKind::LogCutoff { delta: 0.1, epsilon: 0.25 }, 4097)?;
    let chi = build_cutoff(CutoffKind::Chi { eps1: 0.1 }, 4097)?;
    println!("log cutoff invariants pass: {}, chi invariants pass: {}", log.all_pass(), chi.all_pass());

    let eta = 1e-2;
    let g0 = profiles::round(2, 1.0, 257)?;
    let collars = [
        ("product", RadialCollar::product(g0, 0.5, 4097)?),
        ("schwarzschild", RadialCollar::schwarzschild_inward(0.5, 1.5, 0.3, 2, 4097, 257)?),
    ];
    for (name, col) in &collars {
        let c = if *name == "product" { 1.0 } else { smoothing::c_normal_threshold(col).max(0.0) };
        let r = smoothing::make_c_normal(col, c, eta, 0.05, 1e-3)?;
        println!("\n{name}: C0 = {:.4}, C = {c}, delta used {:.1e}", r.c0, r.delta);
        for k in r.checks(eta) {
            println!("  c-normal  {:<28} {} {:.2e}", k.name, if k.pass { "ok  " } else { "FAIL" }, k.value);
        }
        for target in [r.cnormal.sff0, r.cnormal.sff0 - 0.1] {
            let p = smoothing::prescribe_sff(&r.cnormal, target, eta, 0.01)?;
            for k in p.checks(eta) {
                println!("  k = {target:.3} {:<24} {} {:.2e}", k.name, if k.pass { "ok  " } else { "FAIL" }, k.value);
            }
        }
    }
    Ok(())
}
