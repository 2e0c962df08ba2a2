//! The deterministic invariant suite behind `horizonforge check`.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::bartnik;
use crate::collar;
use crate::config::Tolerances;
use crate::error::Result;
use crate::flow;
use crate::geomcore::{scalar_curvature, tube_geometry, WarpedMetric};
use crate::paths;
use crate::profiles;
use crate::schwarzschild::{self, SchwarzschildOrbit};
use crate::smoothing::{self, Check, CutoffKind, RadialCollar};
use crate::spectral;

fn check(name: &str, pass: bool, value: f64) -> Check {
    Check { name: name.to_string(), pass, value }
}

/// One line per check: `PASS|FAIL name value`, value with 17 significant digits.
pub fn render(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(s, "{} {} {:.16e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(s, "summary {} passed {} failed", checks.len() - failed, failed);
    s
}

pub fn spectral_checks(m: &WarpedMetric, k: f64, tol: &Tolerances) -> Result<Vec<Check>> {
    let res = spectral::lambda1_with(m, k, tol)?;
    let (lo, hi) = spectral::curvature_sandwich(m);
    let q = res.lambda1 / k;
    let slack = 1e-9 * hi.abs().max(1.0);
    let norm = crate::geomcore::RadialOperator::new(m).integral(&res.eigenfunction.iter().map(|u| u * u).collect::<Vec<_>>());
    let v = spectral::MembershipVerdict::new(res.lambda1, tol.membership);
    Ok(vec![
        check("spectral.residual", res.residual <= tol.eigen_residual, res.residual),
        check("spectral.eigenfunction_positive", res.eigenfunction.iter().all(|u| *u > 0.0), res.eigenfunction.iter().cloned().fold(f64::MAX, f64::min)),
        check("spectral.normalization", (norm - 1.0).abs() <= 1e-8, (norm - 1.0).abs()),
        check("spectral.sandwich_lower", lo <= q + slack, q - lo),
        check("spectral.sandwich_upper", q <= hi + slack, hi - q),
        check("spectral.membership_consistent", !v.in_strict || v.in_weak, res.lambda1),
    ])
}

/// Largest gap between the closed-form orbit and RK4 for the equality case on `[1, 10]`.
pub fn orbit_rk4_gap(n: usize) -> Result<f64> {
    let (x0, y0) = (1.0, 0.3);
    let o = schwarzschild::orbit(x0, y0, n)?;
    let pts = schwarzschild::integrate_equality(x0, y0, n, 10.0, 1e-3);
    Ok(pts.iter().map(|(x, y)| (o.y(*x).unwrap_or(0.0) - y).abs()).fold(0.0, f64::max))
}

/// Inner band on the orbit through `(x0, y0)` over `[x0, x0 + 0.5]`, outer band from
/// `x0 + 0.5 + gap` on the orbit with initial slope `y2`.
pub fn phase_pair(n: usize, x0: f64, y0: f64, gap: f64, y2: f64) -> Result<(schwarzschild::PlanarProfile, schwarzschild::PlanarProfile)> {
    let x1 = x0 + 0.5;
    let x2 = x1 + gap;
    let p1 = schwarzschild::orbit(x0, y0, n)?.band(x0, x1, 64)?;
    let p2 = schwarzschild::orbit(x2, y2, n)?.band(x2, x2 + 1.0, 64)?;
    Ok((p1, p2))
}

/// `(feasible, glue succeeded)` for one pair.
pub fn gluing_agreement(p1: &schwarzschild::PlanarProfile, p2: &schwarzschild::PlanarProfile) -> Result<(bool, bool)> {
    Ok((schwarzschild::gluing_feasible(p1, p2)?, schwarzschild::glue_profiles(p1, p2).is_ok()))
}

fn geometry_checks(points: usize) -> Result<Vec<Check>> {
    let mut out = vec![];
    let r = scalar_curvature(&profiles::round(2, 1.0, points)?);
    let spread = r.iter().cloned().fold(f64::MIN, f64::max) - r.iter().cloned().fold(f64::MAX, f64::min);
    out.push(check("geomcore.round_pole_spread", spread < 1e-6, spread));
    let cyl = WarpedMetric::tube(2, crate::grid::RadialGrid::new(0.0, 1.0, 64)?, vec![1.0; 64])?;
    let g = tube_geometry(&cyl)?;
    let e = g.r.iter().map(|r| (r - 2.0).abs()).chain(g.h.iter().map(|h| h.abs())).fold(0.0, f64::max);
    out.push(check("geomcore.cylinder", e == 0.0, e));
    let tube = SchwarzschildOrbit::from_mass(0.5, 2).tube(1.2, 2.0, 4096)?;
    let g = tube_geometry(&tube)?;
    let e = g.r.iter().map(|r| r.abs()).fold(0.0, f64::max);
    out.push(check("geomcore.schwarzschild_tube_flat", e <= 1e-6, e));
    let e = g.h.iter().zip(&g.sff_coeff).map(|(h, s)| (h - 2.0 * s).abs()).fold(0.0, f64::max);
    out.push(check("geomcore.tube_h_trace", e <= 1e-12, e));
    Ok(out)
}

fn schwarzschild_checks() -> Result<Vec<Check>> {
    let mut out = vec![];
    for n in [2, 3, 4] {
        let gap = orbit_rk4_gap(n)?;
        out.push(check(&format!("schwarzschild.orbit_vs_rk4.n{n}"), gap <= 1e-8, gap));
        let o = SchwarzschildOrbit::from_mass(0.5, n);
        let xh = o.horizon_radius.unwrap_or(0.0);
        let band = o.band(xh, 10.0 * xh, 512)?;
        let m = schwarzschild::adm_mass(&band)?;
        let pb = schwarzschild::penrose_bound(crate::geomcore::sphere_area(n) * xh.powi(n as i32), n)?;
        out.push(check(&format!("schwarzschild.adm_equals_penrose.n{n}"), (m - pb).abs() <= 1e-12, (m - pb).abs()));
    }
    let mut agree = 0;
    let mut total = 0;
    for &y0 in &[0.2, 0.6] {
        for &gap in &[0.1, 0.5] {
            for &y2 in &[0.1, 0.4, 0.7, 0.95] {
                let (p1, p2) = phase_pair(2, 1.0, y0, gap, y2)?;
                let (f, g) = gluing_agreement(&p1, &p2)?;
                total += 1;
                agree += (f == g) as usize;
            }
        }
    }
    out.push(check("schwarzschild.gluing_equivalence", agree == total, (total - agree) as f64));
    for mu in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let tube = SchwarzschildOrbit::from_mass(0.5, 2).tube(1.2, 2.0, 4096)?;
        let m = paths::round_isotopy_metric(&tube, 0.0, mu)?;
        let r = scalar_curvature(&m).into_iter().fold(f64::MAX, f64::min);
        out.push(check(&format!("schwarzschild.isotopy_psc.mu{mu}"), r > 0.0, r));
    }
    Ok(out)
}

fn path_checks(points: usize) -> Result<Vec<Check>> {
    let mut out = vec![];
    let g0 = profiles::round(2, 1.0, points.max(1025))?;
    let xs = g0.grid.xs();
    let u: Vec<f64> = xs.iter().map(|r| 0.3 * r.cos()).collect();
    let f: Vec<f64> = xs.iter().map(|r| 1.0 + 0.2 * (2.0 * r).cos()).collect();
    let (_, lin) = paths::conformal_path_2d(&g0, &u, 0.5, Some(&f))?;
    let d = lin.map(|l| l.max_affine_deviation).unwrap_or(f64::NAN);
    out.push(check("paths.rayleigh_linearity", d <= 1e-10, d));
    let path = profiles::bumpy_path(2, &[0.1], &[-0.1], 9, 257)?;
    let tw = paths::moser_twist(&path)?;
    out.push(check("paths.twist_volume_form", tw.max_deviation() <= 1e-6, tw.max_deviation()));
    let (_, rep) = collar::build_minimal_collar(&tw.path, 0.5)?;
    out.push(check("collar.minimal_psc", rep.min_r > 0.0, rep.min_r));
    // slices share one volume form, so H vanishes up to the twist error
    let hmax = rep.slice_h.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    out.push(check("collar.minimal_slices_h", hmax <= 1e-6, hmax));
    let (mc, _) = collar::build_mean_convex_collar(&tw.path, 0.5, 0.1, false, false)?;
    let con = collar::mean_convex_conclusions(&mc, &tw.path)?;
    out.push(check("collar.mean_convex_left_boundary", con.left_boundary_exact, con.max_abs_h_left));
    out.push(check("collar.mean_convex_psc", con.min_r_off_left > 0.0, con.min_r_off_left));
    out.push(check("collar.mean_convex_h_positive", con.min_h_positive_t > 0.0, con.min_h_positive_t));
    Ok(out)
}

fn smoothing_checks() -> Result<Vec<Check>> {
    let mut out = vec![];
    for delta in [0.2, 0.1, 0.01] {
        for epsilon in [0.5, 0.25] {
            let c = smoothing::build_cutoff(CutoffKind::LogCutoff { delta, epsilon }, 4097)?;
            out.push(check(&format!("smoothing.log_cutoff.d{delta}.e{epsilon}"), c.all_pass(), 0.0));
        }
    }
    for eps1 in [0.25, 0.1, 0.04] {
        let c = smoothing::build_cutoff(CutoffKind::Chi { eps1 }, 4097)?;
        out.push(check(&format!("smoothing.chi.e{eps1}"), c.all_pass(), 0.0));
    }
    let eta = 1e-2;
    let g0 = profiles::round(2, 1.0, 257)?;
    let product = RadialCollar::product(g0, 0.5, 4097)?;
    let schw = RadialCollar::schwarzschild_inward(0.5, 1.5, 0.3, 2, 4097, 257)?;
    for (label, col, c) in [("product", &product, 1.0), ("schwarzschild", &schw, smoothing::c_normal_threshold(&schw).max(0.0))] {
        let r = smoothing::make_c_normal(col, c, eta, 0.05, 1e-3)?;
        for k in r.checks(eta) {
            out.push(check(&format!("smoothing.{label}.c_normal.{}", k.name), k.pass, k.value));
        }
        for (tag, k) in [("same", r.cnormal.sff0), ("shifted", r.cnormal.sff0 - 0.1)] {
            let p = smoothing::prescribe_sff(&r.cnormal, k, eta, 0.01)?;
            for ck in p.checks(eta) {
                out.push(check(&format!("smoothing.{label}.prescribe_{tag}.{}", ck.name), ck.pass, ck.value));
            }
        }
    }
    Ok(out)
}

fn flow_checks() -> Result<Vec<Check>> {
    let mut out = vec![];
    let g = profiles::round(3, 1.0, 129)?;
    let tr = flow::evolve(&g, 1e-3, 0.2)?;
    let t = *tr.times.last().unwrap_or(&0.0);
    let s = tr.states.last().expect("trajectory has states");
    let r = s.grid.b / PI;
    let e = (r * r - (1.0 - 4.0 * t)).abs();
    out.push(check("flow.round_closed_form", e <= 1e-6, e));
    let p = profiles::perturbed(3, 0.2, 129)?;
    let tr = flow::evolve(&p, 2e-4, 0.05)?;
    let d = flow::monotonicity_report(&tr, 0.5)?;
    let m = d.iter().cloned().fold(f64::MAX, f64::min);
    out.push(check("flow.lambda1_increasing", m > 0.0, m));
    let v = flow::volume_identity_error(&tr)?;
    out.push(check("flow.volume_identity", v <= 1e-5, v));
    out.push(check("flow.refuses_small_k", flow::monotonicity_report(&tr, 0.1).is_err(), 0.1));
    Ok(out)
}

fn bartnik_checks(points: usize, jobs: usize) -> Result<Vec<Check>> {
    let h = profiles::round(2, 1.0, points)?;
    let eps = bartnik::dyadic_epsilons(4);
    let seq = bartnik::minimizing_sequence_jobs(&h, &eps, jobs)?;
    let tol = Tolerances::default();
    let mut out = vec![];
    for e in &seq {
        out.push(check(&format!("bartnik.extension.eps{}", e.epsilon), e.checks.passes(e.mass, &tol), e.mass));
    }
    let dec = seq.windows(2).all(|w| w[1].mass < w[0].mass);
    out.push(check("bartnik.masses_decrease", dec, seq[seq.len() - 1].mass - 0.5));
    Ok(out)
}

/// Run every module's invariants. `points` sizes the spectral and Bartnik grids.
pub fn check_suite(points: usize, jobs: usize, tol: &Tolerances) -> Result<Vec<Check>> {
    let mut out = vec![];
    for (n, k) in [(2, 0.5), (3, 0.25)] {
        let m = profiles::round(n, 1.0, points)?;
        let l = spectral::lambda1_with(&m, k, tol)?.lambda1;
        let exact = k * (n * (n - 1)) as f64;
        let e = (l - exact).abs() / exact;
        out.push(check(&format!("spectral.round.n{n}.k{k}"), e <= 1e-8, e));
    }
    for (label, m) in [("dumbbell", profiles::dumbbell(2, 0.3, points)?), ("bumpy_s3", profiles::bumpy(3, &[0.2, -0.1], points)?)] {
        for c in spectral_checks(&m, 0.5, tol)? {
            out.push(check(&format!("{label}.{}", c.name), c.pass, c.value));
        }
    }
    out.extend(geometry_checks(points)?);
    out.extend(schwarzschild_checks()?);
    out.extend(path_checks(points)?);
    out.extend(smoothing_checks()?);
    out.extend(flow_checks()?);
    out.extend(bartnik_checks(points.min(512), jobs)?);
    Ok(out)
}
