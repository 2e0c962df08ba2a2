use horizonforge::io::{GridSpec, ProfileDocument};
use horizonforge::paths::{concatenate, moser_twist};
use horizonforge::schwarzschild::{adm_mass, bend_and_glue, SchwarzschildOrbit};
use horizonforge::smoothing::{build_cutoff, make_c_normal, CNormalCollar, CutoffKind};
use horizonforge::spectral::{curvature_sandwich, lambda1, rayleigh_quotient};
use horizonforge::{profiles, suite, RadialGrid};
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.2f64..0.2, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn lambda1_scales_inversely_with_area(c in coeffs(), s in 0.3f64..3.0, k in 0.0f64..2.0) {
        let g = profiles::bumpy(2, &c, 513).unwrap();
        let l = lambda1(&g, k).unwrap().lambda1;
        let ls = lambda1(&g.scaled(s), k).unwrap().lambda1;
        prop_assert!((ls * s * s - l).abs() <= 1e-9 * (1.0 + l.abs()), "{} vs {}", ls * s * s, l);
    }

    #[test]
    fn lambda1_lies_in_curvature_sandwich(c in coeffs(), n in 2usize..4, k in 0.05f64..2.0) {
        let g = profiles::bumpy(n, &c, 257).unwrap();
        let l = lambda1(&g, k).unwrap().lambda1;
        let (lo, avg) = curvature_sandwich(&g);
        prop_assert!(k * lo <= l + 1e-9 && l <= k * avg + 1e-9, "{} <= {} <= {}", k * lo, l, k * avg);
    }

    #[test]
    fn rayleigh_quotient_bounds_lambda1(c in coeffs(), k in 0.0f64..1.5, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let g = profiles::bumpy(2, &c, 257).unwrap();
        let l = lambda1(&g, k).unwrap().lambda1;
        let f: Vec<f64> = g.grid.xs().iter().map(|x| 1.0 + a * x.cos() + b * (2.0 * x).cos()).collect();
        prop_assert!(rayleigh_quotient(&g, k, &f) >= l - 1e-10);
    }

    #[test]
    fn eigenfunction_is_positive_and_normalized(c in coeffs(), k in 0.0f64..1.5) {
        let r = lambda1(&profiles::bumpy(3, &c, 257).unwrap(), k).unwrap();
        prop_assert!(r.eigenfunction.iter().all(|u| *u > 0.0));
        prop_assert!(r.residual <= 1e-10);
    }

    #[test]
    fn orbit_constant_is_conserved(mass in 0.05f64..2.0, n in 2usize..5) {
        let o = SchwarzschildOrbit::from_mass(mass, n);
        let x0 = o.horizon_radius.unwrap_or(0.0) * 1.01 + 0.01;
        let band = o.band(x0, 4.0 * x0 + 1.0, 256).unwrap();
        for c in band.orbit_constants() {
            prop_assert!((0.5 * c - mass).abs() <= 1e-9 * mass.max(1.0));
        }
    }

    #[test]
    fn bending_reaches_target_mass(m1 in 0.1f64..1.0, dm in 0.05f64..1.0) {
        let m2 = m1 + dm;
        let rho1 = 1.5 * 2.0 * m1;
        let rho2 = (2.0 * m2).max(rho1) * 1.5;
        let p = bend_and_glue(m1, m2, rho1, rho2, 2).unwrap();
        prop_assert!((adm_mass(&p).unwrap() - m2).abs() <= 1e-9 * m2);
        prop_assert!(p.psc_margin().iter().all(|v| *v >= -1e-12));
    }

    #[test]
    fn gluing_feasibility_matches_construction(x0 in 0.8f64..2.0, y0 in 0.1f64..0.9, gap in 0.05f64..1.0, y2 in 0.05f64..0.99) {
        let (p1, p2) = suite::phase_pair(2, x0, y0, gap, y2).unwrap();
        let (feasible, glued) = suite::gluing_agreement(&p1, &p2).unwrap();
        prop_assert_eq!(feasible, glued);
    }

    #[test]
    fn cutoffs_meet_their_contracts(delta in 0.01f64..0.24, epsilon in 0.05f64..0.95, eps1 in 0.02f64..0.45) {
        let log = build_cutoff(CutoffKind::LogCutoff { delta, epsilon }, 8193).unwrap();
        let bad: Vec<_> = log.checks().into_iter().filter(|c| !c.pass).collect();
        prop_assert!(bad.is_empty(), "{:?}", bad);
        let chi = build_cutoff(CutoffKind::Chi { eps1 }, 4097).unwrap();
        let bad: Vec<_> = chi.checks().into_iter().filter(|c| !c.pass).collect();
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }

    #[test]
    fn c_normal_form_is_a_fixed_point(s0 in -0.5f64..0.5, c in 0.0f64..1.5, window in 0.05f64..0.5) {
        let g0 = profiles::round(2, 1.0, 65).unwrap();
        let cn = CNormalCollar { g0, sff0: s0, c, t_range: RadialGrid::new(0.0, 0.5, 257).unwrap() };
        let col = cn.to_radial().unwrap();
        let r = make_c_normal(&col, c, 0.1, window, 0.1).unwrap();
        prop_assert_eq!(r.deformed, col);
    }

    #[test]
    fn profile_documents_round_trip_bitwise(values in prop::collection::vec(-1e300f64..1e300, 2..64), a in -10.0f64..0.0) {
        let n = values.len();
        let doc = ProfileDocument::new("warped_closed", 2, GridSpec { a, b: a + 1.0, points: n }, values);
        let back = ProfileDocument::from_json(&doc.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, doc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn twist_preserves_slice_volume_form(c0 in coeffs(), shift in -0.1f64..0.1) {
        let c1: Vec<f64> = c0.iter().map(|c| c + shift).collect();
        let path = profiles::bumpy_path(3, &c0, &c1, 9, 257).unwrap();
        let tw = moser_twist(&path).unwrap();
        prop_assert!(tw.max_deviation() <= 1e-6, "{}", tw.max_deviation());
    }

    #[test]
    fn concatenation_keeps_endpoints(c0 in coeffs(), shift in -0.1f64..0.1) {
        let c1: Vec<f64> = c0.iter().map(|c| c + shift).collect();
        let p1 = profiles::bumpy_path(2, &c0, &c1, 9, 129).unwrap();
        let p2 = p1.reversed();
        let joined = concatenate(&p1, &p2, 17).unwrap();
        prop_assert_eq!(joined.first(), p1.first());
        prop_assert_eq!(joined.last(), p2.last());
        let mid = &joined.metrics[8];
        let gap = mid.profile.iter().zip(&p1.last().profile).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-12);
    }
}
