use horizonforge::geomcore::WarpedMetric;
use horizonforge::smoothing::{
    build_cutoff, make_c_normal, prescribe_sff, CNormalCollar, CutoffKind, RadialCollar,
};
use horizonforge::RadialGrid;

fn g0() -> WarpedMetric {
    WarpedMetric::round_sphere(2, 1.0, 129).unwrap()
}

#[test]
fn cutoff_lattice() {
    for delta in [0.2, 0.1, 0.01, 1e-4] {
        for epsilon in [0.9, 0.5, 0.1] {
            // the finite-difference C² check needs the inner scale δε resolved
            let points = ((24.0 / delta) as usize).max(4097);
            let c = build_cutoff(CutoffKind::LogCutoff { delta, epsilon }, points).unwrap();
            let bad: Vec<_> = c.checks().into_iter().filter(|c| !c.pass).collect();
            assert!(bad.is_empty(), "log cutoff delta={delta} eps={epsilon}: {bad:?}");
        }
    }
    for eps1 in [0.4, 0.1, 0.01] {
        let c = build_cutoff(CutoffKind::Chi { eps1 }, 4097).unwrap();
        let bad: Vec<_> = c.checks().into_iter().filter(|c| !c.pass).collect();
        assert!(bad.is_empty(), "chi eps1={eps1}: {bad:?}");
    }
}

#[test]
fn c_normal_lattice_on_schwarzschild_band() {
    let col = RadialCollar::schwarzschild_inward(0.5, 1.5, 0.3, 2, 1025, 129).unwrap();
    let c0 = horizonforge::smoothing::c_normal_threshold(&col);
    for eta in [0.5, 0.1, 0.02] {
        for window in [0.05, 0.1, 0.2] {
            for delta in [0.2, 0.05] {
                for c in [c0, c0 + 1.0] {
                    match make_c_normal(&col, c, eta, window, delta) {
                        Ok(r) => {
                            let bad: Vec<_> = r.checks(eta).into_iter().filter(|c| !c.pass).collect();
                            assert!(bad.is_empty(), "eta={eta} window={window} delta={delta} c={c}: {bad:?}");
                            assert!(r.delta <= delta);
                        }
                        // the only admissible failure is the explicit refusal
                        Err(e) => assert!(e.to_string().contains("eta unattainable"), "{e}"),
                    }
                }
            }
        }
    }
}

#[test]
fn prescribe_lattice() {
    for s0 in [0.0, 0.2, 0.5] {
        for c in [0.0, 0.5, 1.5] {
            let cn = CNormalCollar { g0: g0(), sff0: s0, c, t_range: RadialGrid::new(0.0, 0.5, 1025).unwrap() };
            for k in [s0, s0 - 0.05, s0 - 0.3] {
                let r = prescribe_sff(&cn, k, 0.05, 0.1).unwrap();
                let failed: Vec<_> = r.checks(0.05).into_iter().filter(|c| !c.pass).map(|c| c.name).collect();
                // lowering the boundary sff costs scalar curvature of order (s0-k)/eps1
                if k == s0 {
                    assert!(failed.is_empty(), "s0={s0} c={c}: {failed:?}");
                } else {
                    assert!(failed.iter().all(|n| n == "scalar_floor"), "s0={s0} c={c} k={k}: {failed:?}");
                }
                assert!(r.boundary_sff_error <= 1e-9);
                assert!(r.foliation_margin >= -1e-12);
            }
        }
    }
}

#[test]
fn preconditions_are_enforced() {
    let cn = CNormalCollar { g0: g0(), sff0: 0.1, c: 1.0, t_range: RadialGrid::new(0.0, 0.5, 257).unwrap() };
    assert!(prescribe_sff(&cn, 0.2, 0.1, 0.1).unwrap_err().to_string().contains("precondition"));
    let neg = CNormalCollar { c: -0.5, ..cn.clone() };
    assert!(prescribe_sff(&neg, 0.0, 0.1, 0.1).unwrap_err().to_string().contains("precondition"));
    assert!(prescribe_sff(&cn, 0.0, 0.1, 0.9).is_err());
    let col = cn.to_radial().unwrap();
    assert!(make_c_normal(&col, 0.5, 0.1, 0.2, 0.1).unwrap_err().to_string().contains("threshold"));
}

#[test]
fn already_c_normal_is_unchanged() {
    for (s0, c) in [(0.0, 0.0), (0.3, 1.0), (-0.2, 2.0)] {
        let cn = CNormalCollar { g0: g0(), sff0: s0, c, t_range: RadialGrid::new(0.0, 0.5, 513).unwrap() };
        let col = cn.to_radial().unwrap();
        let r = make_c_normal(&col, c, 0.1, 0.3, 0.1).unwrap();
        assert_eq!(r.deformed, col);
        assert_eq!(r.cnormal, cn);
        assert_eq!(r.min_scalar_change, 0.0);
    }
}

/// `w` across the seam: side A at `s ≥ 0`, side B mirrored to `s ≤ 0`.
fn seam(a: &RadialCollar, b: &RadialCollar) -> Vec<f64> {
    let mut w: Vec<f64> = b.w.iter().rev().cloned().collect();
    w.extend_from_slice(&a.w[1..]);
    w
}

fn max_second_difference(w: &[f64], h: f64, centre: usize, radius: usize) -> f64 {
    (centre - radius..=centre + radius).map(|i| ((w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h)).abs()).fold(0.0, f64::max)
}

#[test]
fn opposite_sff_collars_glue_smoothly() {
    let mut matched = vec![];
    let mut mismatched = vec![];
    for points in [257, 513, 1025, 2049] {
        let tg = RadialGrid::new(0.0, 0.5, points).unwrap();
        let a = CNormalCollar { g0: g0(), sff0: 0.3, c: 1.0, t_range: tg };
        let b = CNormalCollar { g0: g0(), sff0: 0.0, c: 1.0, t_range: tg };
        let pa = prescribe_sff(&a, 0.1, 0.5, 0.1).unwrap();
        let pb = prescribe_sff(&b, -0.1, 0.5, 0.1).unwrap();
        let pc = prescribe_sff(&b, -0.05, 0.5, 0.1).unwrap();
        let ga = CNormalCollar { sff0: pa.collar.sff0(), ..a.clone() };
        let gb = CNormalCollar { sff0: pb.collar.sff0(), ..b.clone() };
        assert!((ga.sff0 + gb.sff0).abs() <= 1e-12);
        let h = tg.h();
        matched.push(max_second_difference(&seam(&pa.collar, &pb.collar), h, points - 1, 4));
        mismatched.push(max_second_difference(&seam(&pa.collar, &pc.collar), h, points - 1, 4));
    }
    for w in matched.windows(2) {
        assert!(w[1] <= 1.1 * w[0] + 1.0, "matched seam second differences grow: {matched:?}");
    }
    for w in mismatched.windows(2) {
        let ratio = w[1] / w[0];
        assert!((1.8..2.2).contains(&ratio), "mismatched seam should grow like 1/h: {mismatched:?}");
    }
}

#[test]
fn glues_with_is_symmetric_on_sff() {
    let tg = RadialGrid::new(0.0, 0.5, 65).unwrap();
    let a = CNormalCollar { g0: g0(), sff0: 0.25, c: 1.0, t_range: tg };
    let b = CNormalCollar { sff0: -0.25, ..a.clone() };
    assert!(a.glues_with(&b) && b.glues_with(&a));
    assert!(!a.glues_with(&a));
    assert!(!a.glues_with(&CNormalCollar { c: 2.0, ..b.clone() }));
}
