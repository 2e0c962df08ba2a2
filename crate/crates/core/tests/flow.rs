use horizonforge::flow::{
    evolve, evolve_with, monotonicity_report, monotonicity_report_unchecked, volume_identity_error, FlowOptions,
};
use horizonforge::profiles;

fn final_quantities(dt: f64) -> (f64, f64) {
    let g = profiles::perturbed(3, 0.2, 129).unwrap();
    let opts = FlowOptions { monitor_every: 100_000, ..FlowOptions::default() };
    let tr = evolve_with(&g, dt, 0.02, &opts).unwrap();
    (*tr.lambda1_series.last().unwrap(), *tr.volume_series.last().unwrap())
}

#[test]
fn time_stepping_is_second_order() {
    let q: Vec<(f64, f64)> = [1e-4, 5e-5, 2.5e-5].iter().map(|dt| final_quantities(*dt)).collect();
    let ratio_l = (q[0].0 - q[1].0) / (q[1].0 - q[2].0);
    let ratio_v = (q[0].1 - q[1].1) / (q[1].1 - q[2].1);
    assert!((3.0..5.0).contains(&ratio_l), "lambda1 Cauchy ratio {ratio_l}");
    assert!((3.0..5.0).contains(&ratio_v), "volume Cauchy ratio {ratio_v}");
}

#[test]
fn volume_decays_at_total_scalar_rate() {
    for g in [profiles::perturbed(3, 0.2, 129).unwrap(), profiles::dumbbell(3, 0.25, 129).unwrap()] {
        let tr = evolve(&g, 2e-4, 0.05).unwrap();
        let e = volume_identity_error(&tr).unwrap();
        assert!(e <= 1e-5, "volume identity error {e}");
    }
}

#[test]
fn weak_coupling_is_refused() {
    let tr = evolve(&profiles::perturbed(3, 0.2, 65).unwrap(), 5e-4, 0.02).unwrap();
    let err = monotonicity_report(&tr, 0.1).unwrap_err();
    assert!(err.to_string().contains("k >= 1/4"), "{err}");
    // the unchecked variant still evaluates
    assert_eq!(monotonicity_report_unchecked(&tr, 0.1).unwrap().len(), tr.times.len() - 2);
}

#[test]
fn lambda1_tracks_round_solution() {
    // round S³ of radius r: R = 6/r², λ₁(-Δ + kR) = kR, r² = 1 - 4t
    let k = 0.5;
    let tr = evolve(&profiles::round(3, 1.0, 129).unwrap(), 1e-3, 0.1).unwrap();
    for (t, l) in tr.times.iter().zip(&tr.lambda1_series) {
        let exact = k * 6.0 / (1.0 - 4.0 * t);
        assert!((l - exact).abs() <= 1e-4 * exact, "t={t}: {l} vs {exact}");
    }
}

#[test]
fn rejects_non_three_spheres() {
    assert!(evolve(&profiles::round(2, 1.0, 65).unwrap(), 1e-3, 0.1).is_err());
    assert!(evolve(&profiles::round(3, 1.0, 65).unwrap(), -1e-3, 0.1).is_err());
}
