//! Fourth-order finite differences, interpolation and quadrature on uniform grids.

/// How a sampled function continues past a grid end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    /// Point reflection about the end node (odd functions at a pole).
    Odd,
    /// Mirror reflection about the end node (even functions at a pole).
    Even,
    /// No symmetry; one-sided stencils.
    Open,
}

fn reflect(v: &[f64], j: isize, left: End, right: End) -> f64 {
    let n = v.len() as isize;
    if j < 0 {
        let m = v[(-j) as usize];
        match left {
            End::Odd => 2.0 * v[0] - m,
            _ => m,
        }
    } else if j >= n {
        let m = v[(2 * (n - 1) - j) as usize];
        match right {
            End::Odd => 2.0 * v[(n - 1) as usize] - m,
            _ => m,
        }
    } else {
        v[j as usize]
    }
}

const D1_EDGE: [[f64; 5]; 2] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
];
const D2_EDGE: [[f64; 6]; 2] = [
    [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
    [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
];

/// First derivative, fourth order everywhere.
pub fn d1(v: &[f64], h: f64, left: End, right: End) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 6, "d1 needs at least 6 samples");
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let ii = i as isize;
        let open_left = left == End::Open && i < 2;
        let open_right = right == End::Open && i + 2 >= n;
        *o = if open_left {
            D1_EDGE[i].iter().enumerate().map(|(k, c)| c * v[k]).sum::<f64>() / (12.0 * h)
        } else if open_right {
            let r = n - 1 - i;
            -D1_EDGE[r].iter().enumerate().map(|(k, c)| c * v[n - 1 - k]).sum::<f64>()
                / (12.0 * h)
        } else {
            let g = |j: isize| reflect(v, j, left, right);
            (g(ii - 2) - 8.0 * g(ii - 1) + 8.0 * g(ii + 1) - g(ii + 2)) / (12.0 * h)
        };
    }
    out
}

/// Second derivative, fourth order everywhere.
pub fn d2(v: &[f64], h: f64, left: End, right: End) -> Vec<f64> {
    let n = v.len();
    assert!(n >= 6, "d2 needs at least 6 samples");
    let mut out = vec![0.0; n];
    let h2 = 12.0 * h * h;
    for (i, o) in out.iter_mut().enumerate() {
        let ii = i as isize;
        let open_left = left == End::Open && i < 2;
        let open_right = right == End::Open && i + 2 >= n;
        *o = if open_left {
            D2_EDGE[i].iter().enumerate().map(|(k, c)| c * v[k]).sum::<f64>() / h2
        } else if open_right {
            let r = n - 1 - i;
            D2_EDGE[r].iter().enumerate().map(|(k, c)| c * v[n - 1 - k]).sum::<f64>() / h2
        } else {
            let g = |j: isize| reflect(v, j, left, right);
            (-g(ii - 2) + 16.0 * g(ii - 1) - 30.0 * g(ii) + 16.0 * g(ii + 1) - g(ii + 2)) / h2
        };
    }
    out
}

/// Value at a pole of an even function known at nodes 1..=3 away from it
/// (quadratic extrapolation in the squared distance).
#[inline]
pub fn even_pole_limit(v1: f64, v2: f64, v3: f64) -> f64 {
    1.5 * v1 - 0.6 * v2 + 0.1 * v3
}

/// Replace the end values of `v` by their even pole limits.
pub fn fill_pole_limits(v: &mut [f64], left: bool, right: bool) {
    let n = v.len();
    if left {
        v[0] = even_pole_limit(v[1], v[2], v[3]);
    }
    if right {
        v[n - 1] = even_pole_limit(v[n - 2], v[n - 3], v[n - 4]);
    }
}

/// Lagrange interpolation through `order` nodes of a uniform grid around `x`.
pub fn interp(a: f64, h: f64, v: &[f64], x: f64, order: usize) -> f64 {
    let n = v.len();
    let order = order.min(n);
    let s = (x - a) / h;
    let mut i0 = s.floor() as isize - (order as isize - 1) / 2;
    i0 = i0.clamp(0, (n - order) as isize);
    let i0 = i0 as usize;
    let mut acc = 0.0;
    for j in 0..order {
        let mut w = 1.0;
        let sj = (i0 + j) as f64;
        for m in 0..order {
            if m != j {
                let sm = (i0 + m) as f64;
                w *= (s - sm) / (sj - sm);
            }
        }
        acc += w * v[i0 + j];
    }
    acc
}

/// Lagrange weights for evaluating at `s` (in node units) from `order` nodes starting at `i0`.
pub fn lagrange_weights(s: f64, i0: usize, order: usize) -> Vec<f64> {
    (0..order)
        .map(|j| {
            let sj = (i0 + j) as f64;
            (0..order)
                .filter(|&m| m != j)
                .map(|m| {
                    let sm = (i0 + m) as f64;
                    (s - sm) / (sj - sm)
                })
                .product()
        })
        .collect()
}

/// Derivatives (in node units) of the Lagrange basis at `s`.
pub fn lagrange_weights_d1(s: f64, i0: usize, order: usize) -> Vec<f64> {
    (0..order)
        .map(|j| {
            let sj = (i0 + j) as f64;
            let den: f64 = (0..order)
                .filter(|&m| m != j)
                .map(|m| sj - (i0 + m) as f64)
                .product();
            let num: f64 = (0..order)
                .filter(|&k| k != j)
                .map(|k| {
                    (0..order)
                        .filter(|&m| m != j && m != k)
                        .map(|m| s - (i0 + m) as f64)
                        .product::<f64>()
                })
                .sum();
            num / den
        })
        .collect()
}

/// Start index and weights of the `order`-point stencil used to interpolate at `x`.
pub fn stencil_at(a: f64, h: f64, n: usize, x: f64, order: usize) -> (usize, Vec<f64>) {
    let order = order.min(n);
    let s = (x - a) / h;
    let i0 = (s.floor() as isize - (order as isize - 1) / 2).clamp(0, (n - order) as isize) as usize;
    (i0, lagrange_weights(s, i0, order))
}

/// Running integral `∫_a^{x_i} v`, fourth order, with parity-aware ghosts at the ends.
pub fn cumulative(v: &[f64], h: f64, left: End, right: End) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let ii = i as isize;
        let g = |j: isize| -> f64 {
            if (j < 0 && left == End::Open) || (j >= n as isize && right == End::Open) {
                f64::NAN
            } else {
                reflect(v, j, left, right)
            }
        };
        let (fm, f0, f1, f2) = (g(ii - 1), g(ii), g(ii + 1), g(ii + 2));
        let cell = if fm.is_nan() {
            h / 24.0 * (9.0 * f0 + 19.0 * f1 - 5.0 * f2 + g(ii + 3))
        } else if f2.is_nan() {
            h / 24.0 * (g(ii - 2) - 5.0 * fm + 19.0 * f0 + 9.0 * f1)
        } else {
            h / 24.0 * (-fm + 13.0 * f0 + 13.0 * f1 - f2)
        };
        out[i + 1] = out[i] + cell;
    }
    out
}

/// Composite trapezoid rule.
pub fn trapezoid(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

/// Quintic smoothstep `6s^5 - 15s^4 + 10s^3` on `[0,1]`, clamped outside, with two derivatives.
pub fn smoothstep5(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let s2 = s * s;
        (
            s2 * s * (10.0 - 15.0 * s + 6.0 * s2),
            30.0 * s2 * (1.0 - s) * (1.0 - s),
            60.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
        )
    }
}

/// C-infinity step built from `exp(-1/s)`: 0 for `s <= 0`, 1 for `s >= 1`, with two derivatives.
pub fn smooth_step(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    // e(s) = exp(-1/s); derivatives of e in closed form.
    let e = |x: f64| -> (f64, f64, f64) {
        let v = (-1.0 / x).exp();
        let d = v / (x * x);
        let dd = v * (1.0 - 2.0 * x) / x.powi(4);
        (v, d, dd)
    };
    let (p, p1, p2) = e(s);
    let (q, q1m, q2) = e(1.0 - s);
    let q1 = -q1m;
    let den = p + q;
    let den1 = p1 + q1;
    let den2 = p2 + q2;
    let f = p / den;
    let f1 = (p1 * den - p * den1) / (den * den);
    // f = p/den  =>  f'' = (p2 - 2 f1 den1 - f den2) / den
    let f2 = (p2 - 2.0 * f1 * den1 - f * den2) / den;
    (f, f1, f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_fourth_order_open() {
        for &n in &[65usize, 129] {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (1.3 * i as f64 * h).exp()).collect();
            let dv = d1(&v, h, End::Open, End::Open);
            let ddv = d2(&v, h, End::Open, End::Open);
            let e1 = (0..n)
                .map(|i| (dv[i] - 1.3 * v[i]).abs())
                .fold(0.0, f64::max);
            let e2 = (0..n)
                .map(|i| (ddv[i] - 1.69 * v[i]).abs())
                .fold(0.0, f64::max);
            assert!(e1 < 40.0 * h.powi(4), "d1 err {e1}");
            assert!(e2 < 400.0 * h.powi(3), "d2 err {e2}");
        }
    }

    #[test]
    fn parity_ghosts() {
        let n = 101;
        let h = std::f64::consts::PI / (n - 1) as f64;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        let c: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos()).collect();
        let ds = d1(&s, h, End::Odd, End::Odd);
        let dc = d1(&c, h, End::Even, End::Even);
        for i in 0..n {
            assert!((ds[i] - c[i]).abs() < 1e-7);
            assert!((dc[i] + s[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let n = 201;
        let h = 2.0 / (n - 1) as f64;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos()).collect();
        let c = cumulative(&v, h, End::Open, End::Open);
        for i in 0..n {
            assert!((c[i] - (i as f64 * h).sin()).abs() < 1e-9, "{i}: {}", c[i] - (i as f64 * h).sin());
        }
        let ce = cumulative(&v, h, End::Even, End::Open);
        assert!((ce[n - 1] - 2f64.sin()).abs() < 1e-9, "{}", ce[n - 1] - 2f64.sin());
    }

    #[test]
    fn interpolation_is_exact_on_cubics() {
        let v: Vec<f64> = (0..10).map(|i| (i as f64).powi(3) - 2.0 * i as f64).collect();
        let x = 4.37;
        assert!((interp(0.0, 1.0, &v, x, 4) - (x * x * x - 2.0 * x)).abs() < 1e-10);
    }

    #[test]
    fn lagrange_derivative_weights() {
        let w = lagrange_weights_d1(2.3, 0, 6);
        let d: f64 = w.iter().enumerate().map(|(j, w)| w * (j as f64).powi(4)).sum();
        assert!((d - 4.0 * 2.3f64.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn smooth_steps_derivatives() {
        for &(f, name) in &[
            (smooth_step as fn(f64) -> (f64, f64, f64), "cinf"),
            (smoothstep5, "quintic"),
        ] {
            for i in 1..50 {
                let s = i as f64 / 50.0;
                let e = 1e-6;
                let (_, d, dd) = f(s);
                let num1 = (f(s + e).0 - f(s - e).0) / (2.0 * e);
                let num2 = (f(s + e).1 - f(s - e).1) / (2.0 * e);
                assert!((num1 - d).abs() < 1e-6, "{name} d1 at {s}");
                assert!((num2 - dd).abs() < 1e-5, "{name} d2 at {s}");
            }
        }
    }
}
