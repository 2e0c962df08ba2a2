use super::curvature::{scalar_curvature, SliceGeometry};
use super::laplacian::RadialOperator;
use crate::collar::CollarMetric;
use crate::error::{ensure, Error, Result};
use crate::stencil::{self, End};

/// Per-node `t`-derivatives of `log a` and `log φ` along the collar, pole nodes
/// filled by even extrapolation.
pub(crate) fn log_rates(c: &CollarMetric) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let nt = c.path.t_grid.points;
    let nx = c.x_points();
    let ht = c.path.t_grid.h();
    let mut la = vec![vec![0.0; nx]; nt];
    let mut lp = vec![vec![0.0; nx]; nt];
    let closed = c.slice(0).is_closed();
    for i in 0..nx {
        let col_a: Vec<f64> = (0..nt).map(|j| c.slice(j).radial_coeff()[i].ln()).collect();
        let da = stencil::d1(&col_a, ht, End::Open, End::Open);
        for j in 0..nt {
            la[j][i] = da[j];
        }
        if closed && (i == 0 || i == nx - 1) {
            continue;
        }
        let col_p: Vec<f64> = (0..nt).map(|j| c.slice(j).profile[i].ln()).collect();
        let dp = stencil::d1(&col_p, ht, End::Open, End::Open);
        for j in 0..nt {
            lp[j][i] = dp[j];
        }
    }
    if closed {
        for row in lp.iter_mut() {
            stencil::fill_pole_limits(row, true, true);
        }
    }
    (la, lp)
}

/// Slicing formulas along `h = G_t + (A u)² dt²`, outward normal `+∂_t`.
pub fn slice_curvature(c: &CollarMetric) -> Result<Vec<SliceGeometry>> {
    c.validate()?;
    let nt = c.path.t_grid.points;
    let nx = c.x_points();
    let q = (c.n - 1) as f64;
    let lapse: Vec<Vec<f64>> = (0..nt).map(|j| c.effective_lapse(j)).collect();
    for (j, row) in lapse.iter().enumerate() {
        if let Some((i, v)) = row.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::validation(format!("nonpositive lapse {v} at (x,t) sample ({i},{j})")));
        }
    }
    let (la, lp) = log_rates(c);
    let mut sr = vec![vec![0.0; nx]; nt];
    let mut st = vec![vec![0.0; nx]; nt];
    let mut hh = vec![vec![0.0; nx]; nt];
    for j in 0..nt {
        for i in 0..nx {
            sr[j][i] = la[j][i] / lapse[j][i];
            st[j][i] = lp[j][i] / lapse[j][i];
            hh[j][i] = sr[j][i] + q * st[j][i];
        }
    }
    let ht = c.path.t_grid.h();
    let mut dh = vec![vec![0.0; nx]; nt];
    for i in 0..nx {
        let col: Vec<f64> = (0..nt).map(|j| hh[j][i]).collect();
        let d = stencil::d1(&col, ht, End::Open, End::Open);
        for j in 0..nt {
            dh[j][i] = d[j];
        }
    }
    let mut out = Vec::with_capacity(nt);
    for j in 0..nt {
        let g = c.slice(j);
        let rg = scalar_curvature(g);
        let op = RadialOperator::new(g);
        let u = &lapse[j];
        let lu = op.apply(u);
        let mut r = Vec::with_capacity(nx);
        let mut nsq = Vec::with_capacity(nx);
        for i in 0..nx {
            let a2 = sr[j][i] * sr[j][i] + q * st[j][i] * st[j][i];
            let h = hh[j][i];
            r.push(2.0 / u[i] * (-lu[i] + 0.5 * rg[i] * u[i]) - 2.0 / u[i] * dh[j][i] - h * h - a2);
            nsq.push(a2);
        }
        out.push(SliceGeometry {
            sff_coeff: st[j].clone(),
            sff_radial: sr[j].clone(),
            h: hh[j].clone(),
            sff_norm_sq: nsq,
            psc: r.iter().map(|v| *v > 0.0).collect(),
            r,
        });
    }
    Ok(out)
}

/// Slice data `(a, φ, ∂_t a, ∂_t φ)` at node `i`, height `t`.
fn slice_state(c: &CollarMetric, i: usize, t: f64) -> (f64, f64, f64, f64) {
    let order = 6.min(c.path.t_grid.points);
    let ht = c.path.t_grid.h();
    let (i0, w) = stencil::stencil_at(c.path.t_grid.a, ht, c.path.t_grid.points, t, order);
    let s = (t - c.path.t_grid.a) / ht;
    let wd = stencil::lagrange_weights_d1(s, i0, order);
    let (mut a, mut p, mut at, mut pt) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..order {
        let g = c.slice(i0 + k);
        let av = g.radial.as_ref().map_or(1.0, |r| r[i]);
        let pv = g.profile[i];
        a += w[k] * av;
        p += w[k] * pv;
        at += wd[k] * av / ht;
        pt += wd[k] * pv / ht;
    }
    (a, p, at, pt)
}

/// Mean curvature of the graph `t = f(x)` in a Fermi collar `G_t + dt²`,
/// with respect to the normal pointing to increasing `t`.
pub fn fermi_graph_mean_curvature(c: &CollarMetric, f: &[f64]) -> Result<Vec<f64>> {
    c.validate()?;
    let nx = c.x_points();
    ensure!(f.len() == nx, "graph has {} samples, slices have {}", f.len(), nx);
    for j in 0..c.path.t_grid.points {
        let u = c.effective_lapse(j);
        ensure!(
            u.iter().all(|v| (v - 1.0).abs() <= 1e-12),
            "fermi_graph_mean_curvature needs unit lapse"
        );
    }
    if let Some((i, v)) = f
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= c.path.t_grid.a && **v <= c.path.t_grid.b))
    {
        return Err(Error::validation(format!(
            "graph leaves the collar: f[{i}] = {v} outside [{}, {}]",
            c.path.t_grid.a, c.path.t_grid.b
        )));
    }
    let m = (c.n - 1) as i32;
    let g0 = c.slice(0);
    let closed = g0.is_closed();
    let hx = g0.grid.h();
    let fe = if closed { End::Even } else { End::Open };
    let fx = stencil::d1(f, hx, fe, fe);
    let states: Vec<_> = (0..nx).map(|i| slice_state(c, i, f[i])).collect();
    let w: Vec<f64> = (0..nx)
        .map(|i| (1.0 + (fx[i] / states[i].0).powi(2)).sqrt())
        .collect();
    let flux: Vec<f64> = (0..nx)
        .map(|i| {
            let (a, p, _, _) = states[i];
            p.powi(m) * fx[i] / (a * w[i])
        })
        .collect();
    let qe = if !closed {
        End::Open
    } else if m % 2 == 1 {
        End::Even
    } else {
        End::Odd
    };
    let dflux = stencil::d1(&flux, hx, qe, qe);
    let mut hs: Vec<f64> = (0..nx)
        .map(|i| {
            let (a, p, at, pt) = states[i];
            if closed && (i == 0 || i == nx - 1) {
                return 0.0;
            }
            at / (a * w[i]) + m as f64 * pt / p * w[i] - dflux[i] / (a * p.powi(m))
        })
        .collect();
    if closed {
        stencil::fill_pole_limits(&mut hs, true, true);
    }
    Ok(hs)
}
