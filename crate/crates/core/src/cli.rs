//! Command-line front end. [`run`] parses arguments, dispatches, and maps errors
//! to exit codes (2 validation, 3 non-convergence) with a JSON body on stderr.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bartnik;
use crate::collar;
use crate::config::Tolerances;
use crate::error::{ensure, Error, Result};
use crate::flow::{self, FlowOptions};
use crate::geomcore::{scalar_curvature, slice_curvature, tube_geometry, WarpedMetric};
use crate::grid::RadialGrid;
use crate::io::{ProfileDocument, RunConfig};
use crate::paths::{self, MetricPath};
use crate::profiles;
use crate::schwarzschild::{self, PlanarProfile};
use crate::smoothing::{self, Check, CutoffKind, RadialCollar};
use crate::suite;

#[derive(Debug, Parser)]
#[command(name = "horizonforge", version, about = "Warped-product spectral geometry and PSC extension toolkit")]
pub struct Cli {
    /// Run the invariant suite of the subcommand and report pass/fail per invariant.
    #[arg(long, global = true)]
    pub check: bool,
    /// Worker threads for sweeps over independent inputs.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal eigenvalue of -Δ + kR.
    Lambda1(Lambda1Args),
    /// Curvature samples of a closed or tube profile.
    Geometry(GeometryArgs),
    /// Conformal path to the round metric (n = 2) or Yamabe contraction path (n = 3).
    Path(PathArgs),
    /// Minimal or mean-convex collar over the twisted path to the round metric.
    Collar(CollarArgs),
    /// Glue two phase-plane profiles by a strictly PSC bridge.
    Glue(GlueArgs),
    /// Bend a Schwarzschild orbit onto a heavier one.
    Bend(BendArgs),
    /// Extensions of a horizon with masses decreasing to the Penrose bound.
    BartnikSequence(BartnikArgs),
    /// Cutoff functions, C-normal deformation and boundary-sff prescription.
    Smooth(SmoothArgs),
    /// Rotationally symmetric Ricci flow on S³ with λ₁ monitoring.
    Flow(FlowArgs),
    /// Run the full deterministic invariant suite.
    Check(CheckArgs),
    /// Run a subcommand described by a JSON config.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct Lambda1Args {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub k: f64,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long)]
    pub metric: PathBuf,
    /// CSV of per-sample curvature.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PathKind {
    Uniformize,
    Yamabe,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, value_enum, default_value_t = PathKind::Uniformize)]
    pub kind: PathKind,
    #[arg(long, default_value_t = 9)]
    pub t_points: usize,
    /// Apply the volume-form twist to the path.
    #[arg(long)]
    pub twist: bool,
    #[arg(long, default_value_t = 0.5)]
    pub k: f64,
    /// CSV `t,volume,lambda1`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CollarKind {
    Minimal,
    MeanConvex,
}

#[derive(Debug, Args)]
pub struct CollarArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, value_enum, default_value_t = CollarKind::Minimal)]
    pub kind: CollarKind,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// CSV `t,min_R,min_H,max_H` per slice.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GlueArgs {
    #[arg(long)]
    pub inner: PathBuf,
    #[arg(long)]
    pub outer: PathBuf,
    /// Glued phase-plane document.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BendArgs {
    #[arg(long)]
    pub m1: f64,
    #[arg(long)]
    pub m2: f64,
    #[arg(long)]
    pub rho1: f64,
    #[arg(long)]
    pub rho2: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// CSV `x,y,C,psc_margin`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BartnikArgs {
    #[arg(long)]
    pub horizon: PathBuf,
    #[arg(long, default_value_t = 12)]
    pub eps_count: usize,
    #[arg(long, default_value = "masses.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CollarModel {
    Product,
    Schwarzschild,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CutoffChoice {
    Log,
    Chi,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    /// Tabulate a cutoff function instead of deforming a collar.
    #[arg(long, value_enum, conflicts_with = "collar")]
    pub cutoff: Option<CutoffChoice>,
    #[arg(long, value_enum, default_value_t = CollarModel::Product)]
    pub collar: CollarModel,
    /// C-normal constant; defaults to 1 (product) or max(C₀, 0) (Schwarzschild).
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 1e-2)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub window: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    /// Log-cutoff outer radius.
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    /// Target boundary sff (multiple of g₀); defaults to the collar's own.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub eps1: f64,
    #[arg(long, default_value_t = 4097)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, default_value_t = 2e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.05)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.5)]
    pub k: f64,
    #[arg(long, default_value_t = 10)]
    pub monitor_every: usize,
    /// CSV `t,r_max,lambda1,volume`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub points: Option<usize>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

/// Serializer that writes every float with 17 significant digits.
struct Sci;

impl serde_json::ser::Formatter for Sci {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        write!(w, "{v:.16e}")
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci);
    v.serialize(&mut ser).expect("serializable value");
    String::from_utf8(buf).expect("utf-8 json")
}

pub fn error_json(e: &Error) -> String {
    to_json(&json!({ "error": e.kind(), "message": e.to_string() }))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

fn read_metric(path: &Path) -> Result<WarpedMetric> {
    ProfileDocument::read(path)?.to_metric()
}

fn read_planar(path: &Path) -> Result<PlanarProfile> {
    ProfileDocument::read(path)?.to_planar()
}

fn check(name: &str, pass: bool, value: f64) -> Check {
    Check { name: name.to_string(), pass, value }
}

/// What a subcommand produced: text for stdout and whether every check passed.
struct Outcome {
    stdout: String,
    ok: bool,
}

impl Outcome {
    fn json(v: Value) -> Self {
        Outcome { stdout: to_json(&v) + "\n", ok: true }
    }

    fn checks(c: Vec<Check>) -> Self {
        let ok = c.iter().all(|c| c.pass);
        Outcome { stdout: suite::render(&c), ok }
    }
}

fn min(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MAX, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MIN, f64::max)
}

fn lambda1_cmd(a: &Lambda1Args, chk: bool, tol: &Tolerances) -> Result<Outcome> {
    let m = read_metric(&a.metric)?;
    if chk {
        return Ok(Outcome::checks(suite::spectral_checks(&m, a.k, tol)?));
    }
    let r = crate::spectral::lambda1_with(&m, a.k, tol)?;
    let v = crate::spectral::MembershipVerdict::new(r.lambda1, tol.membership);
    let (lo, hi) = crate::spectral::curvature_sandwich(&m);
    Ok(Outcome::json(json!({
        "lambda1": r.lambda1,
        "k": r.k,
        "residual": r.residual,
        "in_strict": v.in_strict,
        "in_weak": v.in_weak,
        "min_R": lo,
        "avg_R": hi,
    })))
}

fn geometry_cmd(a: &GeometryArgs, chk: bool, tol: &Tolerances) -> Result<Outcome> {
    let m = read_metric(&a.metric)?;
    let xs = m.grid.xs();
    let mut csv = String::new();
    let mut checks = vec![];
    let r = if m.is_closed() {
        let r = scalar_curvature(&m);
        csv.push_str("x,phi,R\n");
        for i in 0..m.len() {
            let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e}", xs[i], m.profile[i], r[i]);
        }
        let closure = m.check_closure(tol.closure);
        checks.push(check("geometry.closure", closure.is_ok(), tol.closure));
        r
    } else {
        let g = tube_geometry(&m)?;
        csv.push_str("t,f,H,sff_norm_sq,R\n");
        for i in 0..m.len() {
            let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", xs[i], m.profile[i], g.h[i], g.sff_norm_sq[i], g.r[i]);
        }
        let nf = m.n as f64;
        let e1 = g.h.iter().zip(&g.sff_coeff).map(|(h, s)| (h - nf * s).abs()).fold(0.0, f64::max);
        let e2 = g.sff_norm_sq.iter().zip(&g.sff_coeff).map(|(q, s)| (q - nf * s * s).abs()).fold(0.0, f64::max);
        checks.push(check("geometry.h_is_trace", e1 <= 1e-12, e1));
        checks.push(check("geometry.sff_norm", e2 <= 1e-12, e2));
        let agree = g.psc.iter().zip(&g.r).all(|(p, r)| *p == (*r > 0.0));
        checks.push(check("geometry.psc_predicate", agree, min(&g.r)));
        g.r
    };
    checks.push(check("geometry.finite", r.iter().all(|v| v.is_finite()), max(&r)));
    if let Some(out) = &a.out {
        write_file(out, &csv)?;
    }
    if chk {
        return Ok(Outcome::checks(checks));
    }
    Ok(Outcome::json(json!({
        "kind": if m.is_closed() { "warped_closed" } else { "tube_profile" },
        "n": m.n,
        "min_R": min(&r),
        "max_R": max(&r),
        "volume": m.volume(),
    })))
}

fn path_cmd(a: &PathArgs, chk: bool, tol: &Tolerances) -> Result<Outcome> {
    let m = read_metric(&a.metric)?;
    let mut path = match a.kind {
        PathKind::Uniformize => bartnik::uniformizing_path(&m, a.t_points)?,
        PathKind::Yamabe => {
            MetricPath::from_fn(RadialGrid::new(0.0, 1.0, a.t_points)?, |t| paths::yamabe_contraction_path(&m, t))?
        }
    };
    // roundness is a property of the metric, so measure it before pulling back
    let endpoint_spread = {
        let r = scalar_curvature(path.last());
        (max(&r) - min(&r)) / max(&r).abs()
    };
    let mut twist_dev = None;
    if a.twist {
        let tw = paths::moser_twist(&path)?;
        twist_dev = Some(tw.max_deviation());
        path = tw.path;
    }
    let ts = path.t_grid.xs();
    let vols = path.volumes();
    let lams = path
        .metrics
        .iter()
        .map(|g| crate::spectral::lambda1_with(g, a.k, tol).map(|r| r.lambda1))
        .collect::<Result<Vec<_>>>()?;
    if let Some(out) = &a.out {
        let mut csv = String::from("t,volume,lambda1\n");
        for j in 0..ts.len() {
            let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e}", ts[j], vols[j], lams[j]);
        }
        write_file(out, &csv)?;
    }
    if chk {
        let mut c = vec![];
        if m.n >= 3 {
            // the sign of λ₁ at the conformal coupling is a conformal invariant
            let signs = path
                .metrics
                .iter()
                .map(|g| crate::spectral::conformal_sign_check(g).map(|(v, _)| (v.in_strict, v.in_weak)))
                .collect::<Result<Vec<_>>>()?;
            let same = signs.windows(2).all(|w| w[0] == w[1]);
            c.push(check("path.conformal_sign_invariant", same, signs.len() as f64));
        } else {
            c.push(check("path.lambda1_positive", min(&lams) > tol.membership, min(&lams)));
        }
        let spread = max(&vols) - min(&vols);
        if matches!(a.kind, PathKind::Uniformize) {
            c.push(check("path.equal_volume", spread <= 1e-9 * vols[0], spread));
            c.push(check("path.endpoint_round", endpoint_spread <= 1e-6, endpoint_spread));
        }
        if let Some(d) = twist_dev {
            c.push(check("path.twist_volume_form", d <= 1e-6, d));
        }
        return Ok(Outcome::checks(c));
    }
    Ok(Outcome::json(json!({
        "t_points": ts.len(),
        "min_lambda1": min(&lams),
        "max_lambda1": max(&lams),
        "volume_spread": max(&vols) - min(&vols),
        "twist_deviation": twist_dev,
    })))
}

fn collar_cmd(a: &CollarArgs, chk: bool, tol: &Tolerances) -> Result<Outcome> {
    let m = read_metric(&a.metric)?;
    let path = bartnik::horizon_path(&m)?;
    let (c, rep) = match a.kind {
        CollarKind::Minimal => collar::build_minimal_collar(&path, 0.5)?,
        CollarKind::MeanConvex => collar::build_mean_convex_collar(&path, 0.5, a.epsilon, false, false)?,
    };
    if let Some(out) = &a.out {
        let geo = slice_curvature(&c)?;
        let ts = c.t_grid().xs();
        let mut csv = String::from("t,min_R,min_H,max_H\n");
        for (j, g) in geo.iter().enumerate() {
            let h = &rep.slice_h[j];
            let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e}", ts[j], min(&g.r), min(h), max(h));
        }
        write_file(out, &csv)?;
    }
    if chk {
        let mut out = vec![check("collar.psc", rep.min_r > -tol.curvature_floor, rep.min_r)];
        match a.kind {
            CollarKind::Minimal => {
                let h = rep.slice_h.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                out.push(check("collar.slices_minimal", h <= 1e-6, h));
            }
            CollarKind::MeanConvex => {
                let con = collar::mean_convex_conclusions(&c, &path)?;
                out.push(check("collar.left_boundary_exact", con.left_boundary_exact, con.max_abs_h_left));
                out.push(check("collar.right_boundary", con.right_boundary_deviation <= 1e-9, con.right_boundary_deviation));
                out.push(check("collar.psc_off_left", con.min_r_off_left > 0.0, con.min_r_off_left));
                out.push(check("collar.h_positive", con.min_h_positive_t > 0.0, con.min_h_positive_t));
                out.push(check("collar.scalar_identity", con.scalar_identity_residual <= 0.1 * c.t_grid().h().powi(2), con.scalar_identity_residual));
            }
        }
        return Ok(Outcome::checks(out));
    }
    Ok(Outcome::json(json!({
        "min_R": rep.min_r,
        "min_R_location": [rep.min_r_location.0, rep.min_r_location.1],
        "amplitude": c.amplitude,
        "left_minimal": rep.boundary_flags.left_minimal,
        "right_sign": rep.boundary_flags.right_sign,
    })))
}

fn glue_cmd(a: &GlueArgs, chk: bool) -> Result<Outcome> {
    let p1 = read_planar(&a.inner)?;
    let p2 = read_planar(&a.outer)?;
    let feasible = schwarzschild::gluing_feasible(&p1, &p2)?;
    let glued = schwarzschild::glue_profiles(&p1, &p2);
    if chk {
        let mut c = vec![check("glue.feasible_iff_constructed", feasible == glued.is_ok(), feasible as u8 as f64)];
        if let Ok(g) = &glued {
            let bridge = &g.psc_margin()[p1.len()..g.len() - p2.len()];
            c.push(check("glue.bridge_strict_psc", bridge.iter().all(|v| *v > 0.0), min(bridge)));
            c.push(check("glue.slope_range", g.y.iter().all(|y| *y > 0.0 && *y <= 1.0), min(&g.y)));
        }
        return Ok(Outcome::checks(c));
    }
    let g = glued?;
    if let Some(out) = &a.out {
        write_file(out, &ProfileDocument::from_planar(&g).to_json()?)?;
    }
    let bridge = &g.psc_margin()[p1.len()..g.len() - p2.len()];
    Ok(Outcome::json(json!({
        "feasible": feasible,
        "samples": g.len(),
        "min_bridge_psc_margin": min(bridge),
        "outer_mass": 0.5 * g.orbit_constants()[g.len() - 1],
    })))
}

fn bend_cmd(a: &BendArgs, chk: bool) -> Result<Outcome> {
    let p = schwarzschild::bend_and_glue(a.m1, a.m2, a.rho1, a.rho2, a.n)?;
    if let Some(out) = &a.out {
        let c = p.orbit_constants();
        let mg = p.psc_margin();
        let mut csv = String::from("x,y,C,psc_margin\n");
        for i in 0..p.len() {
            let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e}", p.x[i], p.y[i], c[i], mg[i]);
        }
        write_file(out, &csv)?;
    }
    let mass = schwarzschild::adm_mass(&p)?;
    let inner = 0.5 * p.orbit_constants()[0];
    if chk {
        return Ok(Outcome::checks(vec![
            check("bend.adm_mass", (mass - a.m2).abs() <= 1e-9 * a.m2, (mass - a.m2).abs()),
            check("bend.inner_mass", (inner - a.m1).abs() <= 1e-9 * a.m1, (inner - a.m1).abs()),
            check("bend.psc", min(&p.psc_margin()) >= -1e-12, min(&p.psc_margin())),
            check("bend.mean_convex", p.y[1..].iter().all(|y| *y > 0.0), min(&p.y[1..])),
        ]));
    }
    Ok(Outcome::json(json!({
        "adm_mass": mass,
        "inner_mass": inner,
        "samples": p.len(),
        "min_psc_margin": min(&p.psc_margin()),
    })))
}

fn bartnik_cmd(a: &BartnikArgs, chk: bool, jobs: usize, tol: &Tolerances) -> Result<Outcome> {
    ensure!(a.eps_count >= 1, "eps-count must be at least 1");
    let h = read_metric(&a.horizon)?;
    let seq = bartnik::minimizing_sequence_jobs(&h, &bartnik::dyadic_epsilons(a.eps_count), jobs)?;
    write_file(&a.out, &bartnik::masses_csv(&seq))?;
    let last = &seq[seq.len() - 1];
    let bound = last.checks.penrose_bound;
    if chk {
        let mut c: Vec<Check> = seq
            .iter()
            .map(|e| check(&format!("bartnik.extension.eps{}", e.epsilon), e.checks.passes(e.mass, tol), e.checks.min_r()))
            .collect();
        c.push(check("bartnik.masses_decrease", seq.windows(2).all(|w| w[1].mass < w[0].mass), last.mass));
        c.push(check("bartnik.above_penrose", seq.iter().all(|e| e.mass >= bound - 1e-9), last.mass - bound));
        return Ok(Outcome::checks(c));
    }
    Ok(Outcome::json(json!({
        "final_mass": last.mass,
        "penrose_bound": bound,
        "masses": seq.iter().map(|e| e.mass).collect::<Vec<_>>(),
        "out": a.out.display().to_string(),
    })))
}

fn smooth_cmd(a: &SmoothArgs, chk: bool) -> Result<Outcome> {
    if let Some(kind) = a.cutoff {
        let kind = match kind {
            CutoffChoice::Log => CutoffKind::LogCutoff { delta: a.delta, epsilon: a.epsilon },
            CutoffChoice::Chi => CutoffKind::Chi { eps1: a.eps1 },
        };
        let c = smoothing::build_cutoff(kind, a.points)?;
        if let Some(out) = &a.out {
            write_file(out, &c.to_csv())?;
        }
        if chk {
            return Ok(Outcome::checks(c.checks()));
        }
        return Ok(Outcome::json(json!({ "points": c.grid.points, "all_pass": c.all_pass() })));
    }
    let g0 = profiles::round(2, 1.0, 257)?;
    let col = match a.collar {
        CollarModel::Product => RadialCollar::product(g0, 0.5, a.points)?,
        CollarModel::Schwarzschild => RadialCollar::schwarzschild_inward(0.5, 1.5, 0.3, 2, a.points, 257)?,
    };
    let c = a.c.unwrap_or(match a.collar {
        CollarModel::Product => 1.0,
        CollarModel::Schwarzschild => smoothing::c_normal_threshold(&col).max(0.0),
    });
    let cn = smoothing::make_c_normal(&col, c, a.eta, a.window, a.delta)?;
    let k = a.k.unwrap_or(cn.cnormal.sff0);
    let pr = smoothing::prescribe_sff(&cn.cnormal, k, a.eta, a.eps1)?;
    if let Some(out) = &a.out {
        let r = pr.collar.scalar_curvature();
        let h = pr.collar.mean_curvature();
        let ts = pr.collar.t_grid.xs();
        let mut csv = String::from("t,w,H,min_R\n");
        for j in 0..ts.len() {
            let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e}", ts[j], pr.collar.w[j], h[j], min(&r[j]));
        }
        write_file(out, &csv)?;
    }
    if chk {
        let mut out: Vec<Check> =
            cn.checks(a.eta).into_iter().map(|c| check(&format!("c_normal.{}", c.name), c.pass, c.value)).collect();
        out.extend(pr.checks(a.eta).into_iter().map(|c| check(&format!("prescribe.{}", c.name), c.pass, c.value)));
        return Ok(Outcome::checks(out));
    }
    Ok(Outcome::json(json!({
        "c": c,
        "c0": cn.c0,
        "delta_used": cn.delta,
        "sff0": cn.cnormal.sff0,
        "k": k,
        "c_normal_pass": cn.checks(a.eta).iter().all(|c| c.pass),
        "prescribe_pass": pr.checks(a.eta).iter().all(|c| c.pass),
        "min_scalar_change": pr.min_scalar_change,
        "foliation_margin": pr.foliation_margin,
    })))
}

fn flow_cmd(a: &FlowArgs, chk: bool) -> Result<Outcome> {
    let m = read_metric(&a.metric)?;
    let opts = FlowOptions { k: a.k, monitor_every: a.monitor_every, ..FlowOptions::default() };
    let tr = flow::evolve_with(&m, a.dt, a.t_end, &opts)?;
    if let Some(out) = &a.out {
        write_file(out, &tr.to_csv())?;
    }
    if chk {
        let d = flow::monotonicity_report(&tr, a.k)?;
        let v = flow::volume_identity_error(&tr)?;
        return Ok(Outcome::checks(vec![
            check("flow.lambda1_increasing", d.iter().all(|x| *x > 0.0), min(&d)),
            check("flow.volume_identity", v <= 1e-5, v),
            check("flow.no_blowup", !tr.blowup, *tr.times.last().unwrap_or(&0.0)),
        ]));
    }
    Ok(Outcome::json(json!({
        "samples": tr.times.len(),
        "final_time": tr.times.last(),
        "blowup": tr.blowup,
        "lambda1_first": tr.lambda1_series.first(),
        "lambda1_last": tr.lambda1_series.last(),
    })))
}

fn check_cmd(a: &CheckArgs, jobs: usize, tol: &Tolerances) -> Result<Outcome> {
    let c = suite::check_suite(a.points.unwrap_or(tol.points()), jobs, tol)?;
    let out = Outcome::checks(c);
    if let Some(p) = &a.out {
        write_file(p, &out.stdout)?;
    }
    Ok(out)
}

fn dispatch(cli: &Cli, tol: &Tolerances) -> Result<Outcome> {
    ensure!(cli.jobs >= 1, "jobs must be at least 1");
    match &cli.command {
        Command::Lambda1(a) => lambda1_cmd(a, cli.check, tol),
        Command::Geometry(a) => geometry_cmd(a, cli.check, tol),
        Command::Path(a) => path_cmd(a, cli.check, tol),
        Command::Collar(a) => collar_cmd(a, cli.check, tol),
        Command::Glue(a) => glue_cmd(a, cli.check),
        Command::Bend(a) => bend_cmd(a, cli.check),
        Command::BartnikSequence(a) => bartnik_cmd(a, cli.check, cli.jobs, tol),
        Command::Smooth(a) => smooth_cmd(a, cli.check),
        Command::Flow(a) => flow_cmd(a, cli.check),
        Command::Check(a) => check_cmd(a, cli.jobs, tol),
        Command::Run(a) => {
            let text = std::fs::read_to_string(&a.config)
                .map_err(|e| Error::validation(format!("{}: {e}", a.config.display())))?;
            let cfg = RunConfig::from_json(&text)?;
            ensure!(cfg.command != "run", "a run config cannot invoke `run`");
            let tol = tol.clone().with_overrides(&cfg.tolerances)?;
            let mut argv = vec!["horizonforge".to_string()];
            argv.extend(cfg.to_args()?);
            if cli.check {
                argv.push("--check".into());
            }
            argv.extend(["--jobs".to_string(), cli.jobs.to_string()]);
            let inner = Cli::try_parse_from(&argv).map_err(|e| Error::validation(e.kind().to_string() + ": " + &plain(&e)))?;
            dispatch(&inner, &tol)
        }
    }
}

fn plain(e: &clap::Error) -> String {
    e.render().to_string().lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim_start_matches("error: ").to_string()
}

/// Run the CLI on `args` (including the program name). Returns the exit code:
/// 0 success, 1 a reported check failed, 2 validation error, 3 non-convergence.
pub fn run<O: Write, E: Write>(args: &[String], out: &mut O, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = writeln!(err, "{}", error_json(&Error::validation(plain(&e))));
            return 2;
        }
    };
    let result = Tolerances::from_env().and_then(|tol| dispatch(&cli, &tol));
    match result {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            if o.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            e.exit_code()
        }
    }
}

/// Convenience for tests: `(exit code, stdout, stderr)`.
pub fn run_captured(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("horizonforge").chain(args.iter().copied()).map(String::from).collect();
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut o, &mut e);
    (code, String::from_utf8_lossy(&o).into_owned(), String::from_utf8_lossy(&e).into_owned())
}
