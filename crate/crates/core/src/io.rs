//! On-disk formats: `ProfileDocument` (schema version 1) and `RunConfig`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::flow::FlowTrajectory;
use crate::geomcore::{MetricKind, WarpedMetric};
use crate::grid::RadialGrid;
use crate::schwarzschild::PlanarProfile;

pub const SCHEMA_VERSION: u32 = 1;

pub const KINDS: [&str; 5] = ["warped_closed", "tube_profile", "phase_plane", "collar", "trajectory"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub points: usize,
}

/// A sampled profile with optional auxiliary columns (nonuniform abscissae,
/// radial coefficient, per-sample diagnostics), each of length `points`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileDocument {
    pub schema_version: u32,
    pub kind: String,
    pub n: usize,
    pub grid: GridSpec,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub columns: BTreeMap<String, Vec<f64>>,
    pub metadata: BTreeMap<String, String>,
}

/// Wire form: non-numbers (JSON `null`, which is how NaN/Inf serialize) are
/// accepted here so they can be reported by index.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    schema_version: u32,
    kind: String,
    n: usize,
    grid: GridSpec,
    values: Vec<Option<f64>>,
    #[serde(default)]
    columns: BTreeMap<String, Vec<Option<f64>>>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

fn finite(name: &str, v: &[Option<f64>]) -> Result<Vec<f64>> {
    v.iter()
        .enumerate()
        .map(|(i, x)| match x {
            Some(x) if x.is_finite() => Ok(*x),
            _ => Err(Error::validation(format!("{name}[{i}] is not a finite number"))),
        })
        .collect()
}

impl ProfileDocument {
    pub fn new(kind: &str, n: usize, grid: GridSpec, values: Vec<f64>) -> Self {
        ProfileDocument {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            n,
            grid,
            values,
            columns: BTreeMap::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (supported: {SCHEMA_VERSION})",
            self.schema_version
        );
        ensure!(KINDS.contains(&self.kind.as_str()), "unknown document kind `{}`", self.kind);
        ensure!(
            self.values.len() == self.grid.points,
            "values has {} entries but grid.points = {}",
            self.values.len(),
            self.grid.points
        );
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("values[{i}] is not a finite number")));
        }
        for (name, col) in &self.columns {
            ensure!(col.len() == self.grid.points, "column `{name}` has {} entries, expected {}", col.len(), self.grid.points);
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(format!("{name}[{i}] is not a finite number")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        serde_json::to_string_pretty(self).map_err(|e| Error::validation(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::validation(format!("profile document: {e}")))?;
        ensure!(
            raw.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (supported: {SCHEMA_VERSION})",
            raw.schema_version
        );
        let mut columns = BTreeMap::new();
        for (k, v) in &raw.columns {
            columns.insert(k.clone(), finite(k, v)?);
        }
        let doc = ProfileDocument {
            schema_version: raw.schema_version,
            kind: raw.kind,
            n: raw.n,
            grid: raw.grid,
            values: finite("values", &raw.values)?,
            columns,
            metadata: raw.metadata,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn radial_grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.grid.a, self.grid.b, self.grid.points)
    }

    pub fn from_metric(m: &WarpedMetric) -> Self {
        let kind = match m.kind {
            MetricKind::ClosedSphere => "warped_closed",
            MetricKind::Tube => "tube_profile",
        };
        let g = m.grid;
        let mut d = Self::new(kind, m.n, GridSpec { a: g.a, b: g.b, points: g.points }, m.profile.clone());
        if let Some(a) = &m.radial {
            d.columns.insert("radial".into(), a.clone());
        }
        d
    }

    pub fn to_metric(&self) -> Result<WarpedMetric> {
        self.validate()?;
        let kind = match self.kind.as_str() {
            "warped_closed" => MetricKind::ClosedSphere,
            "tube_profile" => MetricKind::Tube,
            k => return Err(Error::validation(format!("document kind `{k}` is not a metric"))),
        };
        WarpedMetric::build(kind, self.n, self.radial_grid()?, self.values.clone(), self.columns.get("radial").cloned())
    }

    /// Phase-plane profile: `values = y`, column `x` holds the radii.
    pub fn from_planar(p: &PlanarProfile) -> Self {
        let (a, b) = (p.x[0], p.x[p.len() - 1]);
        let mut d = Self::new("phase_plane", p.n, GridSpec { a, b, points: p.len() }, p.y.clone());
        d.columns.insert("x".into(), p.x.clone());
        d
    }

    pub fn to_planar(&self) -> Result<PlanarProfile> {
        self.validate()?;
        ensure!(self.kind == "phase_plane", "document kind `{}` is not phase_plane", self.kind);
        let x = match self.columns.get("x") {
            Some(x) => x.clone(),
            None => self.radial_grid()?.xs(),
        };
        PlanarProfile::new(self.n, x, self.values.clone())
    }

    /// `values = λ₁`, columns `t`, `volume`, `r_max`.
    pub fn from_trajectory(tr: &FlowTrajectory) -> Self {
        let nt = tr.times.len();
        let mut d = Self::new(
            "trajectory",
            3,
            GridSpec { a: tr.times[0], b: tr.times[nt - 1], points: nt },
            tr.lambda1_series.clone(),
        );
        d.columns.insert("t".into(), tr.times.clone());
        d.columns.insert("volume".into(), tr.volume_series.clone());
        d.columns.insert("r_max".into(), tr.states.iter().map(|s| s.profile.iter().cloned().fold(0.0, f64::max)).collect());
        d.metadata.insert("k".into(), format!("{:.16e}", tr.k));
        d.metadata.insert("blowup".into(), tr.blowup.to_string());
        d
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDefaults {
    #[serde(default)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Directory that relative `out` paths resolve against.
    #[serde(default)]
    pub dir: Option<String>,
}

/// A pipeline run: a subcommand plus its long flags (without dashes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub args: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub grid: GridDefaults,
    #[serde(default)]
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation(format!("run config: {e}")))
    }

    /// Command line equivalent: `[command, --key, value, ...]`. Boolean `true`
    /// becomes a bare flag.
    pub fn to_args(&self) -> Result<Vec<String>> {
        let mut out = vec![self.command.clone()];
        for (k, v) in &self.args {
            let flag = format!("--{k}");
            match v {
                serde_json::Value::Bool(true) => out.push(flag),
                serde_json::Value::Bool(false) => {}
                serde_json::Value::String(s) => {
                    let s = match (&self.outputs.dir, k.as_str()) {
                        (Some(dir), "out") if !std::path::Path::new(s).is_absolute() => {
                            std::path::Path::new(dir).join(s).display().to_string()
                        }
                        _ => s.clone(),
                    };
                    out.extend([flag, s]);
                }
                serde_json::Value::Number(n) => out.extend([flag, n.to_string()]),
                _ => return Err(Error::validation(format!("argument `{k}` must be a string, number or boolean"))),
            }
        }
        if let Some(p) = self.grid.points {
            if !self.args.contains_key("points") {
                out.extend(["--points".to_string(), p.to_string()]);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = WarpedMetric::round_sphere(2, 1.0, 33).unwrap();
        let d = ProfileDocument::from_metric(&m);
        let back = ProfileDocument::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_metric().unwrap(), m);
    }

    #[test]
    fn nan_is_rejected_with_index() {
        let mut d = ProfileDocument::from_metric(&WarpedMetric::round_sphere(2, 1.0, 9).unwrap());
        d.values[4] = f64::NAN;
        assert!(d.to_json().unwrap_err().to_string().contains("values[4]"));
        let text = serde_json::to_string(&d).unwrap();
        assert!(ProfileDocument::from_json(&text).unwrap_err().to_string().contains("values[4]"));
    }

    #[test]
    fn version_zero_is_unsupported() {
        let mut d = ProfileDocument::from_metric(&WarpedMetric::round_sphere(2, 1.0, 9).unwrap());
        d.schema_version = 0;
        let text = serde_json::to_string(&d).unwrap();
        assert!(ProfileDocument::from_json(&text).unwrap_err().to_string().contains("unsupported schema_version 0"));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let e = RunConfig::from_json(r#"{"command":"check","bogus_key":1}"#).unwrap_err();
        assert!(e.to_string().contains("bogus_key"));
    }
}
