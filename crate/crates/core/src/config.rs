//! Central tolerance record. Every numeric threshold used by the library lives here.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Normalized eigen-residual ceiling.
    pub eigen_residual: f64,
    /// Membership band: `λ₁ > tol` strict, `λ₁ ≥ -tol` weak.
    pub membership: f64,
    /// Allowed `|φ'(pole) ∓ 1|` for a smoothly closing profile.
    pub closure: f64,
    /// Allowed relative drift of the slice volume form along a twisted path.
    pub volume_form: f64,
    /// Allowed drift of the orbit constant over a terminal Schwarzschild segment.
    pub orbit_drift: f64,
    /// Scalar curvature floor used when certifying `R ≥ 0` on assembled extensions.
    pub curvature_floor: f64,
    /// Shift-and-invert iteration cap.
    pub max_iterations: f64,
    /// Default number of grid points.
    pub default_points: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eigen_residual: 1e-10,
            membership: 1e-8,
            closure: 1e-4,
            volume_form: 1e-8,
            orbit_drift: 1e-9,
            curvature_floor: 1e-9,
            max_iterations: 200.0,
            default_points: 2048.0,
        }
    }
}

pub const ENV_VAR: &str = "HORIZONFORGE_TOL";

impl Tolerances {
    pub const KEYS: [&'static str; 8] = [
        "eigen_residual",
        "membership",
        "closure",
        "volume_form",
        "orbit_drift",
        "curvature_floor",
        "max_iterations",
        "default_points",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "eigen_residual" => &mut self.eigen_residual,
            "membership" => &mut self.membership,
            "closure" => &mut self.closure,
            "volume_form" => &mut self.volume_form,
            "orbit_drift" => &mut self.orbit_drift,
            "curvature_floor" => &mut self.curvature_floor,
            "max_iterations" => &mut self.max_iterations,
            "default_points" => &mut self.default_points,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::validation(format!(
                "tolerance `{key}` must be finite and nonnegative"
            )));
        }
        match self.slot(key) {
            Some(s) => {
                *s = value;
                Ok(())
            }
            None => Err(Error::validation(format!("unknown tolerance key `{key}`"))),
        }
    }

    pub fn with_overrides(mut self, map: &BTreeMap<String, f64>) -> Result<Self> {
        for (k, v) in map {
            self.set(k, *v)?;
        }
        Ok(self)
    }

    /// Parse `key=value` pairs separated by commas, or a JSON object.
    pub fn parse_overrides(text: &str) -> Result<BTreeMap<String, f64>> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(BTreeMap::new());
        }
        if text.starts_with('{') {
            return serde_json::from_str(text)
                .map_err(|e| Error::validation(format!("{ENV_VAR}: {e}")));
        }
        let mut map = BTreeMap::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::validation(format!("{ENV_VAR}: expected key=value, got `{part}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::validation(format!("{ENV_VAR}: `{}` is not a number", v.trim())))?;
            map.insert(k.trim().to_string(), v);
        }
        Ok(map)
    }

    /// Defaults overridden by the environment variable, if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENV_VAR) {
            Ok(text) => Tolerances::default().with_overrides(&Self::parse_overrides(&text)?),
            Err(_) => Ok(Tolerances::default()),
        }
    }

    pub fn max_iter(&self) -> usize {
        self.max_iterations.max(1.0) as usize
    }

    pub fn points(&self) -> usize {
        (self.default_points as usize).max(8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_both_syntaxes() {
        let a = Tolerances::parse_overrides("membership=1e-6, closure=0.01").unwrap();
        let b = Tolerances::parse_overrides(r#"{"membership":1e-6,"closure":0.01}"#).unwrap();
        assert_eq!(a, b);
        let t = Tolerances::default().with_overrides(&a).unwrap();
        assert_eq!(t.membership, 1e-6);
    }

    #[test]
    fn unknown_key_is_named() {
        let mut m = BTreeMap::new();
        m.insert("bogus".to_string(), 1.0);
        let err = Tolerances::default().with_overrides(&m).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
