//! JSON run configuration: one file per experiment, with dotted-path
//! overrides.
//!
//! ```json
//! {
//!   "domain": {"kind": "polygon", "name": "square", "zeta": [0, 0],
//!              "params": {"vertices": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]}},
//!   "p": 2,
//!   "n_list": [8, 16, 32, 64, 96],
//!   "reference": {"kind": "self", "n_ref": 256},
//!   "seed": 1
//! }
//! ```
//!
//! Optional keys: `quadrature` (`panels_per_arc`, `points_per_panel`,
//! `grading`), `leja_points`, `k_max`, `zeros`, `zeros_max_degree`,
//! `check_trials`, `map` (`n`).

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::{
    RateConfig, ReferenceChoice, DEFAULT_CHECK_TRIALS, DEFAULT_K_MAX, DEFAULT_LEJA_POINTS,
    DEFAULT_ZEROS_MAX_DEGREE,
};
use crate::geom::{build_domain, DomainDescription};
use crate::quad::{Resolution, DEFAULT_GRADING};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub panels_per_arc: usize,
    pub points_per_panel: usize,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    /// Degree for the `map` command; defaults to the first of `n_list`.
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainDescription,
    pub p: f64,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
    pub reference: ReferenceChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_leja")]
    pub leja_points: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub zeros: bool,
    #[serde(default = "default_zeros_max")]
    pub zeros_max_degree: usize,
    #[serde(default = "default_trials")]
    pub check_trials: usize,
    #[serde(default)]
    pub map: MapConfig,
}

fn default_grading() -> f64 {
    DEFAULT_GRADING
}
fn default_leja() -> usize {
    DEFAULT_LEJA_POINTS
}
fn default_k_max() -> usize {
    DEFAULT_K_MAX
}
fn default_zeros_max() -> usize {
    DEFAULT_ZEROS_MAX_DEGREE
}
fn default_trials() -> usize {
    DEFAULT_CHECK_TRIALS
}

impl RunConfig {
    pub fn from_value(v: Value) -> Result<Self> {
        serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(parse(text)?)
    }

    /// Reads `path` and applies `key=value` overrides before decoding.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut v = parse(&text)?;
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        Self::from_value(v)
    }

    /// Canonical pretty JSON of the resolved configuration.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn map_degree(&self) -> Result<usize> {
        self.map
            .n
            .or_else(|| self.n_list.first().copied())
            .ok_or_else(|| Error::Config("n_list is empty".into()))
    }

    /// Builds the domain and the validated sweep configuration.
    pub fn rate_config(&self) -> Result<RateConfig> {
        let domain = build_domain(&self.domain)?;
        let mut cfg = RateConfig::new(domain, self.p, self.n_list.clone(), self.reference);
        cfg.resolution = self.quadrature.map(|q| Resolution {
            panels_per_arc: q.panels_per_arc,
            points_per_panel: q.points_per_panel,
            grading: q.grading,
        });
        cfg.seed = self.seed;
        cfg.leja_points = self.leja_points;
        cfg.k_max = self.k_max;
        cfg.zeros = self.zeros;
        cfg.zeros_max_degree = self.zeros_max_degree;
        cfg.check_trials = self.check_trials;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Sets `a.b.c=value` in a JSON object; `value` is parsed as JSON when it
/// parses, otherwise taken as a string. Intermediate objects are created.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override key {path:?} has an empty segment")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    for (i, key) in keys.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override {path:?}: {} is not an object", keys[..i].join("."))))?;
        if i + 1 == keys.len() {
            obj.insert((*key).to_string(), value);
            return Ok(());
        }
        cur = obj
            .entry((*key).to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("keys is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    const SQUARE: &str = r#"{
        "domain": {"kind": "polygon", "name": "square", "zeta": [0, 0],
                   "params": {"vertices": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]}},
        "p": 2, "n_list": [4, 8], "reference": {"kind": "self", "n_ref": 32}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_json(SQUARE).unwrap();
        assert_eq!(c.leja_points, DEFAULT_LEJA_POINTS);
        assert_eq!(c.reference, ReferenceChoice::SelfRef { n_ref: 32 });
        assert_eq!(c.map_degree().unwrap(), 4);
        let rc = c.rate_config().unwrap();
        assert_eq!(rc.domain.arc_count(), 4);
        let back = RunConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_fields() {
        let mut v: Value = serde_json::from_str(SQUARE).unwrap();
        v["bogus"] = json!(1);
        assert!(matches!(RunConfig::from_value(v), Err(Error::Config(_))));
        let mut v: Value = serde_json::from_str(SQUARE).unwrap();
        v["reference"]["extra"] = json!(1);
        assert!(RunConfig::from_value(v).is_err());
    }

    #[test]
    fn overrides() {
        let mut v: Value = serde_json::from_str(SQUARE).unwrap();
        apply_override(&mut v, "p=1").unwrap();
        apply_override(&mut v, "reference.n_ref=64").unwrap();
        apply_override(&mut v, "n_list=[2,3,5]").unwrap();
        apply_override(&mut v, "domain.name=sq2").unwrap();
        apply_override(&mut v, "map.n=3").unwrap();
        let c = RunConfig::from_value(v.clone()).unwrap();
        assert_eq!(c.p, 1.0);
        assert_eq!(c.reference, ReferenceChoice::SelfRef { n_ref: 64 });
        assert_eq!(c.n_list, vec![2, 3, 5]);
        assert_eq!(c.domain.name, "sq2");
        assert_eq!(c.map.n, Some(3));
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "p.x=1").is_err());
        assert!(apply_override(&mut v, "a..b=1").is_err());
    }

    #[test]
    fn invalid_sweeps_are_config_errors() {
        let mut v: Value = serde_json::from_str(SQUARE).unwrap();
        apply_override(&mut v, "n_list=[8,4]").unwrap();
        let c = RunConfig::from_value(v).unwrap();
        assert!(matches!(c.rate_config(), Err(Error::Config(_))));
    }
}
