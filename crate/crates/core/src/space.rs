//! Mixed-type hyperparameter search spaces.
//!
//! A [`SearchSpace`] is an ordered list of [`ParamSpec`]s. Samplers and the
//! surrogate work on the unit cube `[0,1]^d`; [`SearchSpace::repair`] maps a
//! raw unit-scale vector back to a feasible typed configuration and
//! [`SearchSpace::to_unit`] does the inverse. Factor levels occupy stratum
//! midpoints on the unit axis so that uniform unit sampling induces uniform
//! level sampling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter `{param}`: {reason}")]
    Infeasible { param: String, reason: String },
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("unknown preset `{0}` (available: table2, section34)")]
    UnknownPreset(String),
}

/// Axis transform used when mapping a parameter onto the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log10,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Numeric,
    Integer,
    Factor,
}

/// A single typed coordinate of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Float(f64),
    Int(i64),
    Level(String),
}

impl ParamValue {
    /// Natural-scale numeric encoding: integers as floats, factor levels as
    /// their index within `levels`.
    pub fn as_f64(&self, levels: &[String]) -> Option<f64> {
        match self {
            ParamValue::Float(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Level(l) => levels.iter().position(|x| x == l).map(|i| i as f64),
        }
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Level(l) => write!(f, "{l}"),
        }
    }
}

/// One dimension of the search space.
///
/// Invalid specifications are representable on purpose; [`SearchSpace::validate`]
/// reports violations as data rather than failing construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<ParamValue>,
}

impl ParamSpec {
    pub fn numeric(name: &str, lower: f64, upper: f64) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind: ParamKind::Numeric,
            lower: Some(lower),
            upper: Some(upper),
            levels: Vec::new(),
            scale: Scale::Linear,
            default: None,
        }
    }

    pub fn integer(name: &str, lower: i64, upper: i64) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind: ParamKind::Integer,
            lower: Some(lower as f64),
            upper: Some(upper as f64),
            levels: Vec::new(),
            scale: Scale::Linear,
            default: None,
        }
    }

    pub fn factor(name: &str, levels: &[&str]) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind: ParamKind::Factor,
            lower: None,
            upper: None,
            levels: levels.iter().map(|s| s.to_string()).collect(),
            scale: Scale::Linear,
            default: None,
        }
    }

    pub fn log10(mut self) -> Self {
        self.scale = Scale::Log10;
        self
    }

    pub fn with_default(mut self, default: ParamValue) -> Self {
        self.default = Some(default);
        self
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        let mut push = |reason: String| {
            out.push(Violation {
                param: self.name.clone(),
                reason,
            })
        };
        match self.kind {
            ParamKind::Numeric | ParamKind::Integer => {
                match (self.lower, self.upper) {
                    (Some(lo), Some(hi)) => {
                        if !(lo < hi) {
                            push(format!("lower < upper required, got [{lo}, {hi}]"));
                        }
                        if self.scale == Scale::Log10 && !(lo > 0.0) {
                            push(format!("log scale requires positive lower, got {lo}"));
                        }
                    }
                    _ => push("numeric/integer parameters need lower and upper bounds".into()),
                }
                if !self.levels.is_empty() {
                    push("levels are only valid for factor parameters".into());
                }
            }
            ParamKind::Factor => {
                let mut distinct = self.levels.clone();
                distinct.sort();
                distinct.dedup();
                if distinct.len() < 2 {
                    push(format!(
                        "factor requires at least 2 distinct levels, got {}",
                        distinct.len()
                    ));
                }
                if self.lower.is_some() || self.upper.is_some() {
                    push("factor parameters must not carry bounds".into());
                }
            }
        }
        if let Some(default) = &self.default {
            if self.feasibility(default).is_err() {
                push(format!("default {default} lies outside the domain"));
            }
        }
    }

    /// Checks that `value` has the right type and lies inside the domain.
    fn feasibility(&self, value: &ParamValue) -> Result<(), String> {
        match (self.kind, value) {
            (ParamKind::Numeric, ParamValue::Float(v)) => {
                let (lo, hi) = (self.lower.unwrap_or(f64::NAN), self.upper.unwrap_or(f64::NAN));
                if *v >= lo && *v <= hi {
                    Ok(())
                } else {
                    Err(format!("value {v} outside [{lo}, {hi}]"))
                }
            }
            (ParamKind::Integer, ParamValue::Int(v)) => {
                let (lo, hi) = (self.lower.unwrap_or(f64::NAN), self.upper.unwrap_or(f64::NAN));
                if (*v as f64) >= lo && (*v as f64) <= hi {
                    Ok(())
                } else {
                    Err(format!("value {v} outside [{lo}, {hi}]"))
                }
            }
            (ParamKind::Factor, ParamValue::Level(l)) => {
                if self.levels.iter().any(|x| x == l) {
                    Ok(())
                } else {
                    Err(format!("unknown level `{l}`"))
                }
            }
            _ => Err(format!("value {value} has the wrong type for {:?}", self.kind)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub param: String,
    pub reason: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.param, self.reason)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A feasible typed configuration, one value per space dimension.
pub type Config = Vec<ParamValue>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>) -> Self {
        SearchSpace { params }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    /// Checks every `ParamSpec` invariant plus name uniqueness and `d >= 1`.
    /// Violations are reported, never raised.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.params.is_empty() {
            report.violations.push(Violation {
                param: "<space>".into(),
                reason: "search space needs at least one parameter".into(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for p in &self.params {
            if !seen.insert(p.name.clone()) {
                report.violations.push(Violation {
                    param: p.name.clone(),
                    reason: "duplicate parameter name".into(),
                });
            }
            p.violations(&mut report.violations);
        }
        report
    }

    /// Maps a feasible configuration onto the unit cube.
    ///
    /// Numeric and integer dimensions map affinely (on the log10 axis when the
    /// parameter is log-scaled); the i-th of L factor levels maps to the
    /// stratum midpoint `(i + 0.5) / L`.
    pub fn to_unit(&self, config: &Config) -> Result<Vec<f64>, SpaceError> {
        if config.len() != self.dim() {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dim(),
                got: config.len(),
            });
        }
        let mut u = Vec::with_capacity(self.dim());
        for (p, v) in self.params.iter().zip(config) {
            p.feasibility(v).map_err(|reason| SpaceError::Infeasible {
                param: p.name.clone(),
                reason,
            })?;
            let coord = match (p.kind, v) {
                (ParamKind::Numeric, ParamValue::Float(x)) => p.affine_to_unit(*x),
                (ParamKind::Integer, ParamValue::Int(x)) => p.affine_to_unit(*x as f64),
                (ParamKind::Factor, ParamValue::Level(l)) => {
                    let i = p.levels.iter().position(|x| x == l).unwrap();
                    (i as f64 + 0.5) / p.levels.len() as f64
                }
                _ => unreachable!("feasibility guarantees matching kinds"),
            };
            u.push(coord);
        }
        Ok(u)
    }

    /// Maps a raw real vector to the nearest feasible typed configuration.
    ///
    /// Coordinates are clamped to `[0,1]` first. Integers round half away
    /// from zero and clamp to their bounds; factor coordinates select the
    /// stratum `floor(u * L)` clamped to the last level. Total on all of
    /// `R^d` and idempotent.
    pub fn repair(&self, raw: &[f64]) -> Result<Config, SpaceError> {
        if raw.len() != self.dim() {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dim(),
                got: raw.len(),
            });
        }
        let mut config = Vec::with_capacity(self.dim());
        for (p, &r) in self.params.iter().zip(raw) {
            let u = if r.is_nan() { 0.0 } else { r.clamp(0.0, 1.0) };
            let value = match p.kind {
                ParamKind::Numeric => ParamValue::Float(p.affine_from_unit(u)),
                ParamKind::Integer => {
                    let (lo, hi) = (p.lower.unwrap(), p.upper.unwrap());
                    let v = p.affine_from_unit(u).round().clamp(lo, hi);
                    ParamValue::Int(v as i64)
                }
                ParamKind::Factor => {
                    let count = p.levels.len();
                    let i = ((u * count as f64).floor() as usize).min(count - 1);
                    ParamValue::Level(p.levels[i].clone())
                }
            };
            config.push(value);
        }
        Ok(config)
    }

    /// Per-dimension kind tags, as consumed by the surrogate's kernel.
    pub fn kinds(&self) -> Vec<ParamKind> {
        self.params.iter().map(|p| p.kind).collect()
    }

    /// Natural-scale numeric encoding of a configuration (factor levels as
    /// indices). This is the row format of a result object's `x` matrix.
    pub fn natural_vec(&self, config: &Config) -> Vec<f64> {
        self.params
            .iter()
            .zip(config)
            .map(|(p, v)| v.as_f64(&p.levels).unwrap_or(f64::NAN))
            .collect()
    }

    /// Default configuration, available when every parameter declares one.
    pub fn default_config(&self) -> Option<Config> {
        self.params.iter().map(|p| p.default.clone()).collect()
    }

    /// Rebuilds a typed configuration from its natural-scale numeric row
    /// (the inverse of [`SearchSpace::natural_vec`]).
    pub fn config_from_natural(&self, row: &[f64]) -> Result<Config, SpaceError> {
        if row.len() != self.dim() {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        self.params
            .iter()
            .zip(row)
            .map(|(p, &v)| match p.kind {
                ParamKind::Numeric => Ok(ParamValue::Float(v)),
                ParamKind::Integer => Ok(ParamValue::Int(v.round() as i64)),
                ParamKind::Factor => {
                    let i = v.round() as usize;
                    p.levels
                        .get(i)
                        .map(|l| ParamValue::Level(l.clone()))
                        .ok_or_else(|| SpaceError::Infeasible {
                            param: p.name.clone(),
                            reason: format!("level index {i} out of range"),
                        })
                }
            })
            .collect()
    }

    /// Named demo spaces for the bundled two-hidden-layer network: two bound
    /// sets over the same eight tunables (`section34` is the narrower one),
    /// sharing one set of defaults.
    pub fn preset(name: &str) -> Result<SearchSpace, SpaceError> {
        let space = match name {
            "table2" => SearchSpace::new(vec![
                ParamSpec::numeric("dropout1", 1e-6, 1.0).with_default(ParamValue::Float(0.4)),
                ParamSpec::numeric("dropout2", 1e-6, 1.0).with_default(ParamValue::Float(0.3)),
                ParamSpec::integer("units1", 16, 512).with_default(ParamValue::Int(256)),
                ParamSpec::integer("units2", 4, 256).with_default(ParamValue::Int(128)),
                ParamSpec::numeric("lr", 1e-4, 0.1).with_default(ParamValue::Float(0.001)),
                ParamSpec::integer("epochs", 5, 25).with_default(ParamValue::Int(20)),
                ParamSpec::integer("batch_size", 8, 256).with_default(ParamValue::Int(64)),
                ParamSpec::numeric("rho", 0.5, 0.999).with_default(ParamValue::Float(0.9)),
            ]),
            "section34" => SearchSpace::new(vec![
                ParamSpec::numeric("dropout1", 1e-6, 0.5).with_default(ParamValue::Float(0.4)),
                ParamSpec::numeric("dropout2", 1e-6, 0.5).with_default(ParamValue::Float(0.3)),
                ParamSpec::integer("units1", 16, 512).with_default(ParamValue::Int(256)),
                ParamSpec::integer("units2", 16, 256).with_default(ParamValue::Int(128)),
                ParamSpec::numeric("lr", 1e-9, 1e-2).with_default(ParamValue::Float(0.001)),
                ParamSpec::integer("epochs", 10, 50).with_default(ParamValue::Int(20)),
                ParamSpec::integer("batch_size", 16, 512).with_default(ParamValue::Int(64)),
                ParamSpec::numeric("rho", 0.5, 0.999).with_default(ParamValue::Float(0.9)),
            ]),
            other => return Err(SpaceError::UnknownPreset(other.to_string())),
        };
        Ok(space)
    }
}

impl ParamSpec {
    fn axis(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => v,
            Scale::Log10 => v.log10(),
        }
    }

    fn affine_to_unit(&self, v: f64) -> f64 {
        let (lo, hi) = (
            self.axis(self.lower.unwrap()),
            self.axis(self.upper.unwrap()),
        );
        (self.axis(v) - lo) / (hi - lo)
    }

    fn affine_from_unit(&self, u: f64) -> f64 {
        let (lo, hi) = (
            self.axis(self.lower.unwrap()),
            self.axis(self.upper.unwrap()),
        );
        let on_axis = lo + u * (hi - lo);
        match self.scale {
            Scale::Linear => on_axis,
            Scale::Log10 => 10f64.powf(on_axis),
        }
    }
}
