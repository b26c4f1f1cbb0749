//! Run configuration: one JSON document whose defaults are the experiment
//! defaults, with dotted-path overrides for command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::flocking::{FlockError, FlockParams};
use crate::harness::gamma_grid;
use crate::vessel::{SailingLimits, VesselError};
use crate::wind::{EnvKind, GustParams, WindError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid override {0:?}: expected FIELD=VALUE")]
    BadOverride(String),
    #[error("override path {0:?} does not name a config field")]
    UnknownField(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Flock(#[from] FlockError),
    #[error(transparent)]
    Sailing(#[from] VesselError),
    #[error(transparent)]
    Wind(#[from] WindError),
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        let mut message = e.to_string();
        if let Some(at) = message.rfind(" at line ") {
            message.truncate(at);
        }
        ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

/// Serde adapter storing radians as degrees.
pub mod degrees {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(radians: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(radians.to_degrees())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(f64::to_radians)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindSettings {
    /// Direction the base wind blows toward.
    #[serde(rename = "base_direction_deg", with = "degrees")]
    pub base_direction: f64,
    pub gust: GustParams,
}

impl Default for WindSettings {
    fn default() -> Self {
        Self {
            base_direction: 0.0,
            gust: GustParams::default(),
        }
    }
}

/// Environments × γ values × seeds for a sweep; the baseline is always included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepPlan {
    pub environments: Vec<EnvKind>,
    pub gammas: Vec<f64>,
    pub epsilon: f64,
    /// Number of seeds; seeds run `first_seed .. first_seed + seeds`.
    pub seeds: u64,
    pub first_seed: u64,
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            environments: EnvKind::SWEEP.to_vec(),
            gammas: gamma_grid(),
            epsilon: 0.1,
            seeds: 50,
            first_seed: 1,
        }
    }
}

impl SweepPlan {
    pub fn seed_list(&self) -> Vec<u64> {
        (self.first_seed..self.first_seed + self.seeds).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.environments.is_empty() || self.gammas.is_empty() || self.seeds == 0 {
            return Err(ConfigError::Invalid("sweep needs at least one environment, gamma and seed".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(ConfigError::Invalid("sweep.epsilon must be positive".into()));
        }
        if self.gammas.iter().any(|g| !g.is_finite()) {
            return Err(ConfigError::Invalid("sweep.gammas must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub n_robots: usize,
    /// Arena half-size, m; positions live in [−arena_half, arena_half)².
    pub arena_half: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Radius of the start disk, m.
    pub init_radius: f64,
    pub environment: EnvKind,
    pub wind: WindSettings,
    pub sailing: SailingLimits,
    pub flock: FlockParams,
    /// Steady-state analysis window `[start, end]`, s.
    pub window: (f64, f64),
    pub sweep: SweepPlan,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_robots: 10,
            arena_half: 35.0,
            dt: 1.0,
            horizon: 300.0,
            init_radius: 10.0,
            environment: EnvKind::Steady10,
            wind: WindSettings::default(),
            sailing: SailingLimits::default(),
            flock: FlockParams::default(),
            window: (100.0, 300.0),
            sweep: SweepPlan::default(),
        }
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies `FIELD=VALUE` overrides before validation.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let value: Value = serde_json::from_str(&text)?;
        Self::from_value(value, overrides)
    }

    /// Builds a config from a JSON tree after applying `FIELD=VALUE` overrides.
    pub fn from_value(mut value: Value, overrides: &[String]) -> Result<Self, ConfigError> {
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let cfg: SimConfig = serde_json::from_value(value).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default config with overrides applied.
    pub fn with_overrides(overrides: &[String]) -> Result<Self, ConfigError> {
        let value = serde_json::to_value(SimConfig::default()).expect("config serializes");
        Self::from_value(value, overrides)
    }

    /// Compact JSON with fields in declaration order; stable input for digests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_robots < 2 {
            return Err(ConfigError::Invalid("n_robots must be at least 2".into()));
        }
        if !(self.dt > 0.0) {
            return Err(ConfigError::Invalid("dt must be positive".into()));
        }
        if !(self.horizon >= self.dt) {
            return Err(ConfigError::Invalid("horizon must be at least dt".into()));
        }
        if !(self.arena_half > 0.0) {
            return Err(ConfigError::Invalid("arena_half must be positive".into()));
        }
        if !(self.init_radius > 0.0 && self.init_radius < self.arena_half) {
            return Err(ConfigError::Invalid("init_radius must be in (0, arena_half)".into()));
        }
        let (start, end) = self.window;
        if !(0.0 <= start && start <= end && end <= self.horizon) {
            return Err(ConfigError::Invalid("window must satisfy 0 <= start <= end <= horizon".into()));
        }
        self.wind.gust.validate()?;
        self.sailing.validate()?;
        self.flock.validate()?;
        self.sweep.validate()
    }
}

/// Sets `a.b.c=value` inside a JSON config. The value is parsed as JSON when
/// possible (numbers, booleans, arrays) and taken as a string otherwise.
/// Intermediate objects are created on demand; the result is checked when the
/// document is deserialized.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(assignment.to_string()))?;
    let path = path.trim().trim_start_matches("--");
    if path.is_empty() {
        return Err(ConfigError::BadOverride(assignment.to_string()));
    }
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| ConfigError::UnknownField(path.to_string()))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
