//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments run to end of line
//! masses = 1, 10, 100
//! dimension = 3
//! contact_latency = 0.25
//! ```
//!
//! Omitted keys take their defaults; unknown or repeated keys are errors.
//! Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::error::ModelError;
use crate::scaling::{
    exponent_grid, ArchitectureSpec, DetectionMode, ModelParams, RecruitmentMode,
};
use crate::scenario::{Model3Exponent, DEFAULT_LIMITED_LAMBDA, DEFAULT_LIMITED_RHO};
use crate::sim::{Movement, Point, SimConfig, DEFAULT_WALK_STEP_FRACTION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },

    #[error("{}`{key}`: {message}", location(*line))]
    Value {
        line: usize,
        key: String,
        message: String,
    },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn location(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!("line {line}: ")
    }
}

impl ConfigError {
    /// Key named by the error, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey { key, .. }
            | ConfigError::DuplicateKey { key, .. }
            | ConfigError::Value { key, .. } => Some(key),
            _ => None,
        }
    }
}

const KEYS: &[&str] = &[
    "cognate_frequency",
    "bcrit_coefficient",
    "antibody_coefficient",
    "plasma_yield",
    "doubling_time",
    "detector_speed",
    "contact_latency",
    "contention_coefficient",
    "body_volume_coefficient",
    "transit_coefficient",
    "recruitment",
    "exponent",
    "exponents",
    "grid_resolution",
    "base_hub_count",
    "base_hub_size",
    "dimension",
    "masses",
    "mode",
    "movement",
    "trials",
    "seed",
    "detectors",
    "walk_step",
    "site",
    "limited_rho",
    "limited_lambda",
    "model3_exponent",
    "output",
];

/// Everything a CLI run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    /// Baseline and single exponent used by `analyze` and `simulate`.
    pub arch: ArchitectureSpec,
    /// Exponents swept by `sweep`.
    pub exponents: Vec<f64>,
    pub grid_resolution: u32,
    pub masses: Vec<f64>,
    pub mode: DetectionMode,
    pub movement: Movement,
    pub trials: usize,
    pub seed: u64,
    pub detectors: usize,
    pub walk_step: f64,
    pub site: Option<Point>,
    pub limited_rho: f64,
    pub limited_lambda: f64,
    pub model3: Model3Exponent,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

struct Fields<'a> {
    entries: BTreeMap<&'a str, Entry<'a>>,
}

impl<'a> Fields<'a> {
    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            line: self.line_of(key),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.entries.get(key).map(|e| e.value)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e: T::Err| self.err(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn float(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.parse(key, default)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(key, "value must be finite"))
        }
    }

    fn float_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        let values = raw
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(key, format!("cannot parse `{s}` as a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(values))
    }
}

fn model_error(fields: &Fields<'_>, err: ModelError) -> ConfigError {
    match err {
        ModelError::InvalidParameter { name, reason } => fields.err(name, reason),
        other => ConfigError::Value {
            line: 0,
            key: String::new(),
            message: other.to_string(),
        },
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if entries.insert(key, Entry { line, value }).is_some() {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }
    let f = Fields { entries };

    let bcrit_coefficient = f.float("bcrit_coefficient", 0.5)?;
    let plasma_yield = f.float("plasma_yield", 1.0)?;
    let doubling_time = f.float("doubling_time", 1.0)?;
    let mut params = ModelParams {
        cognate_frequency: f.float("cognate_frequency", 1e-6)?,
        bcrit_coefficient,
        antibody_coefficient: 0.0,
        plasma_yield,
        doubling_time,
        detector_speed: f.float("detector_speed", 1.0)?,
        contact_latency: f.float("contact_latency", 0.5)?,
        contention_coefficient: f.float("contention_coefficient", 1.0)?,
        body_volume_coefficient: f.float("body_volume_coefficient", 1.0)?,
        transit_coefficient: f.float("transit_coefficient", 0.0)?,
        recruitment: f.parse("recruitment", RecruitmentMode::Serial)?,
    };
    params.antibody_coefficient = match f.raw("antibody_coefficient") {
        Some(_) => f.float("antibody_coefficient", 0.0)?,
        None => ModelParams::calibrated_antibody_coefficient(
            bcrit_coefficient,
            plasma_yield,
            doubling_time,
        ),
    };
    params.validate().map_err(|e| model_error(&f, e))?;

    let dimension: u8 = f.parse("dimension", 2)?;
    let arch = ArchitectureSpec::new(
        f.float("exponent", 0.5)?,
        f.float("base_hub_count", 1.0)?,
        f.float("base_hub_size", 1e6)?,
        dimension,
    )
    .map_err(|e| model_error(&f, e))?;

    let grid_resolution: u32 = f.parse("grid_resolution", 20)?;
    if grid_resolution == 0 {
        return Err(f.err("grid_resolution", "must be > 0"));
    }
    let exponents = match f.float_list("exponents")? {
        Some(list) => list,
        None => exponent_grid(grid_resolution).map_err(|e| model_error(&f, e))?,
    };
    if exponents.is_empty() || exponents.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(f.err("exponents", "every exponent must lie in [0, 1]"));
    }

    let masses = f
        .float_list("masses")?
        .unwrap_or_else(|| vec![1.0, 10.0, 100.0, 1000.0, 10000.0]);
    if masses.is_empty() || masses.iter().any(|m| *m <= 0.0) {
        return Err(f.err("masses", "every mass must be > 0"));
    }

    let trials: usize = f.parse("trials", 100)?;
    if trials == 0 {
        return Err(f.err("trials", "must be > 0"));
    }
    let detectors: usize = f.parse("detectors", 1)?;
    if detectors == 0 {
        return Err(f.err("detectors", "must be > 0"));
    }
    let walk_step = f.float("walk_step", DEFAULT_WALK_STEP_FRACTION)?;
    if !(walk_step > 0.0 && walk_step <= 1.0) {
        return Err(f.err("walk_step", "must lie in (0, 1]"));
    }

    let site = match f.raw("site") {
        None | Some("random") => None,
        Some(_) => {
            let coords = f.float_list("site")?.unwrap_or_default();
            if coords.len() != dimension as usize {
                return Err(f.err(
                    "site",
                    format!("expected {dimension} coordinates or `random`"),
                ));
            }
            let mut p = [0.0; 3];
            p[..coords.len()].copy_from_slice(&coords);
            Some(p)
        }
    };

    let limited_rho = f.float("limited_rho", DEFAULT_LIMITED_RHO)?;
    let limited_lambda = f.float("limited_lambda", DEFAULT_LIMITED_LAMBDA)?;
    for (key, v) in [
        ("limited_rho", limited_rho),
        ("limited_lambda", limited_lambda),
    ] {
        if v <= 0.0 {
            return Err(f.err(key, "must be > 0"));
        }
    }
    let model3 = match f.raw("model3_exponent") {
        None | Some("auto") => Model3Exponent::Auto {
            intervals: grid_resolution.max(2),
        },
        Some(_) => {
            let a = f.float("model3_exponent", 0.5)?;
            if !(a > 0.0 && a < 1.0) {
                return Err(f.err("model3_exponent", "must be `auto` or lie in (0, 1)"));
            }
            Model3Exponent::Fixed(a)
        }
    };

    Ok(RunConfig {
        params,
        arch,
        exponents,
        grid_resolution,
        masses,
        mode: f.parse("mode", DetectionMode::Spatial)?,
        movement: f.parse("movement", Movement::Straight)?,
        trials,
        seed: f.parse("seed", 42)?,
        detectors,
        walk_step,
        site,
        limited_rho,
        limited_lambda,
        model3,
        output: f.raw("output").map(str::to_string),
    })
}

pub fn read_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes every key explicitly; `parse_config(&emit_config(c)) == c`.
pub fn emit_config(c: &RunConfig) -> String {
    let p = &c.params;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("cognate_frequency", p.cognate_frequency.to_string());
    kv("bcrit_coefficient", p.bcrit_coefficient.to_string());
    kv("antibody_coefficient", p.antibody_coefficient.to_string());
    kv("plasma_yield", p.plasma_yield.to_string());
    kv("doubling_time", p.doubling_time.to_string());
    kv("detector_speed", p.detector_speed.to_string());
    kv("contact_latency", p.contact_latency.to_string());
    kv(
        "contention_coefficient",
        p.contention_coefficient.to_string(),
    );
    kv(
        "body_volume_coefficient",
        p.body_volume_coefficient.to_string(),
    );
    kv("transit_coefficient", p.transit_coefficient.to_string());
    kv("recruitment", p.recruitment.as_str().to_string());
    kv("exponent", c.arch.exponent().to_string());
    kv("exponents", join(&c.exponents));
    kv("grid_resolution", c.grid_resolution.to_string());
    kv("base_hub_count", c.arch.base_hub_count().to_string());
    kv("base_hub_size", c.arch.base_hub_size().to_string());
    kv("dimension", c.arch.dimension().to_string());
    kv("masses", join(&c.masses));
    kv("mode", c.mode.as_str().to_string());
    kv("movement", c.movement.as_str().to_string());
    kv("trials", c.trials.to_string());
    kv("seed", c.seed.to_string());
    kv("detectors", c.detectors.to_string());
    kv("walk_step", c.walk_step.to_string());
    kv(
        "site",
        match c.site {
            None => "random".to_string(),
            Some(p) => join(&p[..c.arch.dimension() as usize]),
        },
    );
    kv("limited_rho", c.limited_rho.to_string());
    kv("limited_lambda", c.limited_lambda.to_string());
    kv(
        "model3_exponent",
        match c.model3 {
            Model3Exponent::Auto { .. } => "auto".to_string(),
            Model3Exponent::Fixed(a) => a.to_string(),
        },
    );
    if let Some(path) = &c.output {
        kv("output", path.clone());
    }
    out
}

impl RunConfig {
    /// Simulation settings for one mass and seed.
    pub fn sim_config(&self, mass: f64, seed: u64) -> SimConfig {
        SimConfig {
            site: self.site,
            detectors: self.detectors,
            movement: self.movement,
            walk_step_fraction: self.walk_step,
            ..SimConfig::new(mass, self.arch, self.params, seed)
        }
    }
}
