//! Experiment configuration files (JSON).

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nonlocal_flow_core::profile::presets;
use nonlocal_flow_core::solver::DEFAULT_FLOOR_GUARD;
use nonlocal_flow_core::{ErosionFunction, Grid, Profile, SolverConfig};

use crate::io::{self, LoadError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("initial profile {}: {source}", path.display())]
    Profile { path: PathBuf, source: LoadError },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// Key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Run,
    Convergence,
    Stability,
    Riemann,
    ValidateK,
    Entropy,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::Convergence => "convergence",
            Experiment::Stability => "stability",
            Experiment::Riemann => "riemann",
            Experiment::ValidateK => "validate-k",
            Experiment::Entropy => "entropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_left: f64,
    pub cells: usize,
}

/// Initial data: a named preset or a CSV file with header `x,q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    Bump { center: f64, width: f64, height: f64 },
    Step { location: f64, left: f64, right: f64 },
    File(PathBuf),
}

impl InitialSpec {
    /// Builds the profile on `grid`. Relative file paths are resolved
    /// against `base`.
    pub fn build(&self, grid: Grid, base: &Path, key: &str) -> Result<Profile, ConfigError> {
        let built = match *self {
            InitialSpec::Zero => Ok(Profile::zeros(grid)),
            InitialSpec::Bump { center, width, height } => presets::bump(grid, center, width, height),
            InitialSpec::Step { location, left, right } => presets::step(grid, location, left, right),
            InitialSpec::File(ref path) => {
                let path = base.join(path);
                let file = File::open(&path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                return io::load_profile(BufReader::new(file), grid)
                    .map_err(|source| ConfigError::Profile { path, source });
            }
        };
        built.map_err(|e| ConfigError::invalid(key, e.to_string()))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, InitialSpec::Zero)
    }

    fn check(&self, key: &str) -> Result<(), ConfigError> {
        let below = match *self {
            InitialSpec::Bump { height, .. } => height <= -1.0,
            InitialSpec::Step { left, right, .. } => left <= -1.0 || right <= -1.0,
            _ => false,
        };
        if below {
            return Err(ConfigError::invalid(key, "initial data below admissibility floor"));
        }
        if let InitialSpec::Bump { width, .. } = *self {
            if !(width > 0.0) {
                return Err(ConfigError::invalid(key, "bump width must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    grid: GridSpec,
    #[serde(default = "default_erosion")]
    erosion: String,
    initial: InitialSpec,
    second: Option<InitialSpec>,
    t_end: f64,
    #[serde(default = "default_cfl")]
    cfl: f64,
    #[serde(default = "default_snapshots")]
    snapshots: usize,
    #[serde(default = "default_floor_guard")]
    floor_guard: f64,
    #[serde(default = "default_max_steps")]
    max_steps: usize,
    coefficient: Option<f64>,
    #[serde(default = "default_levels")]
    levels: usize,
    #[serde(default = "default_outputs")]
    outputs: PathBuf,
    #[serde(default)]
    seed: u64,
}

fn default_erosion() -> String {
    "canonical".into()
}

fn default_cfl() -> f64 {
    0.9
}

fn default_snapshots() -> usize {
    10
}

fn default_floor_guard() -> f64 {
    DEFAULT_FLOOR_GUARD
}

fn default_max_steps() -> usize {
    10_000_000
}

fn default_levels() -> usize {
    4
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

/// A validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub grid: Grid,
    pub erosion: ErosionFunction,
    pub initial: InitialSpec,
    /// Second datum for `stability`.
    pub second: Option<InitialSpec>,
    pub solver: SolverConfig,
    /// Uniform coefficient replacing the nonlocal one (`riemann` uses 1
    /// when absent).
    pub coefficient: Option<f64>,
    /// Number of grid levels for `convergence`.
    pub levels: usize,
    pub outputs: PathBuf,
    pub seed: u64,
    /// Directory relative file paths are resolved against.
    pub base: PathBuf,
}

impl ExperimentConfig {
    pub fn initial_profile(&self) -> Result<Profile, ConfigError> {
        self.initial.build(self.grid, &self.base, "initial")
    }

    pub fn initial_on(&self, grid: Grid) -> Result<Profile, ConfigError> {
        self.initial.build(grid, &self.base, "initial")
    }

    pub fn second_profile(&self) -> Result<Profile, ConfigError> {
        self.second
            .as_ref()
            .ok_or_else(|| ConfigError::invalid("second", "stability needs a second initial datum"))?
            .build(self.grid, &self.base, "second")
    }

    /// Fails when the config names a different experiment than requested.
    pub fn expect(&self, experiment: Experiment) -> Result<(), ConfigError> {
        match self.experiment {
            Some(e) if e != experiment => Err(ConfigError::invalid(
                "experiment",
                format!("config is for `{}`, not `{}`", e.name(), experiment.name()),
            )),
            _ => Ok(()),
        }
    }
}

/// Parses and validates a config. Relative paths inside it resolve
/// against the current directory.
pub fn parse_config(source: impl Read) -> Result<ExperimentConfig, ConfigError> {
    parse_config_in(source, Path::new("."))
}

pub fn parse_config_in(source: impl Read, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_reader(source);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let key = e.path().to_string();
        let key = if key == "." { "config".to_string() } else { key };
        ConfigError::Invalid {
            key,
            message: e.inner().to_string(),
        }
    })?;
    validate(raw, base)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let file = File::open(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_in(BufReader::new(file), base)
}

fn validate(raw: RawConfig, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    if !(raw.grid.x_left < 0.0) {
        return Err(ConfigError::invalid("grid.x_left", "x_left must be negative"));
    }
    if raw.grid.cells < 8 {
        return Err(ConfigError::invalid("grid.cells", "at least 8 cells required"));
    }
    let grid = Grid::new(raw.grid.x_left, raw.grid.cells).map_err(|e| ConfigError::invalid("grid", e.to_string()))?;
    let erosion = ErosionFunction::by_name(&raw.erosion)
        .ok_or_else(|| ConfigError::invalid("erosion", format!("unknown erosion function `{}`", raw.erosion)))?;
    if !(raw.t_end > 0.0 && raw.t_end.is_finite()) {
        return Err(ConfigError::invalid("t_end", "t_end must be positive"));
    }
    if !(raw.cfl > 0.0 && raw.cfl <= 1.0) {
        return Err(ConfigError::invalid("cfl", "cfl must be in (0,1]"));
    }
    if raw.snapshots == 0 {
        return Err(ConfigError::invalid("snapshots", "at least one snapshot required"));
    }
    if !(raw.floor_guard > -1.0 && raw.floor_guard < 0.0) {
        return Err(ConfigError::invalid("floor_guard", "floor_guard must be in (-1,0)"));
    }
    if raw.max_steps == 0 {
        return Err(ConfigError::invalid("max_steps", "max_steps must be positive"));
    }
    if let Some(k) = raw.coefficient {
        if !(k > 0.0 && k.is_finite()) {
            return Err(ConfigError::invalid("coefficient", "coefficient must be positive"));
        }
    }
    if raw.levels < 3 {
        return Err(ConfigError::invalid("levels", "convergence needs at least 3 levels"));
    }
    raw.initial.check("initial")?;
    if let Some(s) = &raw.second {
        s.check("second")?;
    }
    let solver = SolverConfig {
        cfl: raw.cfl,
        floor_guard: raw.floor_guard,
        max_steps: raw.max_steps,
        ..SolverConfig::new(raw.t_end).with_snapshot_count(raw.snapshots)
    };
    let cfg = ExperimentConfig {
        experiment: raw.experiment,
        grid,
        erosion,
        initial: raw.initial,
        second: raw.second,
        solver,
        coefficient: raw.coefficient,
        levels: raw.levels,
        outputs: raw.outputs,
        seed: raw.seed,
        base: base.to_path_buf(),
    };
    // surfaces missing files and bad presets at parse time
    cfg.initial_profile()?;
    if cfg.second.is_some() {
        cfg.second_profile()?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig, ConfigError> {
        parse_config(s.as_bytes())
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse(
            r#"{"experiment": "run", "grid": {"x_left": -2, "cells": 200},
                "erosion": "canonical", "initial": "zero", "t_end": 1}"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, Some(Experiment::Run));
        assert_eq!(cfg.grid.cells(), 200);
        assert_eq!(cfg.solver.cfl, 0.9);
        assert_eq!(cfg.solver.floor_guard, DEFAULT_FLOOR_GUARD);
        assert_eq!(cfg.solver.snapshot_times.len(), 10);
        assert_eq!(cfg.levels, 4);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.erosion.name(), "canonical");
    }

    #[test]
    fn bad_cfl_names_the_key() {
        let err = parse(r#"{"grid": {"x_left": -1, "cells": 20}, "initial": "zero", "t_end": 1, "cfl": 1.5}"#)
            .unwrap_err();
        assert_eq!(err.key(), Some("cfl"));
        assert!(err.to_string().contains("cfl must be in (0,1]"));
    }

    #[test]
    fn bump_below_floor() {
        let err = parse(
            r#"{"grid": {"x_left": -1, "cells": 20}, "t_end": 1,
                "initial": {"bump": {"center": -0.5, "width": 0.2, "height": -1.2}}}"#,
        )
        .unwrap_err();
        assert_eq!(err.key(), Some("initial"));
        assert!(err.to_string().contains("initial data below admissibility floor"));
    }

    #[test]
    fn unknown_and_mistyped_keys_are_named() {
        let err = parse(r#"{"grid": {"x_left": -1, "cells": 20}, "initial": "zero", "t_end": 1, "cfll": 0.5}"#)
            .unwrap_err();
        assert!(err.to_string().contains("cfll"), "{err}");
        let err = parse(r#"{"grid": {"x_left": -1, "cells": "many"}, "initial": "zero", "t_end": 1}"#).unwrap_err();
        assert_eq!(err.key(), Some("grid.cells"));
        let err = parse(r#"{"grid": {"x_left": -1, "cells": 20}, "initial": "zero"}"#).unwrap_err();
        assert!(err.to_string().contains("t_end"), "{err}");
    }

    #[test]
    fn missing_profile_file() {
        let err = parse(r#"{"grid": {"x_left": -1, "cells": 20}, "initial": {"file": "/nonexistent/q.csv"}, "t_end": 1}"#)
            .unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }), "{err}");
    }

    #[test]
    fn other_validation() {
        let base = r#""initial": "zero", "t_end": 1"#;
        let cases = [
            (r#"{"grid": {"x_left": -1, "cells": 4}, "initial": "zero", "t_end": 1}"#, "grid.cells"),
            (r#"{"grid": {"x_left": 1, "cells": 20}, "initial": "zero", "t_end": 1}"#, "grid.x_left"),
            (r#"{"grid": {"x_left": -1, "cells": 20}, "initial": "zero", "t_end": 0}"#, "t_end"),
            (r#"{"grid": {"x_left": -1, "cells": 20}, "initial": "zero", "t_end": 1, "erosion": "tanh"}"#, "erosion"),
            (r#"{"grid": {"x_left": -1, "cells": 20}, "initial": "zero", "t_end": 1, "levels": 2}"#, "levels"),
        ];
        for (src, key) in cases {
            assert_eq!(parse(src).unwrap_err().key(), Some(key), "{src}");
        }
        let cfg = parse(&format!(r#"{{"grid": {{"x_left": -1, "cells": 20}}, {base}, "experiment": "stability"}}"#))
            .unwrap();
        assert_eq!(cfg.second_profile().unwrap_err().key(), Some("second"));
        assert_eq!(cfg.expect(Experiment::Run).unwrap_err().key(), Some("experiment"));
        assert!(cfg.expect(Experiment::Stability).is_ok());
    }
}
