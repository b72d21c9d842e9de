//! Scenario configuration: TOML files with nested sections, unknown keys rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use qa_hybrid_core::algo_one::Regularization;
use qa_hybrid_core::algo_two::{ModulationSchedule, RegressorForm};
use qa_hybrid_core::estimator::{Coefficient, EstimatorSettings, EstimatorState, Gains};
use qa_hybrid_core::pipeline::{CycleGenerator, Scenario, SourceMode};
use qa_hybrid_core::{InterferometerConfig, TruthParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ConfigError;

/// Estimators a scenario can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Algo1,
    Algo2,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Algo1 => "algo1",
            Algorithm::Algo2 => "algo2",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Either a seed count (`0..n`) or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Count(8)
    }
}

impl Seeds {
    pub fn list(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

/// How the estimators' fringe model departs from the true instrument.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssumedModel {
    /// Relative error of the assumed contrast: `C_assumed = C·(1 + e)`.
    pub contrast_error: f64,
    /// Absolute error of the assumed offset: `P0_assumed = P0 + e`.
    pub offset_error: f64,
}

/// Starting values of the estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialEstimates {
    pub bias: f64,
    pub scale: f64,
    pub eta_prime: f64,
    pub eta_dprime: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub v_x0: f64,
    pub v_y0: f64,
}

impl Default for InitialEstimates {
    fn default() -> Self {
        Self { bias: 0.0, scale: 1.0, eta_prime: 0.0, eta_dprime: 0.0, eta_x: 0.0, eta_y: 0.0, v_x0: 0.0, v_y0: 0.0 }
    }
}

impl InitialEstimates {
    pub fn state(&self) -> EstimatorState {
        EstimatorState {
            b_hat: self.bias,
            eta_hat: self.scale,
            theta: [self.eta_prime, self.eta_dprime, self.eta_x, self.eta_y, self.v_x0, self.v_y0],
            ..EstimatorState::default()
        }
    }
}

/// Settings of one estimator. Unset gains and schedules take the
/// per-algorithm defaults (0.2 with a fixed control phase for Algo I,
/// 0.24 with the three-step modulation for Algo II).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    /// Defaults to `gain`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_gain: Option<f64>,
    /// Gain of every extra coefficient; defaults to `gain`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_gain: Option<f64>,
    /// Per-coefficient overrides of `coefficient_gain`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub coefficient_gains: BTreeMap<Coefficient, f64>,
    pub estimate_scale: bool,
    pub coefficients: Vec<Coefficient>,
    pub contrast_correction: bool,
    /// Averaging time of the σ² normalizations, s.
    pub averaging_time: f64,
    /// Algo I only.
    pub regularization: Regularization,
    /// Algo II only.
    pub regressor_form: RegressorForm,
    /// Algo II only: multiply the increments by `2/C`.
    pub normalize_by_contrast: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModulationSchedule>,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            gain: None,
            scale_gain: None,
            coefficient_gain: None,
            coefficient_gains: BTreeMap::new(),
            estimate_scale: true,
            coefficients: Vec::new(),
            contrast_correction: false,
            averaging_time: 10.0,
            regularization: Regularization::default(),
            regressor_form: RegressorForm::default(),
            normalize_by_contrast: true,
            modulation: None,
        }
    }
}

impl AlgorithmConfig {
    pub fn bias_gain(&self, algorithm: Algorithm) -> f64 {
        self.gain.unwrap_or(match algorithm {
            Algorithm::Algo1 => 0.2,
            Algorithm::Algo2 => 0.24,
        })
    }

    pub fn schedule(&self, algorithm: Algorithm) -> ModulationSchedule {
        self.modulation.unwrap_or(match algorithm {
            Algorithm::Algo1 => ModulationSchedule::Constant { phase: 0.0 },
            Algorithm::Algo2 => ModulationSchedule::default(),
        })
    }

    pub fn settings(&self, algorithm: Algorithm, model: InterferometerConfig) -> EstimatorSettings {
        let g = self.bias_gain(algorithm);
        let mut gains = Gains::uniform(g);
        gains.scale = self.scale_gain.unwrap_or(g);
        gains.theta = [self.coefficient_gain.unwrap_or(g); 6];
        for (c, &v) in &self.coefficient_gains {
            gains.theta[c.index()] = v;
        }
        let mut s = EstimatorSettings::new(model, g);
        s.gains = gains;
        s.estimate_scale = self.estimate_scale;
        s.coefficients = self.coefficients.iter().copied().collect();
        s.contrast_correction = self.contrast_correction;
        s.averaging_time = self.averaging_time;
        s
    }
}

/// Which per-cycle traces to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOutput {
    #[default]
    None,
    FirstSeed,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub traces: TraceOutput,
}

/// One swept parameter: a dotted path into the config and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<toml::Value>,
}

/// A complete scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "defaults::cycles")]
    pub cycles: u64,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default = "defaults::algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Also fit the noise reference series (uncorrelated CA noise and
    /// projected detection noise).
    #[serde(default)]
    pub references: bool,
    /// Leading fraction of each trace excluded from the stability analysis.
    #[serde(default = "defaults::discard_fraction")]
    pub discard_fraction: f64,
    /// Start of the white-noise fit, in loop time constants `Tc/G`.
    #[serde(default = "defaults::fit_start")]
    pub fit_start: f64,
    #[serde(default)]
    pub interferometer: InterferometerConfig,
    #[serde(default = "defaults::source")]
    pub source: SourceMode,
    #[serde(default)]
    pub truth: TruthParams,
    #[serde(default)]
    pub assumed: AssumedModel,
    #[serde(default)]
    pub initial: InitialEstimates,
    #[serde(default)]
    pub algo_one: AlgorithmConfig,
    #[serde(default)]
    pub algo_two: AlgorithmConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

mod defaults {
    use super::*;

    pub fn cycles() -> u64 {
        100_000
    }
    pub fn algorithms() -> Vec<Algorithm> {
        vec![Algorithm::Algo1, Algorithm::Algo2]
    }
    pub fn discard_fraction() -> f64 {
        0.1
    }
    pub fn fit_start() -> f64 {
        20.0
    }
    pub fn source() -> SourceMode {
        SourceMode::Direct
    }
}

/// A scenario with all sweeps applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    /// `(key, value)` of every swept parameter at this point.
    pub params: Vec<(String, String)>,
    pub config: ScenarioConfig,
}

impl SweepPoint {
    /// `key=value` pairs joined by `;`, empty without a sweep.
    pub fn label(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }

    /// Numeric value of swept parameter `key`, if any.
    pub fn value(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).and_then(|(_, v)| v.parse().ok())
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML text of this config.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        hex::encode(&digest[..8])
    }

    /// The model the estimators assume.
    pub fn assumed_model(&self) -> InterferometerConfig {
        InterferometerConfig {
            contrast: self.interferometer.contrast * (1.0 + self.assumed.contrast_error),
            offset: self.interferometer.offset + self.assumed.offset_error,
            detection_noise: 0.0,
            ..self.interferometer
        }
    }

    pub fn algorithm(&self, a: Algorithm) -> &AlgorithmConfig {
        match a {
            Algorithm::Algo1 => &self.algo_one,
            Algorithm::Algo2 => &self.algo_two,
        }
    }

    pub fn scenario(&self, seed: u64) -> Scenario {
        Scenario { interferometer: self.interferometer, truth: self.truth.clone(), source: self.source, seed }
    }

    /// Check the fields that do not depend on the sweep, then every sweep point.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for axis in &self.sweep {
            if axis.values.is_empty() {
                return Err(ConfigError::invalid(format!("sweep.{}", axis.key), "needs at least one value"));
            }
        }
        for p in self.expand()? {
            p.config.validate_point()?;
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return Err(ConfigError::invalid("name", "must not be empty"));
        }
        if self.cycles < 64 {
            return Err(ConfigError::invalid("cycles", "need at least 64 cycles"));
        }
        if self.seeds.list().is_empty() {
            return Err(ConfigError::invalid("seeds", "must not be empty"));
        }
        if self.algorithms.is_empty() && !self.references {
            return Err(ConfigError::invalid("algorithms", "nothing to run"));
        }
        if !(0.0..0.9).contains(&self.discard_fraction) {
            return Err(ConfigError::invalid("discard_fraction", "must lie in [0, 0.9)"));
        }
        if !(self.fit_start > 0.0 && self.fit_start.is_finite()) {
            return Err(ConfigError::invalid("fit_start", "must be > 0"));
        }
        self.interferometer.validate().map_err(|e| ConfigError::core("interferometer", e))?;
        self.truth.validate().map_err(|e| ConfigError::core("truth", e))?;
        self.assumed_model().validate().map_err(|e| ConfigError::core("assumed", e))?;
        for &a in &self.algorithms {
            let section = match a {
                Algorithm::Algo1 => "algo_one",
                Algorithm::Algo2 => "algo_two",
            };
            self.algorithm(a)
                .settings(a, self.assumed_model())
                .validate()
                .map_err(|e| ConfigError::core(section, e))?;
        }
        CycleGenerator::new(self.scenario(0)).map_err(|e| ConfigError::core("source", e))?;
        Ok(())
    }

    /// Cartesian product of the sweep axes, first axis slowest.
    pub fn expand(&self) -> Result<Vec<SweepPoint>, ConfigError> {
        let mut base = self.clone();
        base.sweep.clear();
        let mut points = vec![SweepPoint { index: 0, params: Vec::new(), config: base }];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * axis.values.len());
            for p in &points {
                for v in &axis.values {
                    let config = with_value(&p.config, &axis.key, v)?;
                    let mut params = p.params.clone();
                    params.push((axis.key.clone(), display_value(v)));
                    next.push(SweepPoint { index: 0, params, config });
                }
            }
            points = next;
        }
        for (i, p) in points.iter_mut().enumerate() {
            p.index = i;
        }
        Ok(points)
    }
}

fn display_value(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(x) if *x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) => format!("{x:e}"),
        toml::Value::Float(x) => format!("{x}"),
        other => other.to_string(),
    }
}

/// Parse `key=v1,v2,...` from the command line.
pub fn parse_sweep_arg(arg: &str) -> Result<SweepAxis, ConfigError> {
    let (key, values) =
        arg.split_once('=').ok_or_else(|| ConfigError::invalid("--sweep", "expected key=v1,v2,..."))?;
    let values = values
        .split(',')
        .map(|s| {
            let s = s.trim();
            toml::from_str::<toml::Table>(&format!("v = {s}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(s.to_owned()))
        })
        .collect();
    Ok(SweepAxis { key: key.trim().to_owned(), values })
}

/// Set the dotted `key` in a copy of `cfg`. The parent table must exist; an
/// unknown leaf is caught when the result is deserialized.
fn with_value(cfg: &ScenarioConfig, key: &str, value: &toml::Value) -> Result<ScenarioConfig, ConfigError> {
    let field = format!("sweep.{key}");
    let mut root = toml::Value::try_from(cfg).expect("config serializes");
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| ConfigError::invalid(&field, "empty key"))?;
    if parts.is_empty() && leaf == "sweep" {
        return Err(ConfigError::invalid(&field, "cannot sweep the sweep"));
    }
    let mut table = root.as_table_mut().expect("config is a table");
    for p in parts {
        table = table
            .get_mut(p)
            .and_then(toml::Value::as_table_mut)
            .ok_or_else(|| ConfigError::invalid(&field, format!("no section `{p}`")))?;
    }
    let value = match (table.get(leaf), value) {
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(*i as f64),
        _ => value.clone(),
    };
    table.insert(leaf.to_owned(), value);
    let out: ScenarioConfig = root.try_into().map_err(|e: toml::de::Error| ConfigError::invalid(&field, e.message()))?;
    Ok(out)
}
