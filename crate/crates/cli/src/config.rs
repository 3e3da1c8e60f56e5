//! Run configuration: a flat JSON document with the model and its
//! parameters at the top level and everything else in optional blocks.
//!
//! ```json
//! {"model": "ohmic", "omega_c": 1.0, "s": 3.0,
//!  "sweep": {"start": 2.1, "end": 5.0, "points": 32},
//!  "analysis": {"blp": true}}
//! ```

use std::fmt;
use std::path::PathBuf;

use qdyn_core::{ModelSpec, PairSearch, ParamRange, PureStateAngles};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted key path of the offending entry, empty for the whole document.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config key '{}': {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        Self { theta: std::f64::consts::FRAC_PI_2, phi: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeWindow {
    pub t0: f64,
    /// Defaults to ten model time units.
    pub t1: Option<f64>,
    pub points: usize,
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self { t0: 0.0, t1: None, points: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Defaults to the model's driving parameter.
    #[serde(default)]
    pub parameter: Option<String>,
    pub start: f64,
    pub end: f64,
    #[serde(default = "default_sweep_points")]
    pub points: usize,
    /// Leave out `start` itself, for ranges like `ω ∈ (0, 1]`.
    #[serde(default)]
    pub open_start: bool,
}

fn default_sweep_points() -> usize {
    64
}

impl Sweep {
    pub fn range(&self) -> ParamRange {
        ParamRange { start: self.start, end: self.end, n_points: self.points, open_start: self.open_start }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis {
    pub speed: bool,
    pub blp: bool,
    pub divisibility: bool,
    /// Compare the exact trajectory with the integrated master equation.
    pub oracle: bool,
}

impl Analysis {
    pub fn any(&self) -> bool {
        self.speed || self.blp || self.divisibility || self.oracle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Finite-difference step.
    pub h: f64,
    pub ode_tol: f64,
    /// Slack on `|n| ≤ 1` in the sampled ball check.
    pub ball: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { h: 1e-4, ode_tol: 1e-9, ball: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Diagnostics {
    /// BLP and divisibility horizon; ten model time units by default.
    pub horizon: Option<f64>,
    pub pair_search: PairSearch,
    /// Intervals per side of the `(s, t)` grid of the Choi scan.
    pub st_points: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self { horizon: None, pair_search: PairSearch::default(), st_points: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub model: ModelSpec,
    pub initial_state: InitialState,
    pub time: TimeWindow,
    pub sweep: Option<Sweep>,
    pub analysis: Analysis,
    /// Extra state pairs `[θ1, φ1, θ2, φ2]` whose trace distance is tracked.
    pub pairs: Vec<[f64; 4]>,
    pub output_dir: PathBuf,
    pub tolerances: Tolerances,
    pub diagnostics: Diagnostics,
    /// Seed of the sampled ball check.
    pub seed: u64,
    pub ball_samples: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Rest {
    #[serde(default)]
    initial_state: InitialState,
    #[serde(default)]
    time: TimeWindow,
    #[serde(default)]
    sweep: Option<Sweep>,
    #[serde(default)]
    analysis: Analysis,
    #[serde(default)]
    pairs: Vec<[f64; 4]>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    diagnostics: Diagnostics,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_ball_samples")]
    ball_samples: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_ball_samples() -> usize {
    256
}

/// Model names accepted in the `model` key.
pub const MODEL_NAMES: [&str; 5] = ["ohmic", "polarization", "jaynes_cummings", "pauli_tanh", "pauli_tan"];

/// Parameter keys of the model called `name`.
pub fn model_parameters(name: &str) -> Option<&'static [&'static str]> {
    let probe = match name {
        "ohmic" => ModelSpec::OhmicDephasing { omega_c: 1.0, s: 1.0 },
        "polarization" => ModelSpec::PolarizationDephasing { delta_n: 1.0, sigma: 1.0, omega1: 1.0, omega2: 1.0, xi: 0.0 },
        "jaynes_cummings" => ModelSpec::JaynesCummings { lambda: 1.0, gamma_m: 1.0, delta: 0.0 },
        "pauli_tanh" => ModelSpec::PauliTanh { lambda: 1.0, omega: 0.0 },
        "pauli_tan" => ModelSpec::PauliTan { lambda: 1.0, omega: 0.0 },
        _ => return None,
    };
    Some(probe.parameter_names())
}

pub fn parse_config(document: &str) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(document).map_err(|e| ConfigError::at("", format!("malformed JSON: {e}")))?;
    parse_config_value(value)
}

pub fn parse_config_value(value: Value) -> Result<RunConfig, ConfigError> {
    let Value::Object(mut obj) = value else {
        return Err(ConfigError::at("", "the document must be a JSON object"));
    };
    let name = match obj.remove("model") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(ConfigError::at("model", "expected a model name string")),
        None => return Err(ConfigError::at("model", "missing; one of ".to_string() + &MODEL_NAMES.join(", "))),
    };
    let params = model_parameters(&name)
        .ok_or_else(|| ConfigError::at("model", format!("unknown model '{name}'; one of {}", MODEL_NAMES.join(", "))))?;
    let mut model_obj = Map::new();
    model_obj.insert("model".into(), Value::String(name.clone()));
    for p in params {
        match obj.remove(*p) {
            Some(v @ Value::Number(_)) => model_obj.insert((*p).to_string(), v),
            Some(_) => return Err(ConfigError::at(*p, "expected a number")),
            None => return Err(ConfigError::at(*p, format!("missing parameter of the {name} model"))),
        };
    }
    let model: ModelSpec = serde_path_to_error::deserialize(Value::Object(model_obj))
        .map_err(|e| ConfigError::at(e.path().to_string().trim_start_matches('.'), e.inner().to_string()))?;
    let rest: Rest = serde_path_to_error::deserialize(Value::Object(obj)).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::at(if path == "." { String::new() } else { path }, e.inner().to_string())
    })?;
    let config = RunConfig {
        model,
        initial_state: rest.initial_state,
        time: rest.time,
        sweep: rest.sweep,
        analysis: rest.analysis,
        pairs: rest.pairs,
        output_dir: rest.output_dir,
        tolerances: rest.tolerances,
        diagnostics: rest.diagnostics,
        seed: rest.seed,
        ball_samples: rest.ball_samples,
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate().map_err(|e| ConfigError::at("model", e.to_string()))?;
        PureStateAngles::new(self.initial_state.theta, self.initial_state.phi)
            .map_err(|e| ConfigError::at("initial_state", e.to_string()))?;
        let t = &self.time;
        if !t.t0.is_finite() || t.t0 < 0.0 {
            return Err(ConfigError::at("time.t0", "must be finite and >= 0"));
        }
        if !(self.t1() > t.t0 && self.t1().is_finite()) {
            return Err(ConfigError::at("time.t1", "must be finite and exceed t0"));
        }
        if t.points < 2 {
            return Err(ConfigError::at("time.points", "need at least 2 points"));
        }
        if let Some(sweep) = &self.sweep {
            let p = self.sweep_parameter().unwrap_or_default();
            if self.model.parameter(&p).is_none() {
                return Err(ConfigError::at(
                    "sweep.parameter",
                    format!("'{p}' is not a parameter of the {} model", self.model.name()),
                ));
            }
            sweep.range().validate().map_err(|e| ConfigError::at("sweep", e.to_string()))?;
            for v in sweep.range().values() {
                self.model
                    .with_parameter(&p, v)
                    .map_err(|e| ConfigError::at("sweep", format!("{p} = {v}: {e}")))?;
            }
        }
        for (i, q) in self.pairs.iter().enumerate() {
            for (a, b) in [(q[0], q[1]), (q[2], q[3])] {
                PureStateAngles::new(a, b).map_err(|e| ConfigError::at(format!("pairs[{i}]"), e.to_string()))?;
            }
        }
        let tol = &self.tolerances;
        for (key, v) in [("h", tol.h), ("ode_tol", tol.ode_tol), ("ball", tol.ball)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::at(format!("tolerances.{key}"), format!("must be finite and > 0, got {v}")));
            }
        }
        let d = &self.diagnostics;
        if let Some(h) = d.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigError::at("diagnostics.horizon", "must be finite and > 0"));
            }
        }
        let ps = &d.pair_search;
        if ps.theta_points < 2 || ps.phi_points < 1 || ps.time_points < 2 {
            return Err(ConfigError::at(
                "diagnostics.pair_search",
                "need theta_points >= 2, phi_points >= 1 and time_points >= 2",
            ));
        }
        if d.st_points < 1 {
            return Err(ConfigError::at("diagnostics.st_points", "must be >= 1"));
        }
        Ok(())
    }

    pub fn t1(&self) -> f64 {
        self.time.t1.unwrap_or(10.0 * self.model.time_scale())
    }

    pub fn horizon(&self) -> f64 {
        self.diagnostics.horizon.unwrap_or(10.0 * self.model.time_scale())
    }

    pub fn sweep_parameter(&self) -> Option<String> {
        self.sweep
            .as_ref()
            .map(|s| s.parameter.clone().unwrap_or_else(|| self.model.driving_parameter().to_string()))
    }
}

/// Command-line edits applied to the document before it is parsed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<String>,
    pub params: Vec<(String, f64)>,
    /// `(start, end, points)` of the sweep.
    pub range: Option<(f64, f64, usize)>,
    pub theta: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn apply_overrides(doc: &mut Value, o: &Overrides) -> Result<(), ConfigError> {
    let Value::Object(obj) = doc else {
        return Err(ConfigError::at("", "the document must be a JSON object"));
    };
    if let Some(name) = &o.model {
        let new = model_parameters(name)
            .ok_or_else(|| ConfigError::at("model", format!("unknown model '{name}'; one of {}", MODEL_NAMES.join(", "))))?;
        let old = obj.get("model").and_then(Value::as_str).and_then(model_parameters).unwrap_or(&[]);
        for p in old.iter().filter(|p| !new.contains(p)) {
            obj.remove(*p);
        }
        obj.insert("model".into(), Value::String(name.clone()));
    }
    for (k, v) in &o.params {
        obj.insert(k.clone(), num(*v)?);
    }
    if let Some((start, end, points)) = o.range {
        let sweep = obj.entry("sweep").or_insert_with(|| Value::Object(Map::new()));
        let Value::Object(s) = sweep else {
            return Err(ConfigError::at("sweep", "expected an object"));
        };
        s.insert("start".into(), num(start)?);
        s.insert("end".into(), num(end)?);
        s.insert("points".into(), Value::from(points));
    }
    if let Some(theta) = o.theta {
        let st = obj.entry("initial_state").or_insert_with(|| Value::Object(Map::new()));
        let Value::Object(s) = st else {
            return Err(ConfigError::at("initial_state", "expected an object"));
        };
        s.insert("theta".into(), num(theta)?);
    }
    if let Some(out) = &o.out {
        obj.insert("output_dir".into(), Value::String(out.display().to_string()));
    }
    Ok(())
}

fn num(v: f64) -> Result<Value, ConfigError> {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .ok_or_else(|| ConfigError::at("", format!("{v} is not a finite number")))
}

/// Parses `a:b:n`.
pub fn parse_range(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:end:points, got '{text}'"));
    }
    let f = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    let n = parts[2].trim().parse::<usize>().map_err(|e| format!("'{}': {e}", parts[2]))?;
    Ok((f(parts[0])?, f(parts[1])?, n))
}

/// Parses `name=value`.
pub fn parse_param(text: &str) -> Result<(String, f64), String> {
    let (k, v) = text.split_once('=').ok_or_else(|| format!("expected name=value, got '{text}'"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"))?;
    Ok((k.trim().to_string(), v))
}
