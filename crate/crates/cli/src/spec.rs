//! Experiment description read from JSON.

use std::fs;
use std::path::{Path, PathBuf};

use ris_swipt::montecarlo::CascadeModel;
use ris_swipt::optimizer::OptConfig;
use ris_swipt::precoding::Scheme;
use ris_swipt::scenario::Scenario;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ClosedForm,
    MonteCarlo,
    Verify,
    Optimize,
    Baseline,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ClosedForm => "closed_form",
            Mode::MonteCarlo => "monte_carlo",
            Mode::Verify => "verify",
            Mode::Optimize => "optimize",
            Mode::Baseline => "baseline",
        }
    }
}

/// Scenario given inline or as a path to a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Inline(Box<Scenario>),
    Path(PathBuf),
}

impl Default for ScenarioRef {
    fn default() -> Self {
        ScenarioRef::Inline(Box::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    /// A Scenario field, by its JSON name (e.g. "M", "N", "K_E", "prf_E", "qos").
    pub variable: String,
    pub values: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioRef,
    pub sweep: Option<Sweep>,
    pub drops: usize,
    pub trials: usize,
    pub mode: Mode,
    pub output: PathBuf,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub rel_tol: f64,
    pub model: CascadeModel,
    pub optimizer: OptConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: ScenarioRef::default(),
            sweep: None,
            drops: 1,
            trials: 10_000,
            mode: Mode::ClosedForm,
            output: PathBuf::from("out.csv"),
            schemes: vec![Scheme::Pzf, Scheme::Ppzf],
            seed: 0,
            rel_tol: 0.02,
            model: CascadeModel::Shared,
            optimizer: OptConfig::default(),
        }
    }
}

/// One sweep point: the printed value of the variable and its scenario.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub label: String,
    pub scenario: Scenario,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut spec: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // relative paths are resolved next to the spec file
        let dir = path.parent().unwrap_or(Path::new("."));
        if let ScenarioRef::Path(p) = &spec.scenario {
            if p.is_relative() {
                spec.scenario = ScenarioRef::Path(dir.join(p));
            }
        }
        if spec.output.is_relative() {
            spec.output = dir.join(&spec.output);
        }
        Ok(spec)
    }

    pub fn base_scenario(&self) -> Result<Scenario, CliError> {
        match &self.scenario {
            ScenarioRef::Inline(s) => Ok((**s).clone()),
            ScenarioRef::Path(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.drops < 1 {
            return Err(CliError::Config("drops must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(CliError::Config("at least one scheme is required".into()));
        }
        if matches!(self.mode, Mode::MonteCarlo | Mode::Verify) && self.trials < 1000 {
            return Err(CliError::Config(format!("at least 1000 trials required, got {}", self.trials)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 0.1) {
            return Err(CliError::Config(format!("rel_tol {} outside (0, 0.1]", self.rel_tol)));
        }
        Ok(())
    }

    /// Name of the first CSV column.
    pub fn variable(&self) -> &str {
        self.sweep.as_ref().map_or("point", |s| s.variable.as_str())
    }

    /// Expands the sweep into concrete scenarios, each validated.
    pub fn points(&self) -> Result<Vec<SweepPoint>, CliError> {
        let base = self.base_scenario()?;
        let Some(sweep) = &self.sweep else {
            base.validate()?;
            return Ok(vec![SweepPoint { label: "base".into(), scenario: base }]);
        };
        let base_json = serde_json::to_value(&base).map_err(|e| CliError::Config(e.to_string()))?;
        let Value::Object(fields) = &base_json else {
            return Err(CliError::Config("scenario does not serialize to an object".into()));
        };
        if !fields.contains_key(&sweep.variable) {
            let known: Vec<_> = fields.keys().cloned().collect();
            return Err(CliError::Config(format!(
                "sweep variable {:?} is not a scenario field (known: {})",
                sweep.variable,
                known.join(", ")
            )));
        }
        sweep
            .values
            .iter()
            .map(|v| {
                let mut obj = fields.clone();
                let value = match (sweep.variable.as_str(), v) {
                    // one target for every IU
                    ("qos", Value::Number(_)) => Value::Array(vec![v.clone(); base.k_i]),
                    _ => v.clone(),
                };
                obj.insert(sweep.variable.clone(), value);
                let s: Scenario = serde_json::from_value(Value::Object(obj))
                    .map_err(|e| CliError::Config(format!("{} = {v}: {e}", sweep.variable)))?;
                s.validate()?;
                Ok(SweepPoint { label: label(v), scenario: s })
            })
            .collect()
    }
}

fn label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(label).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}
