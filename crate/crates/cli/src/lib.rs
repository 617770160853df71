//! Experiment runner behind the `ris-swipt` binary: reads an experiment
//! spec, sweeps one scenario field, and writes CSV tables with a JSON
//! sidecar holding the resolved configuration.

pub mod output;
pub mod presets;
pub mod runner;
pub mod spec;

use thiserror::Error;

pub use runner::{run, RunOutcome};
pub use spec::{ExperimentSpec, Mode, ScenarioRef, Sweep};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(ris_swipt::Error),
}

impl From<ris_swipt::Error> for CliError {
    fn from(e: ris_swipt::Error) -> Self {
        match e {
            ris_swipt::Error::Config(m) => CliError::Config(m),
            other => CliError::Model(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    /// 3 for bad configuration, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            _ => 1,
        }
    }
}

/// Command-line overrides applied on top of a spec.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
    }
}
