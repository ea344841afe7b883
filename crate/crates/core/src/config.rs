//! Run configuration: one TOML document describing a reproducible
//! exploration run. The resolved configuration is echoed verbatim into the
//! run's output directory.

use crate::network::Budget;
use crate::pes::{Calculator, ExternalCalculator, ExternalError, MorseSurrogate, Surface2D};
use crate::pipeline::CascadeParams;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::Duration;

/// Which energy/gradient provider drives the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CalculatorConfig {
    /// The reactive screened-Morse surrogate (default), with optional
    /// parameter overrides.
    Morse {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<MorseSurrogate>,
    },
    /// Analytic 2-D verification surfaces (single-atom geometries).
    Surface { surface: Surface2D },
    /// External backend processes speaking the line protocol.
    External {
        command: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default = "default_timeout")]
        timeout_seconds: f64,
    },
}

fn default_timeout() -> f64 {
    300.0
}

impl Default for CalculatorConfig {
    fn default() -> Self {
        CalculatorConfig::Morse { params: None }
    }
}

impl CalculatorConfig {
    /// Instantiate the calculator; external backends get one process lane
    /// per worker.
    pub fn build(&self, workers: usize) -> Result<Box<dyn Calculator>, ExternalError> {
        Ok(match self {
            CalculatorConfig::Morse { params } => Box::new(params.clone().unwrap_or_default()),
            CalculatorConfig::Surface { surface } => Box::new(*surface),
            CalculatorConfig::External {
                command,
                args,
                timeout_seconds,
            } => Box::new(ExternalCalculator::spawn(
                command,
                args,
                workers.max(1),
                Duration::from_secs_f64(*timeout_seconds),
            )?),
        })
    }
}

/// One file or several; several inputs combine into one multi-component
/// reactant system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputFiles {
    One(PathBuf),
    Many(Vec<PathBuf>),
}

impl InputFiles {
    pub fn paths(&self) -> Vec<&PathBuf> {
        match self {
            InputFiles::One(p) => vec![p],
            InputFiles::Many(v) => v.iter().collect(),
        }
    }
}

/// A full exploration run: input, seeds, worker count, budgets, calculator
/// selection, and every cascade tunable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Input molecule file(s): molecular-graph text (`.mol`) or XYZ
    /// (`.xyz`, bond perception applied). Multiple files combine into one
    /// multi-component system.
    pub input: InputFiles,
    /// Master seed; everything else derives from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 means all logical cores.
    #[serde(default)]
    pub workers: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub calculator: CalculatorConfig,
    #[serde(default)]
    pub budget: Budget,
    /// Resume from a previously exported network document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume_from: Option<PathBuf>,
    #[serde(flatten)]
    pub cascade: CascadeParams,
}

fn default_seed() -> u64 {
    42
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, toml::de::Error> {
        toml::from_str(text)
    }

    /// Serialize the fully resolved configuration (all defaults filled in).
    pub fn resolved(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
