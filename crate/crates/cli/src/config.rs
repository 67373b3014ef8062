//! Config documents. Every section rejects unknown fields; see
//! `schema/config.schema.json` for the full format.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use bsim_core::GeneratorConfig;
use bsim_engine::{BsConfig, ConstraintSpec, Mode, ProblemInstance, ProxyConfig, SimConfig, Target};

use crate::error::{CliError, Result};

fn default_batches() -> usize {
    32
}

fn default_band() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    /// Sample size; taken from the data file in statistical mode.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub replications: u64,
    pub seed: u64,
    /// Omitted: crude Monte Carlo for `estimate` and `bounds`, an automatic
    /// proxy for the problem commands.
    #[serde(default)]
    pub proxy: Option<ProxyConfig>,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Result JSON; standard output when absent.
    #[serde(default)]
    pub result: Option<PathBuf>,
    /// Per-batch CSV trace.
    #[serde(default)]
    pub trace: Option<PathBuf>,
}

/// Config of `estimate` and `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub reference_vector: Option<Vec<f64>>,
    /// One category label per line; selects statistical mode.
    #[serde(default)]
    pub data_file: Option<PathBuf>,
    /// Category order for the data file; sorted distinct labels by default.
    #[serde(default)]
    pub categories: Option<Vec<String>>,
    /// Defaults to deterministic, or normalized with a data file.
    #[serde(default)]
    pub mode: Option<Mode>,
    pub constraint: ConstraintSpec,
    /// Total mass `A` of Ω in normalized mode.
    #[serde(default)]
    pub total: Option<f64>,
    #[serde(default)]
    pub objective: Target,
    pub estimator: EstimatorSection,
    /// Bounds only: stopping gap of the upper-bound descent.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Config of the problem commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub instance: ProblemInstance,
    pub estimator: EstimatorSection,
    #[serde(default = "default_band")]
    pub equality_band: f64,
    #[serde(default)]
    pub output: OutputSection,
}

/// Command-line values that replace config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub n: Option<usize>,
    pub replications: Option<u64>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, est: &mut EstimatorSection, out: &mut OutputSection) {
        if let Some(s) = self.seed {
            est.seed = s;
        }
        if let Some(t) = self.threads {
            est.threads = Some(t);
        }
        if let Some(n) = self.n {
            est.n = Some(n);
        }
        if let Some(l) = self.replications {
            est.replications = l;
        }
        if let Some(o) = &self.out {
            out.result = Some(o.clone());
        }
        if let Some(t) = &self.trace {
            out.trace = Some(t.clone());
        }
    }
}

impl EstimatorSection {
    pub fn to_bs(&self, n: usize) -> Result<BsConfig> {
        let sim = SimConfig {
            n,
            replications: self.replications,
            seed: self.seed,
            batches: self.batches,
            threads: self.threads,
        };
        sim.validate()?;
        Ok(BsConfig { sim, proxy: self.proxy.clone() })
    }

    pub fn require_n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n > 0 => Ok(n),
            Some(_) => Err(CliError::Config("estimator.n must be >= 1".into())),
            None => Err(CliError::Config("estimator.n is required".into())),
        }
    }
}

/// Parses JSON text, reporting schema violations with the path of the
/// offending field.
pub fn parse<T: DeserializeOwned>(text: &str, file: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Schema { file: file.to_path_buf(), path, message: e.into_inner().to_string() }
    })
}

pub fn load<T: DeserializeOwned>(file: &Path) -> Result<T> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
    parse(&text, file)
}

/// Resolves `p` against the directory of the config file.
pub fn relative_to(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().map(|d| d.join(p)).unwrap_or_else(|| p.to_path_buf())
    }
}
