//! Result documents and per-batch CSV traces.
//!
//! A result depends only on the config and the seed: no timestamps, no
//! thread counts, no host data. Non-finite numbers are written as the
//! strings `"inf"`, `"-inf"` and `"nan"`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use bsim_core::numeric::log_sum_exp;
use bsim_core::Extremum;
use bsim_engine::estimator::{ext_f64, BatchSummary, Estimate};

use crate::error::{CliError, Result};

mod opt_ext_f64 {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => bsim_engine::estimator::ext_f64::serialize(v, s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDoc {
    pub command: String,
    pub seed: u64,
    /// The estimated optimum; the lower bound for `bounds`.
    #[serde(with = "ext_f64")]
    pub value: f64,
    #[serde(with = "ext_f64")]
    pub stderr: f64,
    #[serde(with = "ext_f64")]
    pub log_pi_hat: f64,
    pub hits: u64,
    pub replications: u64,
    pub n: usize,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremum: Option<Extremum>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_ext_f64::serialize")]
    pub upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    pub warnings: Vec<String>,
    /// The full engine output.
    pub details: serde_json::Value,
}

impl ResultDoc {
    pub fn from_estimate(command: &str, seed: u64, est: &Estimate, details: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            seed,
            value: est.value,
            stderr: est.value_stderr,
            log_pi_hat: est.log_pi,
            hits: est.hits,
            replications: est.replications,
            n: est.n,
            target: est.target.clone(),
            extremum: None,
            upper: None,
            converged: None,
            warnings: est.warnings.clone(),
            details,
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    serde_json::to_string_pretty(doc)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Config(format!("cannot serialize the result: {e}")))
}

/// Writes `text` to `path`, or to standard output.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

/// One CSV row per batch with the cumulative estimate after that batch.
/// `value` maps a rate to the reported quantity.
pub fn write_trace<F: Fn(f64) -> f64>(path: &Path, est: &Estimate, value: F) -> Result<()> {
    let io = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["batch", "replications", "hits", "cumulative_replications", "cumulative_hits", "log_pi_hat", "rate", "value"])
        .map_err(io)?;
    for (i, row) in trace_rows(&est.batches, est.n).into_iter().enumerate() {
        let b = &est.batches[i];
        w.write_record([
            i.to_string(),
            b.replications.to_string(),
            b.hits.to_string(),
            row.replications.to_string(),
            row.hits.to_string(),
            row.log_pi.to_string(),
            row.rate.to_string(),
            value(row.rate).to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub struct TraceRow {
    pub replications: u64,
    pub hits: u64,
    pub log_pi: f64,
    pub rate: f64,
}

/// Cumulative `log Π̂` and rate after each batch.
pub fn trace_rows(batches: &[BatchSummary], n: usize) -> Vec<TraceRow> {
    let mut reps = 0u64;
    let mut hits = 0u64;
    let mut log_sum = f64::NEG_INFINITY;
    batches
        .iter()
        .map(|b| {
            reps += b.replications;
            hits += b.hits;
            log_sum = log_sum_exp(&[log_sum, b.log_weight_sum]);
            let log_pi = log_sum - (reps as f64).ln();
            TraceRow { replications: reps, hits, log_pi, rate: -log_pi / n as f64 }
        })
        .collect()
}

