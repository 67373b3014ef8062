//! The subcommands. Each returns the exit status after writing its output.

use std::collections::BTreeSet;
use std::path::Path;

use bsim_core::DivergenceGenerator;
use bsim_engine::problems::{reduce, solve_reduced, SolveConfig};
use bsim_engine::{bounds_general, ingest_sample, invert, run, BsSetup, ConstraintSet, Estimate, Mode, Target};
use bsim_laws::rng::{purpose, stream};
use bsim_laws::WeightLaw;
use bsim_validate::{run_criterion, SuiteConfig, CRITERIA};

use crate::config::{load, relative_to, EstimateConfig, Overrides, ProblemConfig};
use crate::error::{CliError, Result};
use crate::output::{emit, to_json, write_trace, ResultDoc};

/// Reads one category label per line; blank lines are skipped.
pub fn read_labels(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Builds the setup of an `estimate` or `bounds` config; returns it with the sample size.
pub fn build_setup(cfg: &EstimateConfig, file: &Path) -> Result<(BsSetup, usize)> {
    let gen = DivergenceGenerator::from_config(&cfg.generator).map_err(bsim_engine::EngineError::from)?;
    let mut omega = ConstraintSet::from_spec(cfg.constraint.clone());
    match (&cfg.reference_vector, &cfg.data_file) {
        (Some(_), Some(_)) => Err(CliError::Config("give either reference_vector or data_file, not both".into())),
        (None, None) => Err(CliError::Config("one of reference_vector or data_file is required".into())),
        (None, Some(data)) => {
            if cfg.mode == Some(Mode::Deterministic) {
                return Err(CliError::Config("a data file implies normalized mode".into()));
            }
            if cfg.estimator.n.is_some() {
                return Err(CliError::Config("estimator.n is the size of the data file and must not be set".into()));
            }
            let labels = read_labels(&relative_to(file, data))?;
            let categories = match &cfg.categories {
                Some(c) => c.clone(),
                None => labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
            };
            if let Some(a) = cfg.total {
                omega = omega.with_scale(a);
            }
            let sample = ingest_sample(&labels, &categories)?;
            let n = sample.n();
            Ok((BsSetup::from_sample(gen, sample, omega)?, n))
        }
        (Some(p), None) => {
            let mode = cfg.mode.unwrap_or_default();
            if let Some(a) = cfg.total {
                if mode != Mode::Normalized {
                    return Err(CliError::Config("total applies to normalized mode only".into()));
                }
                omega = omega.with_scale(a);
            }
            let n = cfg.estimator.require_n()?;
            Ok((BsSetup::new(gen, p.clone(), omega, mode)?, n))
        }
    }
}

fn finish(doc: &ResultDoc, est: &Estimate, out: Option<&Path>) -> Result<()> {
    emit(&to_json(doc)?, out)?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    if est.hits == 0 {
        return Err(CliError::ZeroHits(format!("{} replications at n = {}", est.replications, est.n)));
    }
    Ok(())
}

pub fn estimate(file: &Path, ov: &Overrides) -> Result<()> {
    let mut cfg: EstimateConfig = load(file)?;
    ov.apply(&mut cfg.estimator, &mut cfg.output);
    let (setup, n) = build_setup(&cfg, file)?;
    let bs = cfg.estimator.to_bs(n)?;
    let est = run(&setup, &bs, &cfg.objective)?;
    if let Some(t) = &cfg.output.trace {
        write_trace(t, &est, |r| invert(&setup, &cfg.objective, r).unwrap_or(f64::NAN))?;
    }
    let details = serde_json::to_value(&est).map_err(|e| CliError::Config(e.to_string()))?;
    let doc = ResultDoc::from_estimate("estimate", cfg.estimator.seed, &est, details);
    finish(&doc, &est, cfg.output.result.as_deref())
}

pub fn bounds(file: &Path, ov: &Overrides) -> Result<()> {
    let mut cfg: EstimateConfig = load(file)?;
    ov.apply(&mut cfg.estimator, &mut cfg.output);
    let (setup, n) = build_setup(&cfg, file)?;
    let bs = cfg.estimator.to_bs(n)?;
    let b = bounds_general(&setup, &bs, cfg.eta)?;
    if let Some(t) = &cfg.output.trace {
        write_trace(t, &b.estimate, |r| invert(&setup, &Target::Divergence, r).unwrap_or(r))?;
    }
    let details = serde_json::to_value(&b).map_err(|e| CliError::Config(e.to_string()))?;
    let mut doc = ResultDoc::from_estimate("bounds", cfg.estimator.seed, &b.estimate, details);
    doc.value = b.lower;
    doc.stderr = b.lower_stderr;
    doc.upper = Some(b.upper);
    doc.converged = Some(b.converged);
    doc.target = "divergence".into();
    doc.warnings = b.warnings.clone();
    finish(&doc, &b.estimate, cfg.output.result.as_deref())
}

/// Runs a problem config whose instance must be of kind `expected`.
pub fn problem(command: &str, expected: &str, file: &Path, ov: &Overrides) -> Result<()> {
    let mut cfg: ProblemConfig = load(file)?;
    ov.apply(&mut cfg.estimator, &mut cfg.output);
    if cfg.instance.name() != expected {
        return Err(CliError::Config(format!(
            "`{command}` needs an instance with \"problem\": \"{expected}\", found \"{}\"",
            cfg.instance.name()
        )));
    }
    let n = cfg.estimator.require_n()?;
    let red = reduce(&cfg.instance)?;
    let solve_cfg = SolveConfig { estimator: cfg.estimator.to_bs(n)?, equality_band: cfg.equality_band };
    let rep = solve_reduced(cfg.instance.name(), &red, &solve_cfg)?;
    if let Some(t) = &cfg.output.trace {
        let map = |r: f64| invert(&red.setup, &red.target, r).map(|v| red.offset + red.factor * v).unwrap_or(f64::NAN);
        write_trace(t, &rep.estimate, map)?;
    }
    let details = serde_json::to_value(&rep).map_err(|e| CliError::Config(e.to_string()))?;
    let mut doc = ResultDoc::from_estimate(command, cfg.estimator.seed, &rep.estimate, details);
    doc.value = rep.value;
    doc.stderr = rep.value_stderr;
    doc.extremum = Some(rep.extremum);
    finish(&doc, &rep.estimate, cfg.output.result.as_deref())
}

pub fn validate(seed: Option<u64>, threads: Option<usize>, criteria: &[u8], out: Option<&Path>) -> Result<()> {
    let mut cfg = SuiteConfig::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.threads = threads;
    let ids: Vec<u8> = if criteria.is_empty() { CRITERIA.to_vec() } else { criteria.to_vec() };
    let mut reports = Vec::new();
    for id in ids {
        let r = run_criterion(id, &cfg);
        println!("criterion {id}: {}", if r.passed { "PASS" } else { "FAIL" });
        for d in &r.details {
            println!("    {d}");
        }
        reports.push(r);
    }
    if let Some(p) = out {
        emit(&to_json(&reports)?, Some(p))?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Validation(failed));
    }
    Ok(())
}

/// Diagnostic draws of a block sum: `count` lines, one draw each.
pub fn sample_law(law_json: &str, nu: f64, tau: f64, count: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let law: WeightLaw = crate::config::parse(law_json, Path::new("--law"))?;
    let block = law.block(nu, tau).map_err(bsim_engine::EngineError::from)?;
    let mut rng = stream(seed, purpose::DIAGNOSTIC, 0);
    let mut text = String::with_capacity(count * 20);
    for _ in 0..count {
        text.push_str(&block.sample(&mut rng).to_string());
        text.push('\n');
    }
    emit(&text, out)
}
