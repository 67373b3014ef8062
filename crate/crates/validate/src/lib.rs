//! Acceptance suites for the bare-simulation estimators.
//!
//! Each `criterion_*` function runs one suite and returns a
//! [`CriterionReport`]. All randomness derives from [`SuiteConfig::seed`], so
//! a rerun with the same configuration reproduces every metric bit for bit.

pub mod bounds;
pub mod duality;
pub mod estimators;
pub mod laws;
pub mod reductions;
pub mod report;
pub mod scaling;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use bsim_engine::SimConfig;

pub use report::CriterionReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Worker threads for the estimators; `None` uses the global pool.
    /// Results do not depend on it.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 20_240_601, threads: None }
    }
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, threads: None }
    }

    /// Simulation settings whose seed is offset per call site, so that the
    /// suites draw from disjoint streams.
    pub fn sim(&self, n: usize, replications: u64, offset: u64) -> SimConfig {
        let mut s = SimConfig::new(n, replications, self.seed.wrapping_mul(1_000).wrapping_add(offset));
        s.threads = self.threads;
        s
    }
}

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

fn dispatch(id: u8, cfg: &SuiteConfig) -> CriterionReport {
    match id {
        1 => duality::criterion_1(),
        2 => laws::criterion_2(cfg.seed),
        3 => scaling::criterion_3(cfg.seed),
        4 => estimators::criterion_4(cfg),
        5 => estimators::criterion_5(cfg),
        6 => estimators::criterion_6(cfg),
        7 => scaling::criterion_7(cfg.seed),
        8 => reductions::criterion_8(cfg),
        9 => bounds::criterion_9(cfg),
        10 => criterion_10(cfg),
        _ => {
            let mut r = CriterionReport::new(id, "unknown");
            r.fail_with(format!("no criterion {id}"));
            r
        }
    }
}

/// Runs one criterion and records its wall time.
pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let mut r = dispatch(id, cfg);
    r.seconds = start.elapsed().as_secs_f64();
    r
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|&id| run_criterion(id, cfg)).collect()
}

/// Suites rerun by the determinism check.
const RERUN: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Bitwise comparison of two metric maps; `NaN`s compare by bit pattern.
fn same_metrics(a: &CriterionReport, b: &CriterionReport) -> Option<String> {
    if a.metrics.len() != b.metrics.len() {
        return Some(format!("metric sets differ ({} vs {})", a.metrics.len(), b.metrics.len()));
    }
    for ((ka, va), (kb, vb)) in a.metrics.iter().zip(&b.metrics) {
        if ka != kb || va.to_bits() != vb.to_bits() {
            return Some(format!("{ka} = {va:e} vs {kb} = {vb:e}"));
        }
    }
    None
}

/// Criterion 10: the same seed reproduces every metric bit for bit, also
/// with a single worker thread.
pub fn criterion_10(cfg: &SuiteConfig) -> CriterionReport {
    let mut rep = CriterionReport::new(10, "determinism");
    let single = SuiteConfig { threads: Some(1), ..cfg.clone() };
    for id in RERUN {
        let a = dispatch(id, cfg);
        let b = dispatch(id, cfg);
        if let Some(d) = same_metrics(&a, &b) {
            rep.check(false, format!("criterion {id} rerun: {d}"));
        }
        rep.metric(format!("criterion_{id}.metrics"), a.metrics.len() as f64);
        if matches!(id, 4 | 5 | 6) {
            let c = dispatch(id, &single);
            if let Some(d) = same_metrics(&a, &c) {
                rep.check(false, format!("criterion {id} single thread: {d}"));
            }
        }
    }
    rep
}
