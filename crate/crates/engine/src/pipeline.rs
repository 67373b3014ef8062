//! The full estimator: dominating point, tilted simulation, inversion.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimator::{naive_estimate, simulate, BsSetup, Estimate, SimConfig};
use crate::invert::{apply_target, Target};
use crate::proxy::{dominating_point, ProxyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsConfig {
    pub sim: SimConfig,
    /// `None` runs the naive estimator.
    #[serde(default)]
    pub proxy: Option<ProxyConfig>,
}

/// Estimates `target` over Ω: importance sampling toward a refined proxy of
/// the dominating point, or crude Monte Carlo without a proxy.
pub fn run(setup: &BsSetup, cfg: &BsConfig, target: &Target) -> Result<Estimate> {
    let mut est = match &cfg.proxy {
        None => naive_estimate(setup, &cfg.sim)?,
        Some(pc) => {
            let q = dominating_point(setup, pc, cfg.sim.seed, cfg.sim.threads)?;
            let (taus, m) = setup.tilts(&q.q)?;
            let mut e = simulate(setup, &taus, &cfg.sim)?;
            e.dominating_point = Some(q.q);
            e.scaling = m;
            e
        }
    };
    apply_target(setup, target, &mut est)?;
    Ok(est)
}
