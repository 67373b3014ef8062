//! Two-sided bounds on `inf_Ω D(Q, P)` for generators without a closed-form
//! inversion.
//!
//! The normalized estimator gives `D̂ ≈ inf_Ω inf_m D(mQ, P)`, a lower bound
//! (take `m = 1`). Any member `Q̂` gives the upper bound `D(Q̂, P)`; a descent
//! from the dominating point pushes it down until it is within `η` of `D̂`.

use serde::{Deserialize, Serialize};

use bsim_core::divergence;

use crate::error::{EngineError, Result};
use crate::estimator::{ext_f64, BsSetup, Estimate, Mode};
use crate::invert::{apply_target, Target};
use crate::pipeline::BsConfig;
use crate::proxy::{descend, dominating_point, ProxyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(with = "ext_f64")]
    pub lower: f64,
    #[serde(with = "ext_f64")]
    pub lower_stderr: f64,
    #[serde(with = "ext_f64")]
    pub upper: f64,
    /// The member attaining the upper bound.
    pub q_hat: Vec<f64>,
    /// Whether `upper - lower <= η` was reached.
    pub converged: bool,
    #[serde(with = "ext_f64")]
    pub eta: f64,
    pub estimate: Estimate,
    pub warnings: Vec<String>,
}

/// Lower and upper bounds on `inf_Ω D(Q, P)` in normalized mode. `eta`
/// defaults to `1e-3 · D̂`.
pub fn bounds_general(setup: &BsSetup, cfg: &BsConfig, eta: Option<f64>) -> Result<Bounds> {
    if setup.mode() != Mode::Normalized {
        return Err(EngineError::Config("bounds need normalized mode".into()));
    }
    let pc = cfg
        .proxy
        .clone()
        .ok_or_else(|| EngineError::Config("bounds need a proxy configuration".into()))?;
    let start = dominating_point(setup, &pc, cfg.sim.seed, cfg.sim.threads)?;
    let (taus, m) = setup.tilts(&start.q)?;
    let mut est = crate::estimator::simulate(setup, &taus, &cfg.sim)?;
    est.dominating_point = Some(start.q.clone());
    est.scaling = m;
    let target = if setup.generator().power_params().is_some() { Target::Divergence } else { Target::Rate };
    apply_target(setup, &target, &mut est)?;
    let lower = est.value;
    let mut warnings = est.warnings.clone();
    if !lower.is_finite() {
        return Err(EngineError::Budget("the lower-bound estimate is not finite; increase replications".into()));
    }
    let eta = eta.unwrap_or(1e-3 * lower.abs().max(1e-12));
    let d = |q: &[f64]| divergence(setup.generator(), q, setup.p()).unwrap_or(f64::INFINITY);
    let budget = refine_budget(&pc);
    let desc = descend(setup, &start.q, d, budget, cfg.sim.seed.wrapping_add(1), lower + eta)?;
    let converged = desc.objective - lower <= eta;
    if !converged {
        warnings.push(format!(
            "descent stopped {:.3e} above the lower bound (eta = {eta:.3e}); returning the best member found",
            desc.objective - lower
        ));
    }
    Ok(Bounds {
        lower,
        lower_stderr: est.value_stderr,
        upper: desc.objective,
        q_hat: desc.q,
        converged,
        eta,
        estimate: est,
        warnings,
    })
}

fn refine_budget(pc: &ProxyConfig) -> usize {
    pc.refine_budget.max(4000)
}
