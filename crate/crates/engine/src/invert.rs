//! Maps an estimated rate to the quantity the caller asked for.
//!
//! In deterministic mode the rate already is `inf_Ω D(Q, P)`. In normalized
//! mode with a power generator and `Σq = A` on Ω, the rate determines the
//! power divergence, the Hellinger integral, the modified Kullback-Leibler
//! informations, Rényi divergences and, for uniform `P`, entropies.

use serde::{Deserialize, Serialize};

use bsim_core::scaling::{hellinger_from_rate, kl_from_rate, power_divergence_from_rate, rev_kl_from_rate};
use bsim_core::{EntropyFamily, Extremum};

use crate::error::{EngineError, Result};
use crate::estimator::{BsSetup, Estimate, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    /// `-(1/n) log Π` itself.
    #[default]
    Rate,
    Divergence,
    Hellinger,
    ModifiedKl,
    ModifiedRevKl,
    /// `log H_γ / (γ(γ-1))`.
    Renyi,
    /// An entropy of `Q`; requires uniform `P`.
    Entropy { family: EntropyFamily },
}

impl Target {
    pub fn name(&self) -> &'static str {
        match self {
            Target::Rate => "rate",
            Target::Divergence => "divergence",
            Target::Hellinger => "hellinger",
            Target::ModifiedKl => "modified_kl",
            Target::ModifiedRevKl => "modified_rev_kl",
            Target::Renyi => "renyi",
            Target::Entropy { .. } => "entropy",
        }
    }

    /// Whether the target is attained at a minimum or a maximum over Ω.
    pub fn extremum(&self, setup: &BsSetup) -> Result<Extremum> {
        match self {
            Target::Entropy { family } => Ok(family.extremum()?),
            Target::Hellinger | Target::Renyi => {
                let (g, _) = power(setup)?;
                // H = 1 + γ(A-1) + γ(γ-1) D/c̃ decreases in D for γ ∈ ]0,1[
                Ok(if g > 0.0 && g < 1.0 { Extremum::Max } else { Extremum::Min })
            }
            _ => Ok(Extremum::Min),
        }
    }
}

fn power(setup: &BsSetup) -> Result<(f64, f64)> {
    setup
        .generator()
        .power_params()
        .ok_or_else(|| EngineError::Inversion(format!("{} is not a power generator", setup.generator().name())))
}

fn uniform_k(setup: &BsSetup) -> Result<f64> {
    let k = setup.k() as f64;
    if setup.p().iter().any(|p| (p - 1.0 / k).abs() > 1e-12) {
        return Err(EngineError::Inversion("entropy targets need a uniform P".into()));
    }
    Ok(k)
}

/// The target value belonging to `rate`.
pub fn invert(setup: &BsSetup, target: &Target, rate: f64) -> Result<f64> {
    if *target == Target::Rate {
        return Ok(rate);
    }
    if setup.mode() == Mode::Deterministic {
        return match target {
            Target::Divergence => Ok(rate),
            _ => Err(EngineError::Inversion(format!(
                "target {} needs normalized mode; deterministic mode estimates the divergence only",
                target.name()
            ))),
        };
    }
    let a = setup.omega().scale();
    let wrap = |e: bsim_core::Error| EngineError::Inversion(e.to_string());
    match target {
        Target::Rate => Ok(rate),
        Target::Divergence => {
            let (g, c) = power(setup)?;
            power_divergence_from_rate(g, c, a, rate).map_err(wrap)
        }
        Target::Hellinger | Target::Renyi => {
            let (g, c) = power(setup)?;
            if g == 0.0 || g == 1.0 {
                return Err(EngineError::Inversion("Hellinger and Rényi targets need gamma not in {0,1}".into()));
            }
            let h = hellinger_from_rate(g, c, a, rate).map_err(wrap)?;
            Ok(if *target == Target::Hellinger { h } else { h.ln() / (g * (g - 1.0)) })
        }
        Target::ModifiedKl => {
            let (g, c) = power(setup)?;
            if g != 1.0 {
                return Err(EngineError::Inversion("modified KL needs gamma = 1".into()));
            }
            kl_from_rate(c, a, rate).map_err(wrap)
        }
        Target::ModifiedRevKl => {
            let (g, c) = power(setup)?;
            if g != 0.0 {
                return Err(EngineError::Inversion("modified reverse KL needs gamma = 0".into()));
            }
            rev_kl_from_rate(c, a, rate).map_err(wrap)
        }
        Target::Entropy { family } => {
            let (g, c) = power(setup)?;
            let fg = family.generator_gamma()?;
            if fg != g {
                return Err(EngineError::Inversion(format!(
                    "entropy family needs gamma = {fg}, the generator has {g}"
                )));
            }
            let k = uniform_k(setup)?;
            if g == 1.0 {
                // I(Q, U) = Σ q log q + A log K
                let i = kl_from_rate(c, a, rate).map_err(wrap)?;
                Ok(family.from_xlogx(i - a * k.ln())?)
            } else {
                // H = Σ q^γ K^{γ-1}
                let h = hellinger_from_rate(g, c, a, rate).map_err(wrap)?;
                Ok(family.from_power_sum(h * k.powf(1.0 - g))?)
            }
        }
    }
}

/// Replaces the rate in `est` by the target value, with a delta-method
/// standard error from a central difference.
pub fn apply_target(setup: &BsSetup, target: &Target, est: &mut Estimate) -> Result<()> {
    est.target = target.name().into();
    if !est.rate.is_finite() {
        est.value = if *target == Target::Rate || *target == Target::Divergence { est.rate } else { f64::NAN };
        est.value_stderr = f64::NAN;
        return Ok(());
    }
    let r = est.rate;
    est.value = invert(setup, target, r)?;
    let h = (1e-6 * r.abs()).max(1e-9);
    let lo = invert(setup, target, r - h).ok();
    let hi = invert(setup, target, r + h).ok();
    let slope = match (lo, hi) {
        (Some(l), Some(u)) => (u - l) / (2.0 * h),
        (None, Some(u)) => (u - est.value) / h,
        (Some(l), None) => (est.value - l) / h,
        (None, None) => f64::NAN,
    };
    est.value_stderr = slope.abs() * est.rate_stderr;
    Ok(())
}
