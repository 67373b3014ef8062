//! The simulation interface the estimators draw from.
//!
//! Closed-form weight laws implement it through their exact tilted block
//! samplers. A generator without a closed-form law can still be used by
//! supplying a sampler of the tilted unit law; blocks are then summed one
//! weight at a time.

use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use bsim_core::ScalarFn;
use bsim_laws::{BlockSampler, LawError, WeightLaw};

use crate::error::{EngineError, Result};

/// One prepared block law `U^{*ν}` with its log importance-sampling factor.
pub trait BlockDraw: Send + Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64;
    /// `ν Λ(τ) - τ x`.
    fn log_isf(&self, x: f64) -> f64;
}

pub trait SimulationLaw: Send + Sync {
    fn name(&self) -> String;
    /// Open interval of admissible tilts.
    fn tilt_domain(&self) -> (f64, f64);
    fn block(&self, nu: f64, tau: f64) -> Result<Box<dyn BlockDraw>>;
}

impl BlockDraw for BlockSampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        BlockSampler::sample(self, rng)
    }

    fn log_isf(&self, x: f64) -> f64 {
        BlockSampler::log_isf(self, x)
    }
}

impl SimulationLaw for WeightLaw {
    fn name(&self) -> String {
        WeightLaw::name(self).to_string()
    }

    fn tilt_domain(&self) -> (f64, f64) {
        self.domain().unwrap_or((0.0, 0.0))
    }

    fn block(&self, nu: f64, tau: f64) -> Result<Box<dyn BlockDraw>> {
        Ok(Box::new(WeightLaw::block(self, nu, tau)?))
    }
}

pub type UnitSampler = Arc<dyn Fn(f64, &mut ChaCha8Rng) -> f64 + Send + Sync>;

/// A law known through its cumulant function and a sampler of the unit law
/// tilted by `τ`; block counts must be integers.
#[derive(Clone)]
pub struct UnitLaw {
    name: String,
    log_mgf: ScalarFn,
    domain: (f64, f64),
    sampler: UnitSampler,
}

impl fmt::Debug for UnitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitLaw").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl UnitLaw {
    pub fn new(name: impl Into<String>, log_mgf: ScalarFn, domain: (f64, f64), sampler: UnitSampler) -> Self {
        Self { name: name.into(), log_mgf, domain, sampler }
    }
}

struct SummedBlock {
    count: u64,
    tau: f64,
    log_norm: f64,
    sampler: UnitSampler,
}

impl BlockDraw for SummedBlock {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        (0..self.count).map(|_| (self.sampler)(self.tau, rng)).sum()
    }

    fn log_isf(&self, x: f64) -> f64 {
        if self.tau == 0.0 {
            0.0
        } else {
            self.log_norm - self.tau * x
        }
    }
}

impl SimulationLaw for UnitLaw {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn tilt_domain(&self) -> (f64, f64) {
        self.domain
    }

    fn block(&self, nu: f64, tau: f64) -> Result<Box<dyn BlockDraw>> {
        let (lo, hi) = self.domain;
        if !(tau > lo && tau < hi) {
            return Err(LawError::TiltDomain { tau, lo, hi }.into());
        }
        let r = nu.round();
        if !(r >= 1.0 && (nu - r).abs() <= 1e-9 * nu.max(1.0)) {
            return Err(LawError::NonIntegerCount(nu).into());
        }
        let log_norm = r * (self.log_mgf)(tau);
        if !log_norm.is_finite() {
            return Err(EngineError::Config(format!("cumulant function is not finite at tau = {tau}")));
        }
        Ok(Box::new(SummedBlock { count: r as u64, tau, log_norm, sampler: self.sampler.clone() }))
    }
}
