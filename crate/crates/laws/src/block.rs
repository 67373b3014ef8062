//! Exact samplers for tilted block sums.
//!
//! A [`BlockSampler`] draws `S` from `U^{*ν}`, the `ν`-fold convolution of the
//! unit law ζ exponentially tilted by `τ`: `dU ∝ e^{τ x} dζ`. Its
//! importance-sampling factor against the untilted block sum is
//! `exp(ν Λ(τ) - τ S)`. With `τ = 0` it is the plain block-sum law.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal, Poisson};

use crate::error::{LawError, Result};
use crate::law::{as_integer, WeightLaw};
use crate::stable::{InverseCdfTable, TiltedPositiveStable};

#[derive(Debug, Clone)]
enum Kind {
    Normal(Normal<f64>),
    /// `offset + Gamma`.
    Gamma { offset: f64, g: Gamma<f64> },
    /// `offset + step·N`, `N ~ POI(λ)`.
    Poisson { offset: f64, step: f64, lambda: f64 },
    /// `step·N`, `N` negative binomial: `N ~ POI(G)`, `G ~ GAM(shape r, scale odds/(1-odds))`.
    NegBinomial { step: f64, r: f64, odds: f64 },
    /// `offset + step·N`, `N ~ BIN(trials, prob)`.
    Binomial { offset: f64, step: f64, trials: u64, prob: f64 },
    /// Poisson(`lambda`) count of Gamma(`shape`, `rate`) jumps.
    CompoundPoisson { lambda: f64, shape: f64, rate: f64 },
    /// `offset + mul·X`, `X` tilted positive stable.
    PositiveStable { offset: f64, mul: f64, x: TiltedPositiveStable },
    /// `mul·Y`, `Y` tabulated.
    Table { mul: f64, table: Arc<InverseCdfTable> },
    /// `offset + G1 - G2`.
    GammaDifference { offset: f64, g1: Gamma<f64>, g2: Gamma<f64> },
}

/// A lattice law `offset + step·j`, `j = 0, 1, ...`, with explicit probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePmf {
    pub offset: f64,
    pub step: f64,
    pub probs: Vec<f64>,
    /// Mass not listed in `probs` (0 for finite supports).
    pub tail: f64,
}

impl LatticePmf {
    pub fn value(&self, j: usize) -> f64 {
        self.offset + self.step * j as f64
    }
}

/// Sampler for a tilted block sum together with its importance-sampling factor.
#[derive(Debug, Clone)]
pub struct BlockSampler {
    law: WeightLaw,
    nu: f64,
    tau: f64,
    log_norm: f64,
    kind: Kind,
}

fn gamma(shape: f64, rate: f64) -> Result<Gamma<f64>> {
    Gamma::new(shape, 1.0 / rate)
        .map_err(|e| LawError::Parameter(format!("Gamma(shape {shape}, rate {rate}): {e}")))
}

fn normal(mean: f64, sd: f64) -> Result<Normal<f64>> {
    Normal::new(mean, sd).map_err(|e| LawError::Parameter(format!("Normal({mean}, {sd}): {e}")))
}

fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    // construction cannot fail for a finite positive intensity
    Poisson::new(lambda).map(|p| p.sample(rng)).unwrap_or(f64::NAN)
}

/// Parameters `(α, δ, β)` of the `γ < 0` law: `Λ(z) = -δ((β - z)^α - β^α)`, so the
/// Laplace transform is `exp(-δ((β + u)^α - β^α))`.
fn stable_params(gamma: f64, scale: f64) -> (f64, f64, f64) {
    let beta = scale / (1.0 - gamma);
    let alpha = -gamma / (1.0 - gamma);
    let delta = scale / -gamma * beta.powf(-alpha);
    (alpha, delta, beta)
}

impl BlockSampler {
    pub fn new(law: WeightLaw, nu: f64, tau: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(LawError::Parameter(format!("block count must be > 0, got {nu}")));
        }
        let (lo, hi) = law.domain()?;
        if !(tau > lo && tau < hi) || !tau.is_finite() {
            return Err(LawError::TiltDomain { tau, lo, hi });
        }
        let log_norm = if tau == 0.0 { 0.0 } else { nu * law.log_mgf(tau)? };
        if !log_norm.is_finite() {
            return Err(LawError::TiltDomain { tau, lo, hi });
        }
        use WeightLaw::*;
        let kind = match law {
            Gaussian { scale } => Kind::Normal(normal(nu * (1.0 + tau / scale), (nu / scale).sqrt())?),
            GammaLaw { scale } => Kind::Gamma { offset: 0.0, g: gamma(nu * scale, scale - tau)? },
            ScaledPoisson { scale } => Kind::Poisson {
                offset: 0.0,
                step: 1.0 / scale,
                lambda: nu * scale * (tau / scale).exp(),
            },
            ShiftedPoisson { anchor } => Kind::Poisson {
                offset: nu * (1.0 - anchor.exp()),
                step: 1.0,
                lambda: nu * (anchor + tau).exp(),
            },
            ScaledNegBinomial { alpha, scale } => Kind::NegBinomial {
                step: 1.0 / scale,
                r: nu * scale / alpha,
                odds: alpha / (1.0 + alpha) * (tau / scale).exp(),
            },
            ScaledBinomial { m, scale } => {
                let trials = as_integer(nu * m as f64)
                    .ok_or(LawError::NonIntegerCount(nu * m as f64))?;
                let p = scale / m as f64;
                let e = (tau / scale).exp();
                Kind::Binomial { offset: 0.0, step: 1.0 / scale, trials, prob: p * e / (1.0 - p + p * e) }
            }
            TwoPointLaw { z1, z2 } => {
                let trials = as_integer(nu).ok_or(LawError::NonIntegerCount(nu))?;
                let p = (z2 - 1.0) / (z2 - z1);
                // tilted mass at z1, computed in log space
                let (a, b) = (p.ln() + tau * z1, (1.0 - p).ln() + tau * z2);
                let prob = 1.0 / (1.0 + (b - a).exp());
                Kind::Binomial { offset: nu * z2, step: z1 - z2, trials, prob }
            }
            CompoundPoissonGamma { gamma: g, scale } => {
                let beta = scale / (1.0 - g);
                let s = g / (1.0 - g);
                Kind::CompoundPoisson {
                    lambda: nu * scale / g * (1.0 - tau / beta).powf(-s),
                    shape: s,
                    rate: beta - tau,
                }
            }
            TiltedStable { gamma: g, scale } => {
                let (alpha, delta, beta) = stable_params(g, scale);
                Kind::PositiveStable {
                    offset: 0.0,
                    mul: 1.0,
                    x: TiltedPositiveStable::new(alpha, nu * delta, beta - tau)?,
                }
            }
            ModTiltedStable { beta: b, scale } => {
                let (alpha, delta, beta) = stable_params(-1.0, scale / (b * b));
                Kind::PositiveStable {
                    offset: -nu * (1.0 / b - 1.0),
                    mul: 1.0 / b,
                    x: TiltedPositiveStable::new(alpha, nu * delta, beta - tau / b)?,
                }
            }
            DistortedStable { gamma: g, scale } => {
                // Λ(z) = C((κ+z)^α - κ^α), S = s·Y with E e^{wY} = exp((θ+w)^α - θ^α)
                let alpha = g / (g - 1.0);
                let kappa = scale / (g - 1.0);
                let c = scale / g * kappa.powf(-alpha);
                let s = (nu * c).powf(1.0 / alpha);
                let theta = (kappa + tau) * s;
                Kind::Table { mul: s, table: Arc::new(InverseCdfTable::tilted_skewed_stable(alpha, theta)?) }
            }
            GenAsymLaplaceLaw { alpha, beta1, beta2, scale } => Kind::GammaDifference {
                offset: nu * (1.0 - alpha / beta1 + alpha / beta2),
                g1: gamma(nu * scale * alpha, scale * beta1 - tau)?,
                g2: gamma(nu * scale * alpha, scale * beta2 + tau)?,
            },
        };
        Ok(Self { law, nu, tau, log_norm, kind })
    }

    pub fn law(&self) -> &WeightLaw {
        &self.law
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `ν Λ(τ)`.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Log importance-sampling factor `ν Λ(τ) - τ x`.
    #[inline]
    pub fn log_isf(&self, x: f64) -> f64 {
        if self.tau == 0.0 {
            0.0
        } else {
            self.log_norm - self.tau * x
        }
    }

    /// Mean of the tilted block sum, `ν Λ′(τ)`.
    pub fn mean(&self) -> f64 {
        let h = 1e-6 * (1.0 + self.tau.abs());
        match &self.kind {
            Kind::Normal(n) => n.mean(),
            _ => {
                let c = self.law.cumulant().ok();
                c.map(|c| self.nu * (c.eval(self.tau + h) - c.eval(self.tau - h)) / (2.0 * h))
                    .unwrap_or(f64::NAN)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Normal(n) => n.sample(rng),
            Kind::Gamma { offset, g } => offset + g.sample(rng),
            Kind::Poisson { offset, step, lambda } => offset + step * poisson_draw(*lambda, rng),
            Kind::NegBinomial { step, r, odds } => {
                let g = Gamma::new(*r, odds / (1.0 - odds)).map(|g| g.sample(rng)).unwrap_or(f64::NAN);
                step * poisson_draw(g, rng)
            }
            Kind::Binomial { offset, step, trials, prob } => {
                let n = Binomial::new(*trials, *prob).map(|b| b.sample(rng)).unwrap_or(0);
                offset + step * n as f64
            }
            Kind::CompoundPoisson { lambda, shape, rate } => {
                let n = poisson_draw(*lambda, rng);
                if n == 0.0 {
                    0.0
                } else {
                    Gamma::new(n * shape, 1.0 / rate).map(|g| g.sample(rng)).unwrap_or(f64::NAN)
                }
            }
            Kind::PositiveStable { offset, mul, x } => offset + mul * x.sample(rng),
            Kind::Table { mul, table } => mul * table.sample(rng),
            Kind::GammaDifference { offset, g1, g2 } => offset + g1.sample(rng) - g2.sample(rng),
        }
    }

    /// Probabilities of a lattice block sum, listed until the unlisted mass is below `tail`.
    pub fn lattice_pmf(&self, tail: f64, max_terms: usize) -> Result<LatticePmf> {
        let (offset, step, probs) = match &self.kind {
            Kind::Poisson { offset, step, lambda } => {
                let lambda = *lambda;
                let mut p = (-lambda).exp();
                if p == 0.0 {
                    return Err(LawError::Numeric(format!("Poisson intensity {lambda} too large to enumerate")));
                }
                let mut probs = Vec::new();
                let mut acc = 0.0;
                let mut j = 0.0;
                while (1.0 - acc > tail || j < lambda) && probs.len() < max_terms {
                    probs.push(p);
                    acc += p;
                    j += 1.0;
                    p *= lambda / j;
                }
                (*offset, *step, probs)
            }
            Kind::NegBinomial { step, r, odds } => {
                let mut p = (1.0 - odds).powf(*r);
                if p == 0.0 {
                    return Err(LawError::Numeric("negative binomial too spread to enumerate".into()));
                }
                let mut probs = Vec::new();
                let mut acc = 0.0;
                let mut j = 0.0;
                let mean = r * odds / (1.0 - odds);
                while (1.0 - acc > tail || j < mean) && probs.len() < max_terms {
                    probs.push(p);
                    acc += p;
                    p *= (j + r) / (j + 1.0) * odds;
                    j += 1.0;
                }
                (0.0, *step, probs)
            }
            Kind::Binomial { offset, step, trials, prob } => {
                let n = *trials;
                if n as usize + 1 > max_terms {
                    return Err(LawError::Numeric(format!("{n} binomial trials exceed the enumeration budget")));
                }
                // exact finite support; log space avoids underflow of (1-p)^n
                let (lp, lq) = (prob.ln(), (1.0 - prob).ln());
                let mut log_c = 0.0;
                let mut probs = Vec::with_capacity(n as usize + 1);
                for k in 0..=n {
                    if k > 0 {
                        log_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
                    }
                    let lpk = log_c
                        + if k > 0 { k as f64 * lp } else { 0.0 }
                        + if k < n { (n - k) as f64 * lq } else { 0.0 };
                    probs.push(lpk.exp());
                }
                let out = LatticePmf { offset: *offset, step: *step, probs, tail: 0.0 };
                return Ok(out);
            }
            _ => return Err(LawError::Unsupported(format!("{} is not a lattice law", self.law.name()))),
        };
        let listed: f64 = probs.iter().sum();
        let rest = (1.0 - listed).max(0.0);
        if rest > tail {
            return Err(LawError::Numeric(format!("enumeration budget {max_terms} leaves mass {rest}")));
        }
        Ok(LatticePmf { offset, step, probs, tail: rest })
    }
}
