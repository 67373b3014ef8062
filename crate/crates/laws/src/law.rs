//! The solved simulation laws ζ, one per closed-form generator family.
//!
//! Every law has mean 1 and cumulant function `Λ = φ*` for its generator.
//! Parameters are those of the generator; the law-specific quantities
//! (stable index, Poisson intensity, success probability, ...) are derived.

use serde::{Deserialize, Serialize};

use bsim_core::legendre::closed_form_cumulant;
use bsim_core::{CumulantFunction, DivergenceGenerator};

use crate::block::BlockSampler;
use crate::error::{LawError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightLaw {
    /// `γ < 0`: exponentially tilted positive stable law with index `-γ/(1-γ)`.
    TiltedStable { gamma: f64, scale: f64 },
    /// `γ ∈ ]0,1[`: Poisson number of Gamma jumps.
    CompoundPoissonGamma { gamma: f64, scale: f64 },
    /// `γ > 2`: exponentially distorted, totally skewed stable law with index `γ/(γ-1)`.
    DistortedStable { gamma: f64, scale: f64 },
    /// `γ = 2`: normal with mean 1 and variance `1/scale`.
    Gaussian { scale: f64 },
    /// `γ = 0`: Gamma with shape and rate `scale`.
    GammaLaw { scale: f64 },
    /// `γ = 1`: `POI(scale)/scale`.
    ScaledPoisson { scale: f64 },
    /// `POI(e^c) + 1 - e^c`.
    ShiftedPoisson { anchor: f64 },
    /// `NB(scale/α, 1/(1+α))/scale`.
    ScaledNegBinomial { alpha: f64, scale: f64 },
    /// `BIN(m, scale/m)/scale`, `m > scale` an integer.
    ScaledBinomial { m: u64, scale: f64 },
    /// `W/β - (1/β - 1)` with `W` the `γ = -1` law at scale `scale/β²`.
    ModTiltedStable { beta: f64, scale: f64 },
    /// Mass `(z2-1)/(z2-z1)` at `z1`, the rest at `z2`.
    TwoPointLaw { z1: f64, z2: f64 },
    /// `θ + GAM(rate scale·β1, shape scale·α) - GAM(rate scale·β2, shape scale·α)`.
    GenAsymLaplaceLaw { alpha: f64, beta1: f64, beta2: f64, scale: f64 },
}

/// Tolerance for recognizing integers among real parameters.
pub const INTEGER_TOL: f64 = 1e-9;

pub(crate) fn as_integer(x: f64) -> Option<u64> {
    let r = x.round();
    if r >= 0.0 && (x - r).abs() <= INTEGER_TOL * x.abs().max(1.0) {
        Some(r as u64)
    } else {
        None
    }
}

impl WeightLaw {
    /// The law whose cumulant function is the conjugate of `gen`.
    pub fn for_generator(gen: &DivergenceGenerator) -> Result<Self> {
        use bsim_core::generator::GeneratorKind as G;
        let law = match *gen.kind() {
            G::PowerGamma { gamma, scale } => {
                if gamma < 0.0 {
                    WeightLaw::TiltedStable { gamma, scale }
                } else if gamma == 0.0 {
                    WeightLaw::GammaLaw { scale }
                } else if gamma < 1.0 {
                    WeightLaw::CompoundPoissonGamma { gamma, scale }
                } else if gamma == 1.0 {
                    WeightLaw::ScaledPoisson { scale }
                } else if gamma == 2.0 {
                    WeightLaw::Gaussian { scale }
                } else if gamma > 2.0 {
                    WeightLaw::DistortedStable { gamma, scale }
                } else {
                    return Err(LawError::Unsupported(format!(
                        "no probability law is known for gamma = {gamma} in ]1,2["
                    )));
                }
            }
            G::GeneralizedKl { alpha, scale } => {
                if alpha > 0.0 {
                    WeightLaw::ScaledNegBinomial { alpha, scale }
                } else {
                    let m = as_integer(scale / -alpha).ok_or_else(|| {
                        LawError::Unsupported(format!(
                            "binomial law needs scale/|alpha| integral, got {}",
                            scale / -alpha
                        ))
                    })?;
                    WeightLaw::ScaledBinomial { m, scale }
                }
            }
            G::AnchoredKl { anchor } => WeightLaw::ShiftedPoisson { anchor },
            G::BlendedWeightChiSq { beta, scale } => WeightLaw::ModTiltedStable { beta, scale },
            G::TwoPoint { z1, z2 } => WeightLaw::TwoPointLaw { z1, z2 },
            G::GenAsymLaplace { alpha, beta1, beta2, scale } => {
                WeightLaw::GenAsymLaplaceLaw { alpha, beta1, beta2, scale }
            }
            G::Custom(_) => {
                return Err(LawError::Unsupported(
                    "custom generators need a user-supplied sampler".into(),
                ))
            }
        };
        Ok(law)
    }

    /// The generator `φ = Λ*` belonging to this law.
    pub fn generator(&self) -> Result<DivergenceGenerator> {
        use WeightLaw::*;
        let g = match *self {
            TiltedStable { gamma, scale } => {
                if gamma >= 0.0 {
                    return Err(LawError::Parameter(format!("tilted stable needs gamma < 0, got {gamma}")));
                }
                DivergenceGenerator::power(gamma, scale)?
            }
            CompoundPoissonGamma { gamma, scale } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(LawError::Parameter(format!("compound Poisson-Gamma needs gamma in ]0,1[, got {gamma}")));
                }
                DivergenceGenerator::power(gamma, scale)?
            }
            DistortedStable { gamma, scale } => {
                if gamma <= 2.0 {
                    return Err(LawError::Parameter(format!("distorted stable needs gamma > 2, got {gamma}")));
                }
                DivergenceGenerator::power(gamma, scale)?
            }
            Gaussian { scale } => DivergenceGenerator::power(2.0, scale)?,
            GammaLaw { scale } => DivergenceGenerator::power(0.0, scale)?,
            ScaledPoisson { scale } => DivergenceGenerator::power(1.0, scale)?,
            ShiftedPoisson { anchor } => DivergenceGenerator::anchored_kl(anchor)?,
            ScaledNegBinomial { alpha, scale } => {
                if alpha <= 0.0 {
                    return Err(LawError::Parameter(format!("negative binomial needs alpha > 0, got {alpha}")));
                }
                DivergenceGenerator::generalized_kl(alpha, scale)?
            }
            ScaledBinomial { m, scale } => {
                if !(m as f64 > scale) {
                    return Err(LawError::Parameter(format!("binomial needs m > scale, got m={m}, scale={scale}")));
                }
                DivergenceGenerator::generalized_kl(-scale / m as f64, scale)?
            }
            ModTiltedStable { beta, scale } => DivergenceGenerator::blended_weight_chi_sq(beta, scale)?,
            TwoPointLaw { z1, z2 } => DivergenceGenerator::two_point(z1, z2)?,
            GenAsymLaplaceLaw { alpha, beta1, beta2, scale } => {
                DivergenceGenerator::gen_asym_laplace(alpha, beta1, beta2, scale)?
            }
        };
        Ok(g)
    }

    pub fn name(&self) -> &'static str {
        use WeightLaw::*;
        match self {
            TiltedStable { .. } => "tilted_stable",
            CompoundPoissonGamma { .. } => "compound_poisson_gamma",
            DistortedStable { .. } => "distorted_stable",
            Gaussian { .. } => "gaussian",
            GammaLaw { .. } => "gamma_law",
            ScaledPoisson { .. } => "scaled_poisson",
            ShiftedPoisson { .. } => "shifted_poisson",
            ScaledNegBinomial { .. } => "scaled_neg_binomial",
            ScaledBinomial { .. } => "scaled_binomial",
            ModTiltedStable { .. } => "mod_tilted_stable",
            TwoPointLaw { .. } => "two_point_law",
            GenAsymLaplaceLaw { .. } => "gen_asym_laplace_law",
        }
    }

    /// Closed-form cumulant function Λ.
    pub fn cumulant(&self) -> Result<CumulantFunction> {
        let g = self.generator()?;
        closed_form_cumulant(&g).ok_or_else(|| LawError::Unsupported("no closed-form cumulant".into()))
    }

    /// `Λ(z)`; `+inf` outside the MGF domain.
    pub fn log_mgf(&self, z: f64) -> Result<f64> {
        Ok(self.cumulant()?.eval(z))
    }

    /// Open MGF domain `]λ_-, λ_+[`.
    pub fn domain(&self) -> Result<(f64, f64)> {
        Ok(self.generator()?.lambda_bounds())
    }

    /// Variance `Λ″(0)`.
    pub fn variance(&self) -> Result<f64> {
        use WeightLaw::*;
        Ok(match *self {
            TiltedStable { scale, .. }
            | CompoundPoissonGamma { scale, .. }
            | DistortedStable { scale, .. }
            | ModTiltedStable { scale, .. }
            | Gaussian { scale }
            | GammaLaw { scale }
            | ScaledPoisson { scale } => 1.0 / scale,
            ShiftedPoisson { anchor } => anchor.exp(),
            ScaledNegBinomial { alpha, scale } => (1.0 + alpha) / scale,
            ScaledBinomial { m, scale } => (1.0 - scale / m as f64) / scale,
            TwoPointLaw { z1, z2 } => (z2 - 1.0) * (1.0 - z1),
            GenAsymLaplaceLaw { alpha, beta1, beta2, scale } => {
                alpha / scale * (1.0 / (beta1 * beta1) + 1.0 / (beta2 * beta2))
            }
        })
    }

    /// Whether the law is supported on a lattice.
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            WeightLaw::ScaledPoisson { .. }
                | WeightLaw::ShiftedPoisson { .. }
                | WeightLaw::ScaledNegBinomial { .. }
                | WeightLaw::ScaledBinomial { .. }
                | WeightLaw::TwoPointLaw { .. }
        )
    }

    /// Whether `ζ^{*ν}` exists for every real `ν > 0`; otherwise `ν` must be an integer
    /// (times `1/m` for the binomial law).
    pub fn infinitely_divisible(&self) -> bool {
        !matches!(self, WeightLaw::ScaledBinomial { .. } | WeightLaw::TwoPointLaw { .. })
    }

    /// Sampler for `ζ^{*ν}` tilted by `τ` (density `∝ e^{τx}`).
    pub fn block(&self, nu: f64, tau: f64) -> Result<BlockSampler> {
        BlockSampler::new(*self, nu, tau)
    }

    /// Sampler for single draws of `W`.
    pub fn sampler(&self) -> Result<BlockSampler> {
        self.block(1.0, 0.0)
    }

    /// Log importance-sampling factor `ν Λ(τ) - τ x` of a block sum `x`.
    pub fn log_isf(&self, tau: f64, nu: f64, x: f64) -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        let l = self.log_mgf(tau)?;
        if !l.is_finite() {
            let (lo, hi) = self.domain()?;
            return Err(LawError::TiltDomain { tau, lo, hi });
        }
        Ok(nu * l - tau * x)
    }
}
