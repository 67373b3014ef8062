//! Divergence generators φ with their derivatives and effective domains.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre::GeneratorSpec;

/// The closed-form generator families plus user-built ones.
#[derive(Clone)]
pub enum GeneratorKind {
    /// Power divergence generator `c̃·φ_γ`; `γ ∈ ]1,2[` is not representable.
    PowerGamma { gamma: f64, scale: f64 },
    /// Generalized Kullback-Leibler generator; `alpha = 1` gives Jensen-Shannon.
    GeneralizedKl { alpha: f64, scale: f64 },
    /// Kullback-Leibler generator shifted by an anchor `c`.
    AnchoredKl { anchor: f64 },
    /// Blended-weight chi-square generator.
    BlendedWeightChiSq { beta: f64, scale: f64 },
    /// Generator conjugate to a two-point weight law on `{z1, z2}`.
    TwoPoint { z1: f64, z2: f64 },
    /// Generator conjugate to a generalized asymmetric Laplace weight law.
    GenAsymLaplace { alpha: f64, beta1: f64, beta2: f64, scale: f64 },
    /// Generator built from a monotone derivative map.
    Custom(Arc<GeneratorSpec>),
}

/// A validated divergence generator.
#[derive(Clone)]
pub struct DivergenceGenerator {
    kind: GeneratorKind,
}

/// Serializable description of a closed-form generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    Power {
        gamma: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    GeneralizedKl {
        alpha: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    AnchoredKl {
        anchor: f64,
    },
    BlendedWeightChiSq {
        beta: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    TwoPoint {
        z1: f64,
        z2: f64,
    },
    GenAsymLaplace {
        alpha: f64,
        beta1: f64,
        beta2: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite and > 0, got {x}")))
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite, got {x}")))
    }
}

/// `x·log(x/y)` with `0·log(0/y) = 0`.
fn xlogxy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

impl DivergenceGenerator {
    pub fn power(gamma: f64, scale: f64) -> Result<Self> {
        finite("gamma", gamma)?;
        positive("scale", scale)?;
        if gamma > 1.0 && gamma < 2.0 {
            return Err(Error::Parameter(format!(
                "gamma = {gamma} lies in ]1,2[: no probability law has the required cumulant function there"
            )));
        }
        Ok(Self { kind: GeneratorKind::PowerGamma { gamma, scale } })
    }

    pub fn generalized_kl(alpha: f64, scale: f64) -> Result<Self> {
        finite("alpha", alpha)?;
        positive("scale", scale)?;
        if alpha <= -1.0 || alpha == 0.0 {
            return Err(Error::Parameter(format!("alpha must lie in ]-1,0[ or ]0,inf[, got {alpha}")));
        }
        Ok(Self { kind: GeneratorKind::GeneralizedKl { alpha, scale } })
    }

    /// Jensen-Shannon generator (generalized KL with `alpha = 1`).
    pub fn jensen_shannon(scale: f64) -> Result<Self> {
        Self::generalized_kl(1.0, scale)
    }

    pub fn anchored_kl(anchor: f64) -> Result<Self> {
        finite("anchor", anchor)?;
        if anchor.exp() > 1e300 {
            return Err(Error::Parameter("anchor too large".into()));
        }
        Ok(Self { kind: GeneratorKind::AnchoredKl { anchor } })
    }

    pub fn blended_weight_chi_sq(beta: f64, scale: f64) -> Result<Self> {
        positive("scale", scale)?;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Parameter(format!("beta must lie in ]0,1], got {beta}")));
        }
        Ok(Self { kind: GeneratorKind::BlendedWeightChiSq { beta, scale } })
    }

    pub fn two_point(z1: f64, z2: f64) -> Result<Self> {
        finite("z1", z1)?;
        finite("z2", z2)?;
        if !(z1 < 1.0 && z2 > 1.0) {
            return Err(Error::Parameter(format!("need z1 < 1 < z2, got ({z1}, {z2})")));
        }
        Ok(Self { kind: GeneratorKind::TwoPoint { z1, z2 } })
    }

    pub fn gen_asym_laplace(alpha: f64, beta1: f64, beta2: f64, scale: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("beta1", beta1)?;
        positive("beta2", beta2)?;
        positive("scale", scale)?;
        Ok(Self { kind: GeneratorKind::GenAsymLaplace { alpha, beta1, beta2, scale } })
    }

    pub fn custom(spec: Arc<GeneratorSpec>) -> Self {
        Self { kind: GeneratorKind::Custom(spec) }
    }

    pub fn from_config(cfg: &GeneratorConfig) -> Result<Self> {
        match *cfg {
            GeneratorConfig::Power { gamma, scale } => Self::power(gamma, scale),
            GeneratorConfig::GeneralizedKl { alpha, scale } => Self::generalized_kl(alpha, scale),
            GeneratorConfig::AnchoredKl { anchor } => Self::anchored_kl(anchor),
            GeneratorConfig::BlendedWeightChiSq { beta, scale } => {
                Self::blended_weight_chi_sq(beta, scale)
            }
            GeneratorConfig::TwoPoint { z1, z2 } => Self::two_point(z1, z2),
            GeneratorConfig::GenAsymLaplace { alpha, beta1, beta2, scale } => {
                Self::gen_asym_laplace(alpha, beta1, beta2, scale)
            }
        }
    }

    /// The configuration this generator was built from; `None` for custom generators.
    pub fn config(&self) -> Option<GeneratorConfig> {
        Some(match self.kind {
            GeneratorKind::PowerGamma { gamma, scale } => GeneratorConfig::Power { gamma, scale },
            GeneratorKind::GeneralizedKl { alpha, scale } => {
                GeneratorConfig::GeneralizedKl { alpha, scale }
            }
            GeneratorKind::AnchoredKl { anchor } => GeneratorConfig::AnchoredKl { anchor },
            GeneratorKind::BlendedWeightChiSq { beta, scale } => {
                GeneratorConfig::BlendedWeightChiSq { beta, scale }
            }
            GeneratorKind::TwoPoint { z1, z2 } => GeneratorConfig::TwoPoint { z1, z2 },
            GeneratorKind::GenAsymLaplace { alpha, beta1, beta2, scale } => {
                GeneratorConfig::GenAsymLaplace { alpha, beta1, beta2, scale }
            }
            GeneratorKind::Custom(_) => return None,
        })
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    /// `(γ, c̃)` for power generators.
    pub fn power_params(&self) -> Option<(f64, f64)> {
        match self.kind {
            GeneratorKind::PowerGamma { gamma, scale } => Some((gamma, scale)),
            _ => None,
        }
    }

    /// Interior `]a, b[` of the effective domain.
    pub fn interior(&self) -> (f64, f64) {
        use GeneratorKind::*;
        const INF: f64 = f64::INFINITY;
        match &self.kind {
            PowerGamma { gamma, .. } => {
                if *gamma >= 2.0 {
                    (-INF, INF)
                } else {
                    (0.0, INF)
                }
            }
            GeneralizedKl { alpha, .. } => {
                if *alpha > 0.0 {
                    (0.0, INF)
                } else {
                    (0.0, -1.0 / alpha)
                }
            }
            AnchoredKl { anchor } => (1.0 - anchor.exp(), INF),
            BlendedWeightChiSq { beta, .. } => (1.0 - 1.0 / beta, INF),
            TwoPoint { z1, z2 } => (*z1, *z2),
            GenAsymLaplace { .. } => (-INF, INF),
            Custom(spec) => spec.t_bounds_effective(),
        }
    }

    /// Infimum and supremum `(λ_-, λ_+)` of φ′; also the asymptotic slopes of φ.
    pub fn lambda_bounds(&self) -> (f64, f64) {
        use GeneratorKind::*;
        const INF: f64 = f64::INFINITY;
        match &self.kind {
            PowerGamma { gamma: g, scale: c } => {
                if *g < 1.0 {
                    (-INF, c / (1.0 - g))
                } else if *g <= 2.0 {
                    (-INF, INF)
                } else {
                    (-c / (g - 1.0), INF)
                }
            }
            GeneralizedKl { alpha, scale } => {
                if *alpha > 0.0 {
                    (-INF, scale * ((1.0 + alpha) / alpha).ln())
                } else {
                    (-INF, INF)
                }
            }
            AnchoredKl { .. } | TwoPoint { .. } => (-INF, INF),
            BlendedWeightChiSq { beta, scale } => (-INF, scale / (2.0 * beta)),
            GenAsymLaplace { beta1, beta2, scale, .. } => (-scale * beta2, scale * beta1),
            Custom(spec) => spec.lambda_bounds(),
        }
    }

    /// φ(t), `+inf` outside the effective domain, boundary values by continuous extension.
    pub fn phi(&self, t: f64) -> f64 {
        use GeneratorKind::*;
        const INF: f64 = f64::INFINITY;
        if t.is_nan() {
            return f64::NAN;
        }
        match &self.kind {
            &PowerGamma { gamma: g, scale: c } => c * power_phi(g, t),
            &GeneralizedKl { alpha: a, scale: c } => {
                if t < 0.0 {
                    return INF;
                }
                if a < 0.0 {
                    let b = -1.0 / a;
                    if t > b {
                        return INF;
                    }
                    if t == b {
                        return c * b * b.ln();
                    }
                }
                if t == 0.0 {
                    return c * a.ln_1p() / a;
                }
                c * (t * t.ln() + (t + 1.0 / a) * (a.ln_1p() - (a * t).ln_1p()))
            }
            &AnchoredKl { anchor } => {
                let e = anchor.exp();
                let s = t + e - 1.0;
                if s < 0.0 {
                    INF
                } else if s == 0.0 {
                    e
                } else {
                    s * (s.ln() - anchor) + 1.0 - t
                }
            }
            &BlendedWeightChiSq { beta, scale } => {
                let u = beta * t + 1.0 - beta;
                if u <= 0.0 {
                    INF
                } else {
                    scale * (t - 1.0) * (t - 1.0) / (2.0 * u)
                }
            }
            &TwoPoint { z1, z2 } => {
                if t < z1 || t > z2 {
                    return INF;
                }
                let width = z2 - z1;
                let w = (z2 - t) / width;
                let v = (t - z1) / width;
                let p = (z2 - 1.0) / width;
                let q = (1.0 - z1) / width;
                xlogxy(w, p) + xlogxy(v, q)
            }
            &GenAsymLaplace { alpha, beta1, beta2, scale } => {
                let x = (1.0 - t) / alpha + 1.0 / beta2 - 1.0 / beta1;
                let s = beta1 + beta2;
                let r = (2.0f64).hypot(s * x);
                let val = scale
                    * alpha
                    * ((r - x * (beta1 - beta2) - 2.0) / 2.0
                        + (s * s / (beta1 * beta2 * (r + 2.0))).ln());
                val.max(0.0)
            }
            Custom(spec) => spec.phi(t),
        }
    }

    /// φ′(t) extended by `±inf` beyond the interior of the domain.
    pub fn phi_prime_ext(&self, t: f64) -> f64 {
        use GeneratorKind::*;
        const INF: f64 = f64::INFINITY;
        let (a, b) = self.interior();
        match &self.kind {
            &PowerGamma { gamma: g, scale: c } => {
                if g == 2.0 {
                    c * (t - 1.0)
                } else if g > 2.0 {
                    if t <= 0.0 {
                        -c / (g - 1.0)
                    } else {
                        c * (t.powf(g - 1.0) - 1.0) / (g - 1.0)
                    }
                } else if t <= 0.0 {
                    -INF
                } else if g == 1.0 {
                    c * t.ln()
                } else {
                    c * (t.powf(g - 1.0) - 1.0) / (g - 1.0)
                }
            }
            &GeneralizedKl { alpha: al, scale: c } => {
                if t <= a {
                    -INF
                } else if t >= b {
                    INF
                } else {
                    c * (t.ln() + al.ln_1p() - (al * t).ln_1p())
                }
            }
            &AnchoredKl { anchor } => {
                if t <= a {
                    -INF
                } else {
                    (t + anchor.exp() - 1.0).ln() - anchor
                }
            }
            &BlendedWeightChiSq { beta, scale } => {
                if t <= a {
                    -INF
                } else {
                    let u = beta * t + 1.0 - beta;
                    scale / (2.0 * beta) * (1.0 - 1.0 / (u * u))
                }
            }
            &TwoPoint { z1, z2 } => {
                if t <= z1 {
                    -INF
                } else if t >= z2 {
                    INF
                } else {
                    (((t - z1) * (z2 - 1.0)) / ((z2 - t) * (1.0 - z1))).ln() / (z2 - z1)
                }
            }
            &GenAsymLaplace { alpha, beta1, beta2, scale } => {
                let x = (1.0 - t) / alpha + 1.0 / beta2 - 1.0 / beta1;
                let s = beta1 + beta2;
                let r = (2.0f64).hypot(s * x);
                scale * (beta1 - beta2) / 2.0 - scale * s * s * x / (2.0 * (r + 2.0))
            }
            Custom(spec) => spec.phi_prime(t),
        }
    }

    /// φ′(t) on the interior of the domain.
    pub fn phi_prime(&self, t: f64) -> Result<f64> {
        let (a, b) = self.interior();
        if !(t > a && t < b) {
            return Err(Error::Domain(format!("t = {t} outside ]{a}, {b}[")));
        }
        Ok(self.phi_prime_ext(t))
    }

    /// Central-difference second derivative of φ at an interior point.
    pub fn phi_second(&self, t: f64) -> f64 {
        let h = 1e-5 * (1.0 + t.abs());
        (self.phi_prime_ext(t + h) - self.phi_prime_ext(t - h)) / (2.0 * h)
    }

    pub fn name(&self) -> String {
        use GeneratorKind::*;
        match &self.kind {
            PowerGamma { gamma, scale } => format!("power(gamma={gamma}, scale={scale})"),
            GeneralizedKl { alpha, scale } => format!("generalized_kl(alpha={alpha}, scale={scale})"),
            AnchoredKl { anchor } => format!("anchored_kl(anchor={anchor})"),
            BlendedWeightChiSq { beta, scale } => {
                format!("blended_weight_chi_sq(beta={beta}, scale={scale})")
            }
            TwoPoint { z1, z2 } => format!("two_point(z1={z1}, z2={z2})"),
            GenAsymLaplace { alpha, beta1, beta2, scale } => format!(
                "gen_asym_laplace(alpha={alpha}, beta1={beta1}, beta2={beta2}, scale={scale})"
            ),
            Custom(_) => "custom".into(),
        }
    }
}

impl fmt::Debug for DivergenceGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DivergenceGenerator({})", self.name())
    }
}

/// Unscaled power generator φ_γ(t).
pub(crate) fn power_phi(g: f64, t: f64) -> f64 {
    const INF: f64 = f64::INFINITY;
    if g == 2.0 {
        return 0.5 * (t - 1.0) * (t - 1.0);
    }
    if t < 0.0 {
        return if g > 2.0 { 1.0 / g - t / (g - 1.0) } else { INF };
    }
    if t == 0.0 {
        return if g <= 0.0 { INF } else { 1.0 / g };
    }
    if g == 1.0 {
        t * t.ln() + 1.0 - t
    } else if g == 0.0 {
        -t.ln() + t - 1.0
    } else {
        ((t.powf(g) - g * t + g - 1.0) / (g * (g - 1.0))).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_closed_forms() -> Vec<DivergenceGenerator> {
        vec![
            DivergenceGenerator::power(-1.0, 1.0).unwrap(),
            DivergenceGenerator::power(-2.5, 2.0).unwrap(),
            DivergenceGenerator::power(0.0, 1.0).unwrap(),
            DivergenceGenerator::power(0.5, 1.5).unwrap(),
            DivergenceGenerator::power(1.0, 1.0).unwrap(),
            DivergenceGenerator::power(2.0, 1.0).unwrap(),
            DivergenceGenerator::power(3.0, 0.7).unwrap(),
            DivergenceGenerator::generalized_kl(1.0, 1.0).unwrap(),
            DivergenceGenerator::generalized_kl(-0.25, 1.0).unwrap(),
            DivergenceGenerator::anchored_kl(0.7).unwrap(),
            DivergenceGenerator::anchored_kl(-0.5).unwrap(),
            DivergenceGenerator::blended_weight_chi_sq(0.5, 1.0).unwrap(),
            DivergenceGenerator::two_point(0.0, 2.0).unwrap(),
            DivergenceGenerator::two_point(-1.0, 3.0).unwrap(),
            DivergenceGenerator::gen_asym_laplace(1.0, 1.0, 2.0, 1.0).unwrap(),
            DivergenceGenerator::gen_asym_laplace(0.5, 1.5, 1.5, 2.0).unwrap(),
        ]
    }

    #[test]
    fn spot_values() {
        let g2 = DivergenceGenerator::power(2.0, 1.0).unwrap();
        assert_eq!(g2.phi(1.0), 0.0);
        assert_eq!(g2.phi(3.0), 2.0);
        assert_eq!(g2.phi_prime(0.25).unwrap(), -0.75);
        let g0 = DivergenceGenerator::power(0.0, 1.0).unwrap();
        assert_eq!(g0.phi(0.0), f64::INFINITY);
        let g1 = DivergenceGenerator::power(1.0, 1.0).unwrap();
        assert_eq!(g1.phi_prime(1.0).unwrap(), 0.0);
        assert!((g1.phi_prime(2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let gh = DivergenceGenerator::power(0.5, 1.0).unwrap();
        assert_eq!(gh.phi(0.0), 2.0);
        assert_eq!(g1.phi(0.0), 1.0);
    }

    #[test]
    fn rejects_gap_gamma() {
        assert!(DivergenceGenerator::power(1.5, 1.0).is_err());
        assert!(DivergenceGenerator::generalized_kl(-1.0, 1.0).is_err());
        assert!(DivergenceGenerator::blended_weight_chi_sq(1.5, 1.0).is_err());
        assert!(DivergenceGenerator::two_point(1.0, 2.0).is_err());
    }

    #[test]
    fn boundary_values() {
        let a = DivergenceGenerator::anchored_kl(1.0).unwrap();
        let e = 1f64.exp();
        assert!((a.phi(1.0 - e) - e).abs() < 1e-15);
        assert_eq!(a.phi(1.0 - e - 1e-9), f64::INFINITY);
        let tp = DivergenceGenerator::two_point(0.0, 2.0).unwrap();
        assert!((tp.phi(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((tp.phi(2.0) - 2f64.ln()).abs() < 1e-15);
        let g = DivergenceGenerator::generalized_kl(-0.25, 1.0).unwrap();
        assert!((g.phi(4.0) - 4.0 * 4f64.ln()).abs() < 1e-14);
        assert!((g.phi(4.0 - 1e-9) - g.phi(4.0)).abs() < 1e-6);
        let g3 = DivergenceGenerator::power(3.0, 1.0).unwrap();
        assert!((g3.phi(-1.0) - (1.0 / 3.0 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn normalization_at_one_and_convexity() {
        for g in all_closed_forms() {
            assert!(g.phi(1.0).abs() < 1e-15, "{g:?}");
            assert!(g.phi_prime(1.0).unwrap().abs() < 1e-14, "{g:?}");
            let (a, b) = g.interior();
            let lo = if a.is_finite() { a } else { -5.0 };
            let hi = if b.is_finite() { b } else { 6.0 };
            for i in 1..200 {
                let t = lo + (hi - lo) * i as f64 / 200.0;
                let h = 1e-4 * (hi - lo);
                let d2 = g.phi(t + h) - 2.0 * g.phi(t) + g.phi(t - h);
                assert!(d2 >= -1e-12, "{g:?} t={t}");
                // the derivative matches the generator
                let fd = (g.phi(t + 1e-6) - g.phi(t - 1e-6)) / 2e-6;
                let an = g.phi_prime_ext(t);
                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "{g:?} t={t} {fd} {an}");
            }
        }
    }

    #[test]
    fn slopes_match_derivative_limits() {
        for g in all_closed_forms() {
            let (lm, lp) = g.lambda_bounds();
            let (a, b) = g.interior();
            if b.is_infinite() && lp.is_finite() {
                assert!((g.phi_prime_ext(1e9) - lp).abs() < 1e-3, "{g:?}");
            }
            if a.is_infinite() && lm.is_finite() {
                assert!((g.phi_prime_ext(-1e9) - lm).abs() < 1e-3, "{g:?}");
            }
        }
    }
}
