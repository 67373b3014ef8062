//! Minimization of `m ↦ D_φ(m·Q, P)` and the maps between a simplex-mode
//! large-deviation rate and the power-divergence, Hellinger and
//! Kullback-Leibler values it determines.
//!
//! Throughout, `P` is a probability vector and `A = Σ q_k`.

use serde::{Deserialize, Serialize};

use crate::divergence::{divergence, hellinger_integral, modified_kl, modified_rev_kl};
use crate::error::{Error, Result};
use crate::generator::DivergenceGenerator;

/// Value and minimizer of `inf_{m ≠ 0} D(m·Q, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinOverM {
    pub value: f64,
    pub m: f64,
}

fn check_simplex(p: &[f64]) -> Result<()> {
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-10 || p.iter().any(|x| *x < 0.0) {
        return Err(Error::Inadmissible(format!("P must be a probability vector (sum {s})")));
    }
    Ok(())
}

fn check_gamma(gamma: f64, scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Parameter(format!("scale must be > 0, got {scale}")));
    }
    if !gamma.is_finite() || (gamma > 1.0 && gamma < 2.0) {
        return Err(Error::Parameter(format!("gamma = {gamma} not supported")));
    }
    Ok(())
}

/// `A^{e}` where `A < 0` is admitted only for the even integer powers arising at `γ = 2`.
fn signed_pow(a: f64, e: f64) -> f64 {
    if a < 0.0 && e == 2.0 {
        a * a
    } else {
        a.powf(e)
    }
}

/// Closed-form `inf_m D_{c̃φ_γ}(m·Q, P)` and its minimizer.
pub fn min_over_m_closed(gamma: f64, scale: f64, q: &[f64], p: &[f64]) -> Result<MinOverM> {
    check_gamma(gamma, scale)?;
    check_simplex(p)?;
    let a: f64 = q.iter().sum();
    if a == 0.0 || (a < 0.0 && gamma != 2.0) {
        return Err(Error::Inadmissible(format!("total mass A = {a} not admissible")));
    }
    if gamma == 1.0 {
        let i = modified_kl(q, p)?;
        let m = (-i / a).exp();
        return Ok(MinOverM { value: scale * (1.0 - a * m), m });
    }
    if gamma == 0.0 {
        let g = DivergenceGenerator::power(0.0, scale)?;
        let d = divergence(&g, q, p)?;
        return Ok(MinOverM { value: d + scale * (1.0 - a + a.ln()), m: 1.0 / a });
    }
    let h = hellinger_integral(gamma, q, p)?;
    let value = scale / gamma
        * (1.0 - signed_pow(a, gamma / (gamma - 1.0)) * h.powf(-1.0 / (gamma - 1.0)));
    let m = if gamma == 2.0 { a / h } else { (h / a).powf(1.0 / (1.0 - gamma)) };
    Ok(MinOverM { value, m })
}

/// Root `m` of `Σ q_k φ′(m q_k / p_k) = 0`, i.e. the minimizer of `D(m·Q, P)` for `Q >= 0`.
///
/// Bisection on `[min p/q, max p/q]` over the positive entries of `Q`.
pub fn m_root(gen: &DivergenceGenerator, q: &[f64], p: &[f64], tol: f64) -> Result<f64> {
    let ratios: Vec<f64> = q
        .iter()
        .zip(p)
        .filter(|(qk, _)| **qk > 0.0)
        .map(|(qk, pk)| pk / qk)
        .collect();
    if ratios.is_empty() || q.iter().any(|x| *x < 0.0) {
        return Err(Error::Inadmissible("Q must be nonnegative and not identically zero".into()));
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    if hi == lo {
        return Ok(lo);
    }
    let g = |m: f64| -> f64 {
        let mut s = 0.0;
        for (&qk, &pk) in q.iter().zip(p) {
            if qk > 0.0 {
                let d = if pk > 0.0 {
                    gen.phi_prime_ext(m * qk / pk)
                } else {
                    gen.lambda_bounds().1
                };
                s += qk * d;
            }
        }
        if s.is_nan() {
            0.0
        } else {
            s
        }
    };
    Ok(crate::numeric::bisect_increasing(g, lo, hi, tol * lo.max(1.0)))
}

/// Numeric `inf_m D(m·Q, P)` through [`m_root`], for any generator.
pub fn min_over_m_numeric(
    gen: &DivergenceGenerator,
    q: &[f64],
    p: &[f64],
    tol: f64,
) -> Result<MinOverM> {
    let m = m_root(gen, q, p, tol)?;
    let mq: Vec<f64> = q.iter().map(|x| m * x).collect();
    Ok(MinOverM { value: divergence(gen, &mq, p)?, m })
}

/// The value `inf_m D(m·Q, P)` written as a function of `D = D_{c̃φ_γ}(Q, P)` and `A`.
pub fn rate_from_power_divergence(gamma: f64, scale: f64, a: f64, d: f64) -> Result<f64> {
    check_gamma(gamma, scale)?;
    if a == 0.0 || (a < 0.0 && gamma != 2.0) {
        return Err(Error::Inadmissible(format!("A = {a} not admissible")));
    }
    if gamma == 0.0 {
        return Ok(d + scale * (1.0 - a + a.ln()));
    }
    if gamma == 1.0 {
        let i = d / scale - 1.0 + a;
        return Ok(scale * (1.0 - a * (-i / a).exp()));
    }
    let h = 1.0 + gamma * (a - 1.0) + gamma * (gamma - 1.0) * d / scale;
    if h <= 0.0 {
        return Err(Error::Domain(format!("Hellinger integral {h} <= 0")));
    }
    Ok(scale / gamma * (1.0 - signed_pow(a, gamma / (gamma - 1.0)) * h.powf(-1.0 / (gamma - 1.0))))
}

/// Hellinger integral `H_γ` determined by a simplex-mode rate (`γ ∉ {0, 1}`).
pub fn hellinger_from_rate(gamma: f64, scale: f64, a: f64, rate: f64) -> Result<f64> {
    check_gamma(gamma, scale)?;
    if gamma == 0.0 || gamma == 1.0 {
        return Err(Error::Parameter("Hellinger inversion needs gamma not in {0,1}".into()));
    }
    let base = 1.0 - gamma * rate / scale;
    if base <= 0.0 {
        return Err(Error::Domain(format!(
            "1 - gamma*rate/scale = {base} <= 0: the sample size is too small for this constraint set"
        )));
    }
    Ok(signed_pow(a, gamma) * base.powf(1.0 - gamma))
}

/// Modified Kullback-Leibler information `I` determined by a `γ = 1` rate.
pub fn kl_from_rate(scale: f64, a: f64, rate: f64) -> Result<f64> {
    let arg = (1.0 - rate / scale) / a;
    if !(arg > 0.0) || a <= 0.0 {
        return Err(Error::Domain(format!(
            "log argument {arg} <= 0: the sample size is too small for this constraint set"
        )));
    }
    Ok(-a * arg.ln())
}

/// Modified reverse Kullback-Leibler information `Ĩ` determined by a `γ = 0` rate.
pub fn rev_kl_from_rate(scale: f64, a: f64, rate: f64) -> Result<f64> {
    if a <= 0.0 {
        return Err(Error::Inadmissible(format!("A = {a} <= 0")));
    }
    Ok(rate / scale - a.ln())
}

/// Power divergence `D_{c̃φ_γ}` determined by a simplex-mode rate.
pub fn power_divergence_from_rate(gamma: f64, scale: f64, a: f64, rate: f64) -> Result<f64> {
    check_gamma(gamma, scale)?;
    if gamma == 0.0 {
        if a <= 0.0 {
            return Err(Error::Inadmissible(format!("A = {a} <= 0")));
        }
        return Ok(rate + scale * (a - 1.0 - a.ln()));
    }
    if gamma == 1.0 {
        let i = kl_from_rate(scale, a, rate)?;
        return Ok(scale * (i + 1.0 - a));
    }
    let h = hellinger_from_rate(gamma, scale, a, rate)?;
    Ok(scale * (h - 1.0 - gamma * (a - 1.0)) / (gamma * (gamma - 1.0)))
}

/// Checks `H_γ = 1 + γ(A-1) + γ(γ-1) D_{φ_γ}/c̃` and the two KL identities for one pair.
pub fn hellinger_identity_residual(gamma: f64, scale: f64, q: &[f64], p: &[f64]) -> Result<f64> {
    let a: f64 = q.iter().sum();
    let g = DivergenceGenerator::power(gamma, scale)?;
    let d = divergence(&g, q, p)?;
    if gamma == 1.0 {
        return Ok(modified_kl(q, p)? - (d / scale + a - 1.0));
    }
    if gamma == 0.0 {
        return Ok(modified_rev_kl(q, p)? - (d / scale + 1.0 - a));
    }
    let h = hellinger_integral(gamma, q, p)?;
    Ok(h - (1.0 + gamma * (a - 1.0) + gamma * (gamma - 1.0) * d / scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_example() {
        let r = min_over_m_closed(2.0, 1.0, &[0.25, 0.75], &[0.5, 0.5]).unwrap();
        assert!((r.value - 0.1).abs() < 1e-15);
        assert!((r.m - 0.8).abs() < 1e-15);
        let z = min_over_m_closed(0.5, 1.0, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!(z.value.abs() < 1e-15 && (z.m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn numeric_matches_closed() {
        let p = [0.2, 0.3, 0.5];
        let q = [0.9, 0.4, 0.3];
        for &g in &[-1.0, 0.0, 0.5, 1.0, 2.0, 3.0] {
            let gen = DivergenceGenerator::power(g, 1.3).unwrap();
            let c = min_over_m_closed(g, 1.3, &q, &p).unwrap();
            let n = min_over_m_numeric(&gen, &q, &p, 1e-14).unwrap();
            assert!((c.value - n.value).abs() < 1e-10, "gamma {g}: {c:?} vs {n:?}");
            assert!((c.m - n.m).abs() < 1e-8, "gamma {g}");
        }
    }

    #[test]
    fn inversion_example() {
        let d = power_divergence_from_rate(2.0, 1.0, 1.0, 0.25).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        for &g in &[-1.0, 0.0, 0.5, 1.0, 2.0, 3.0] {
            assert_eq!(power_divergence_from_rate(g, 1.0, 1.0, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_mass_for_quadratic() {
        let r = min_over_m_closed(2.0, 1.0, &[-0.5, -1.0], &[0.5, 0.5]).unwrap();
        let gen = DivergenceGenerator::power(2.0, 1.0).unwrap();
        let at = |m: f64| divergence(&gen, &[-0.5 * m, -m], &[0.5, 0.5]).unwrap();
        assert!((at(r.m) - r.value).abs() < 1e-14);
        assert!(at(r.m * 1.01) > r.value && at(r.m * 0.99) > r.value);
    }
}
