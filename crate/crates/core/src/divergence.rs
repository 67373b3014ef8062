//! φ-divergences, Hellinger integrals, Kullback-Leibler informations and
//! Rényi-type transforms.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::generator::DivergenceGenerator;
use crate::vector::ProbVector;

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(Error::Inadmissible(format!("{name} has non-finite entry {x}"))),
        None => Ok(()),
    }
}

/// `D_φ(Q, P) = Σ p_k φ(q_k / p_k)`.
///
/// Conventions: a term with `p_k = q_k = 0` is 0; a term with `p_k = 0 ≠ q_k`
/// is `|q_k|` times the asymptotic slope of φ in the direction of `q_k`.
pub fn divergence(gen: &DivergenceGenerator, q: &[f64], p: &[f64]) -> Result<f64> {
    check_len(p.len(), q.len())?;
    check_finite("Q", q)?;
    check_finite("P", p)?;
    if let Some(x) = p.iter().find(|x| **x < 0.0) {
        return Err(Error::Inadmissible(format!("P has negative entry {x}")));
    }
    let (lm, lp) = gen.lambda_bounds();
    let mut sum = 0.0;
    for (&qk, &pk) in q.iter().zip(p) {
        let term = if pk > 0.0 {
            let v = gen.phi(qk / pk);
            if v == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            pk * v
        } else if qk == 0.0 {
            0.0
        } else {
            let slope = if qk > 0.0 { lp } else { -lm };
            if slope == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            qk.abs() * slope
        };
        sum += term;
    }
    Ok(sum)
}

/// Weighted divergence `Σ c_k p_k φ(q_k / p_k)`, computed as `D_φ(Q∘c, P∘c)`.
pub fn weighted_divergence(
    gen: &DivergenceGenerator,
    q: &[f64],
    p: &[f64],
    c: &[f64],
) -> Result<f64> {
    check_len(p.len(), c.len())?;
    if let Some(x) = c.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Parameter(format!("weight {x} is not positive")));
    }
    let qc: Vec<f64> = q.iter().zip(c).map(|(a, b)| a * b).collect();
    let pc: Vec<f64> = p.iter().zip(c).map(|(a, b)| a * b).collect();
    divergence(gen, &qc, &pc)
}

/// Splits `P` into its probability direction `p̃ = P / M_P` and its mass `M_P`.
pub fn normalize_bs1(p: &[f64]) -> Result<(ProbVector, f64)> {
    check_finite("P", p)?;
    if p.is_empty() {
        return Err(Error::Parameter("P must be non-empty".into()));
    }
    if let Some(x) = p.iter().find(|x| **x < 0.0) {
        return Err(Error::Inadmissible(format!("P has negative entry {x}")));
    }
    let m: f64 = p.iter().sum();
    if m <= 0.0 {
        return Err(Error::Inadmissible("P is identically zero".into()));
    }
    let mut pt: Vec<f64> = p.iter().map(|x| x / m).collect();
    // absorb rounding so the sum check is exact to machine precision
    let s: f64 = pt.iter().sum();
    if let Some(last) = pt.iter_mut().rev().find(|x| **x > 0.0) {
        *last += 1.0 - s;
        *last = last.max(0.0);
    }
    Ok((ProbVector::new(pt)?, m))
}

/// Hellinger integral `H_γ(Q, P) = Σ q_k^γ p_k^{1-γ}`.
///
/// Requires `P > 0`; `Q >= 0` (strictly positive for `γ <= 0`); negative
/// entries of `Q` are admitted only for `γ = 2`.
pub fn hellinger_integral(gamma: f64, q: &[f64], p: &[f64]) -> Result<f64> {
    check_len(p.len(), q.len())?;
    check_finite("Q", q)?;
    check_finite("P", p)?;
    if !gamma.is_finite() {
        return Err(Error::Parameter("gamma must be finite".into()));
    }
    if let Some(x) = p.iter().find(|x| **x <= 0.0) {
        return Err(Error::Inadmissible(format!("P must be positive, found {x}")));
    }
    let mut sum = 0.0;
    for (&qk, &pk) in q.iter().zip(p) {
        if gamma == 2.0 {
            sum += qk * qk / pk;
            continue;
        }
        if qk < 0.0 || (qk == 0.0 && gamma <= 0.0) {
            return Err(Error::Inadmissible(format!(
                "entry q = {qk} not admissible for gamma = {gamma}"
            )));
        }
        if qk > 0.0 {
            sum += qk.powf(gamma) * pk.powf(1.0 - gamma);
        }
    }
    Ok(sum)
}

/// Modified Kullback-Leibler information `I(Q, P) = Σ q_k log(q_k / p_k)`; `Q >= 0`, `P > 0`.
pub fn modified_kl(q: &[f64], p: &[f64]) -> Result<f64> {
    check_len(p.len(), q.len())?;
    check_finite("Q", q)?;
    check_finite("P", p)?;
    let mut sum = 0.0;
    for (&qk, &pk) in q.iter().zip(p) {
        if qk < 0.0 || pk <= 0.0 {
            return Err(Error::Inadmissible(format!("(q, p) = ({qk}, {pk})")));
        }
        if qk > 0.0 {
            sum += qk * (qk / pk).ln();
        }
    }
    Ok(sum)
}

/// Modified reverse Kullback-Leibler information `Ĩ(Q, P) = Σ p_k log(p_k / q_k)`; `Q > 0`, `P >= 0`.
pub fn modified_rev_kl(q: &[f64], p: &[f64]) -> Result<f64> {
    check_len(p.len(), q.len())?;
    check_finite("Q", q)?;
    check_finite("P", p)?;
    let mut sum = 0.0;
    for (&qk, &pk) in q.iter().zip(p) {
        if qk <= 0.0 || pk < 0.0 {
            return Err(Error::Inadmissible(format!("(q, p) = ({qk}, {pk})")));
        }
        if pk > 0.0 {
            sum += pk * (pk / qk).ln();
        }
    }
    Ok(sum)
}

/// Rényi divergence `log H_γ / (γ(γ-1))`, `γ ∉ {0, 1}`.
pub fn renyi(gamma: f64, q: &[f64], p: &[f64]) -> Result<f64> {
    if gamma == 0.0 || gamma == 1.0 {
        return Err(Error::Parameter("gamma must differ from 0 and 1".into()));
    }
    let h = hellinger_integral(gamma, q, p)?;
    if h <= 0.0 {
        return Err(Error::Domain(format!("Hellinger integral {h} is not positive")));
    }
    Ok(h.ln() / (gamma * (gamma - 1.0)))
}

/// Monotone transforms applied to a Hellinger integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HTransform {
    /// `c1 (y^{c2} - c3)`.
    Power { c1: f64, c2: f64, c3: f64 },
    /// `(c4 / f'(0)) log y`.
    Log { c4: f64, fprime0: f64 },
    /// `c5 arccos(y)^{c6}`, defined for `y <= 1`.
    Arccos { c5: f64, c6: f64 },
    /// `c7 log(1 - (1 - y)/ν) / log(1 - 1/ν)`, `ν ∈ ]-inf,0[ ∪ ]1,inf[`.
    LogRatio { c7: f64, nu: f64 },
}

impl HTransform {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HTransform::Power { c1, c2, c3 } => {
                if !(c1.is_finite() && c2.is_finite() && c3.is_finite()) || c1 * c2 == 0.0 {
                    return Err(Error::Parameter("need finite c1, c2, c3 with c1*c2 != 0".into()));
                }
            }
            HTransform::Log { c4, fprime0 } => {
                if !(c4.is_finite() && fprime0.is_finite()) || c4 == 0.0 || fprime0 == 0.0 {
                    return Err(Error::Parameter("need nonzero finite c4 and f'(0)".into()));
                }
            }
            HTransform::Arccos { c5, c6 } => {
                if !(c5 > 0.0 && c6 > 0.0 && c5.is_finite() && c6.is_finite()) {
                    return Err(Error::Parameter("need c5, c6 > 0".into()));
                }
            }
            HTransform::LogRatio { c7, nu } => {
                if !(c7 > 0.0 && c7.is_finite()) || !(nu < 0.0 || nu > 1.0) || !nu.is_finite() {
                    return Err(Error::Parameter("need c7 > 0 and nu in ]-inf,0[ U ]1,inf[".into()));
                }
            }
        }
        Ok(())
    }

    /// Applies the transform to `y = H_γ`.
    pub fn apply(&self, y: f64) -> Result<f64> {
        self.validate()?;
        match *self {
            HTransform::Power { c1, c2, c3 } => {
                if y < 0.0 {
                    return Err(Error::Domain(format!("y = {y} < 0")));
                }
                Ok(c1 * (y.powf(c2) - c3))
            }
            HTransform::Log { c4, fprime0 } => {
                if y <= 0.0 {
                    return Err(Error::Domain(format!("log of y = {y}")));
                }
                Ok(c4 / fprime0 * y.ln())
            }
            HTransform::Arccos { c5, c6 } => {
                if !(-1.0..=1.0).contains(&y) {
                    return Err(Error::Domain(format!("arccos needs |y| <= 1, got {y}")));
                }
                Ok(c5 * y.acos().powf(c6))
            }
            HTransform::LogRatio { c7, nu } => {
                let inner = 1.0 - (1.0 - y) / nu;
                if inner <= 0.0 {
                    return Err(Error::Domain(format!("log argument {inner} <= 0")));
                }
                Ok(c7 * inner.ln() / (1.0 - 1.0 / nu).ln())
            }
        }
    }
}

/// `h(H_γ(Q, P))` for one of the [`HTransform`] families.
pub fn renyi_transform(h: &HTransform, gamma: f64, q: &[f64], p: &[f64]) -> Result<f64> {
    h.apply(hellinger_integral(gamma, q, p)?)
}

/// Escort-based Rényi form of order `ν/ν1` on strictly positive vectors.
pub fn escort_renyi(nu1: f64, nu: f64, q: &[f64], p: &[f64]) -> Result<f64> {
    check_len(p.len(), q.len())?;
    if !(nu1 > 0.0 && nu1.is_finite() && nu.is_finite()) || nu == nu1 || nu == 0.0 {
        return Err(Error::Parameter(format!("bad escort parameters nu1 = {nu1}, nu = {nu}")));
    }
    if q.iter().chain(p).any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Inadmissible("escort form needs strictly positive vectors".into()));
    }
    let mixed: f64 = q.iter().zip(p).map(|(a, b)| a.powf(nu) * b.powf(nu1 - nu)).sum();
    let sq: f64 = q.iter().map(|a| a.powf(nu1)).sum();
    let sp: f64 = p.iter().map(|b| b.powf(nu1)).sum();
    let d = nu - nu1;
    Ok(nu1 / d * mixed.ln() - nu / d * sq.ln() + sp.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(g: f64) -> DivergenceGenerator {
        DivergenceGenerator::power(g, 1.0).unwrap()
    }

    #[test]
    fn divergence_examples() {
        let p = [0.5, 0.5];
        assert_eq!(divergence(&pw(2.0), &p, &p).unwrap(), 0.0);
        assert!((divergence(&pw(2.0), &[1.0, 0.0], &p).unwrap() - 0.5).abs() < 1e-15);
        let kl = divergence(&pw(1.0), &[0.25, 0.75], &p).unwrap();
        assert!((kl - 0.130812).abs() < 5e-7, "{kl}");
        let w = weighted_divergence(&pw(2.0), &[1.0, 0.0], &p, &[2.0, 2.0]).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_conventions() {
        // p = 0, q = 0 contributes nothing
        assert_eq!(divergence(&pw(1.0), &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        // p = 0 < q uses the asymptotic slope
        let d = divergence(&pw(0.5), &[1.0, 0.5], &[1.0, 0.0]).unwrap();
        assert!((d - 0.5 * 2.0).abs() < 1e-15);
        assert_eq!(divergence(&pw(1.0), &[1.0, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        let g3 = DivergenceGenerator::power(3.0, 1.0).unwrap();
        let d3 = divergence(&g3, &[1.0, -2.0], &[1.0, 0.0]).unwrap();
        assert!((d3 - 2.0 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn normalization() {
        let (pt, m) = normalize_bs1(&[2.0, 3.0, 5.0]).unwrap();
        assert_eq!(m, 10.0);
        assert_eq!(pt.values(), &[0.2, 0.3, 0.5]);
        let (u, m4) = normalize_bs1(&[1.0; 4]).unwrap();
        assert_eq!(m4, 4.0);
        assert_eq!(u.values(), &[0.25; 4]);
        assert!(normalize_bs1(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn hellinger_examples() {
        let p = [0.5, 0.5];
        let h = hellinger_integral(0.5, &[1.0, 0.0], &p).unwrap();
        assert!((h - 0.707107).abs() < 1e-6);
        assert!((hellinger_integral(2.0, &[0.25, 0.75], &p).unwrap() - 1.25).abs() < 1e-15);
        assert!((hellinger_integral(0.3, &p, &p).unwrap() - 1.0).abs() < 1e-15);
        assert!(hellinger_integral(0.0, &[1.0, 0.0], &p).is_err());
    }

    #[test]
    fn kl_examples() {
        let p = [0.5, 0.5];
        assert_eq!(modified_kl(&p, &p).unwrap(), 0.0);
        assert_eq!(modified_rev_kl(&p, &p).unwrap(), 0.0);
        assert!((modified_kl(&[0.25, 0.75], &p).unwrap() - 0.130812).abs() < 5e-7);
        assert!((modified_kl(&[1.0, 1.0], &p).unwrap() - 1.386294).abs() < 5e-7);
    }

    #[test]
    fn renyi_examples() {
        let p = [0.5, 0.5];
        let r = renyi(0.5, &[1.0, 0.0], &p).unwrap();
        assert!((r - 1.386294).abs() < 5e-7, "{r}");
        assert!(renyi(2.0, &p, &p).unwrap().abs() < 1e-15);
        let b = renyi_transform(&HTransform::Arccos { c5: 1.0, c6: 1.0 }, 0.5, &[1.0, 0.0], &p)
            .unwrap();
        assert!((b - 0.785398).abs() < 5e-7);
        assert!(HTransform::Arccos { c5: 1.0, c6: 1.0 }.apply(1.2).is_err());
        let lr = HTransform::LogRatio { c7: 1.0, nu: 2.0 };
        assert!(lr.apply(1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn escort_vanishes_on_diagonal() {
        let p = [0.2, 0.3, 0.5];
        assert!(escort_renyi(0.4, 1.0, &p, &p).unwrap().abs() < 1e-14);
        assert!(escort_renyi(0.4, 1.0, &[0.5, 0.25, 0.25], &p).unwrap() > 0.0);
    }
}
