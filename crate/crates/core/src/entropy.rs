//! Entropy and diversity families expressed through power sums `Σ q_k^γ`
//! or through `Σ q_k log q_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether optimizing the associated power divergence yields the minimum or
/// the maximum of the entropy over a constraint set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Min,
    Max,
}

/// Parametrized families and their named presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntropyFamily {
    /// `c1 ((Σ q^γ)^{c2} - c3)`.
    Generalized { gamma: f64, c1: f64, c2: f64, c3: f64 },
    /// `(c4 / f'(0)) log Σ q^γ`.
    RenyiType { gamma: f64, c4: f64, fprime0: f64 },
    GammaNorm { gamma: f64 },
    Hill { gamma: f64 },
    HavrdaCharvat { gamma: f64 },
    /// Parametrized by `γ̃`; the power is `γ = 1/γ̃`.
    Arimoto { gamma_tilde: f64 },
    SharmaMittal1 { gamma: f64, s: f64 },
    /// Power `γ = s + 1`.
    PatilTaillie { s: f64 },
    Renyi { gamma: f64 },
    Shannon,
    SharmaMittal2 { s: f64 },
}

/// A family reduced to one of the four evaluation shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved {
    Power { gamma: f64, c1: f64, c2: f64, c3: f64 },
    Log { gamma: f64, c4: f64, fprime0: f64 },
    Shannon,
    SharmaMittal2 { s: f64 },
}

impl EntropyFamily {
    pub fn resolve(&self) -> Result<Resolved> {
        use EntropyFamily::*;
        let r = match *self {
            Generalized { gamma, c1, c2, c3 } => Resolved::Power { gamma, c1, c2, c3 },
            RenyiType { gamma, c4, fprime0 } => Resolved::Log { gamma, c4, fprime0 },
            GammaNorm { gamma } => Resolved::Power { gamma, c1: 1.0, c2: 1.0 / gamma, c3: 0.0 },
            Hill { gamma } => Resolved::Power { gamma, c1: 1.0, c2: 1.0 / (gamma - 1.0), c3: 0.0 },
            HavrdaCharvat { gamma } => Resolved::Power {
                gamma,
                c1: 1.0 / (2f64.powf(1.0 - gamma) - 1.0),
                c2: 1.0,
                c3: 1.0,
            },
            Arimoto { gamma_tilde } => Resolved::Power {
                gamma: 1.0 / gamma_tilde,
                c1: 1.0 / (gamma_tilde - 1.0),
                c2: gamma_tilde,
                c3: 1.0,
            },
            SharmaMittal1 { gamma, s } => {
                if s == 1.0 {
                    return Err(Error::Parameter("Sharma-Mittal needs s != 1".into()));
                }
                Resolved::Power { gamma, c1: 1.0 / (1.0 - s), c2: (1.0 - s) / (1.0 - gamma), c3: 1.0 }
            }
            PatilTaillie { s } => {
                if s == 0.0 {
                    return Err(Error::Parameter("Patil-Taillie needs s != 0".into()));
                }
                Resolved::Power { gamma: s + 1.0, c1: -1.0 / s, c2: 1.0, c3: 1.0 }
            }
            Renyi { gamma } => Resolved::Log { gamma, c4: 1.0 / (1.0 - gamma), fprime0: 1.0 },
            Shannon => Resolved::Shannon,
            SharmaMittal2 { s } => {
                if !(s > 0.0 && s != 1.0 && s.is_finite()) {
                    return Err(Error::Parameter("Sharma-Mittal (second type) needs s in ]0,1[ U ]1,inf[".into()));
                }
                Resolved::SharmaMittal2 { s }
            }
        };
        match r {
            Resolved::Power { gamma, c1, c2, c3 } => {
                if !(gamma.is_finite() && c1.is_finite() && c2.is_finite() && c3.is_finite()) {
                    return Err(Error::Parameter("non-finite entropy parameter".into()));
                }
                if c1 * c2 == 0.0 || gamma == 0.0 || gamma == 1.0 {
                    return Err(Error::Parameter(format!(
                        "need c1*c2 != 0 and gamma not in {{0,1}}, got gamma={gamma}, c1={c1}, c2={c2}"
                    )));
                }
            }
            Resolved::Log { gamma, c4, fprime0 } => {
                if !(gamma.is_finite() && c4.is_finite() && fprime0.is_finite())
                    || c4 == 0.0
                    || fprime0 == 0.0
                    || gamma == 0.0
                    || gamma == 1.0
                {
                    return Err(Error::Parameter("need finite nonzero c4, f'(0), gamma not in {0,1}".into()));
                }
            }
            _ => {}
        }
        Ok(r)
    }

    /// Power `γ` of the divergence generator whose optimization yields this entropy.
    pub fn generator_gamma(&self) -> Result<f64> {
        Ok(match self.resolve()? {
            Resolved::Power { gamma, .. } | Resolved::Log { gamma, .. } => gamma,
            Resolved::Shannon | Resolved::SharmaMittal2 { .. } => 1.0,
        })
    }

    /// Direction obtained by minimizing the power divergence to the uniform vector.
    pub fn extremum(&self) -> Result<Extremum> {
        let sign = match self.resolve()? {
            Resolved::Power { gamma, c1, c2, .. } => c1 * c2 * gamma * (gamma - 1.0),
            Resolved::Log { gamma, c4, fprime0 } => c4 / fprime0 * gamma * (gamma - 1.0),
            Resolved::Shannon | Resolved::SharmaMittal2 { .. } => -1.0,
        };
        Ok(if sign > 0.0 { Extremum::Min } else { Extremum::Max })
    }

    /// Entropy value from the power sum `S = Σ q^γ`.
    pub fn from_power_sum(&self, s: f64) -> Result<f64> {
        match self.resolve()? {
            Resolved::Power { c1, c2, c3, .. } => {
                if s < 0.0 {
                    return Err(Error::Domain(format!("power sum {s} < 0")));
                }
                Ok(c1 * (s.powf(c2) - c3))
            }
            Resolved::Log { c4, fprime0, .. } => {
                if s <= 0.0 {
                    return Err(Error::Domain(format!("power sum {s} <= 0")));
                }
                Ok(c4 / fprime0 * s.ln())
            }
            _ => Err(Error::Parameter("family is not of power-sum type".into())),
        }
    }

    /// Entropy value from `y = Σ q log q`.
    pub fn from_xlogx(&self, y: f64) -> Result<f64> {
        match self.resolve()? {
            Resolved::Shannon => Ok(-y),
            Resolved::SharmaMittal2 { s } => Ok((((s - 1.0) * y).exp() - 1.0) / (1.0 - s)),
            _ => Err(Error::Parameter("family is not of Shannon type".into())),
        }
    }
}

/// Evaluates an entropy family at a nonnegative vector.
pub fn entropy(family: &EntropyFamily, q: &[f64]) -> Result<f64> {
    if q.is_empty() {
        return Err(Error::Parameter("Q must be non-empty".into()));
    }
    if let Some(x) = q.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Inadmissible(format!("entry {x} is not finite and >= 0")));
    }
    match family.resolve()? {
        Resolved::Power { gamma, .. } | Resolved::Log { gamma, .. } => {
            if gamma <= 0.0 && q.iter().any(|&x| x == 0.0) {
                return Err(Error::Inadmissible("zero entry with gamma <= 0".into()));
            }
            let s: f64 = q.iter().filter(|&&x| x > 0.0).map(|x| x.powf(gamma)).sum();
            family.from_power_sum(s)
        }
        Resolved::Shannon | Resolved::SharmaMittal2 { .. } => {
            let y: f64 = q.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum();
            family.from_xlogx(y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let sh = entropy(&EntropyFamily::Shannon, &[0.25; 4]).unwrap();
        assert!((sh - 4f64.ln()).abs() < 1e-15);
        let hc = entropy(&EntropyFamily::HavrdaCharvat { gamma: 2.0 }, &[1.0, 0.0]).unwrap();
        assert_eq!(hc, 0.0);
        let n2 = entropy(&EntropyFamily::GammaNorm { gamma: 2.0 }, &[0.6, 0.8]).unwrap();
        assert!((n2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn presets_agree_with_direct_formulas() {
        let q = [0.1, 0.2, 0.3, 0.4];
        let ps = |g: f64| q.iter().map(|x: &f64| x.powf(g)).sum::<f64>();
        let xl: f64 = q.iter().map(|x| x * x.ln()).sum();
        let r = entropy(&EntropyFamily::Renyi { gamma: 2.0 }, &q).unwrap();
        assert!((r + ps(2.0).ln()).abs() < 1e-14);
        let hill = entropy(&EntropyFamily::Hill { gamma: 3.0 }, &q).unwrap();
        assert!((hill - ps(3.0).powf(0.5)).abs() < 1e-14);
        let ar = entropy(&EntropyFamily::Arimoto { gamma_tilde: 2.0 }, &q).unwrap();
        assert!((ar - (ps(0.5).powi(2) - 1.0)).abs() < 1e-14);
        let pt = entropy(&EntropyFamily::PatilTaillie { s: 1.0 }, &q).unwrap();
        assert!((pt - (1.0 - ps(2.0))).abs() < 1e-14);
        let sm1 = entropy(&EntropyFamily::SharmaMittal1 { gamma: 2.0, s: 0.5 }, &q).unwrap();
        assert!((sm1 - 2.0 * (ps(2.0).powf(-0.5) - 1.0)).abs() < 1e-14);
        let sm2 = entropy(&EntropyFamily::SharmaMittal2 { s: 2.0 }, &q).unwrap();
        assert!((sm2 - ((xl).exp() - 1.0) / -1.0).abs() < 1e-14);
    }

    #[test]
    fn directions() {
        assert_eq!(EntropyFamily::Shannon.extremum().unwrap(), Extremum::Max);
        assert_eq!(EntropyFamily::GammaNorm { gamma: 2.0 }.extremum().unwrap(), Extremum::Min);
        assert_eq!(EntropyFamily::GammaNorm { gamma: 0.5 }.extremum().unwrap(), Extremum::Max);
        assert_eq!(EntropyFamily::HavrdaCharvat { gamma: -1.0 }.extremum().unwrap(), Extremum::Min);
        assert_eq!(EntropyFamily::Renyi { gamma: 3.0 }.extremum().unwrap(), Extremum::Max);
        assert_eq!(EntropyFamily::Hill { gamma: -1.0 }.extremum().unwrap(), Extremum::Max);
        assert!(EntropyFamily::SharmaMittal1 { gamma: 2.0, s: 1.0 }.resolve().is_err());
    }
}
