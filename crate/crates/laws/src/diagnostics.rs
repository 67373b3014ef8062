//! Empirical checks of a weight law: mean 1, log-MGF at interior points and
//! agreement of the closed-form block sum with summed single draws.

use serde::Serialize;

use bsim_core::numeric::{ks_critical, ks_statistic};

use crate::error::Result;
use crate::law::WeightLaw;
use crate::rng::{purpose, stream};

#[derive(Debug, Clone, Serialize)]
pub struct MgfCheck {
    pub z: f64,
    /// Empirical `E e^{zW}`.
    pub empirical: f64,
    /// `exp(Λ(z))`.
    pub exact: f64,
    pub stderr: f64,
    /// `(empirical - exact) / stderr`.
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanOneReport {
    pub law: String,
    pub draws: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `(mean - 1) / stderr`.
    pub score: f64,
    pub mgf: Vec<MgfCheck>,
}

impl MeanOneReport {
    /// Mean within `k` standard errors of 1 and every MGF check within `k_mgf`.
    pub fn passes(&self, k: f64, k_mgf: f64) -> bool {
        self.score.abs() <= k && self.mgf.iter().all(|m| m.score.abs() <= k_mgf)
    }
}

/// Draws `n` single weights and compares mean and MGF values with their exact values.
///
/// Each `z` should satisfy `2z ∈ ]λ_-, λ_+[` so that the MGF estimate has finite variance.
pub fn check_mean_one(law: &WeightLaw, n: usize, zs: &[f64], seed: u64) -> Result<MeanOneReport> {
    let sampler = law.sampler()?;
    let mut rng = stream(seed, purpose::DIAGNOSTIC, 0);
    let draws: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
    let nf = n as f64;
    let mean = draws.iter().sum::<f64>() / nf;
    let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let stderr = (var / nf).sqrt();
    let mut mgf = Vec::with_capacity(zs.len());
    for &z in zs {
        let vals: Vec<f64> = draws.iter().map(|x| (z * x).exp()).collect();
        let m = vals.iter().sum::<f64>() / nf;
        let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (nf - 1.0);
        let se = (v / nf).sqrt();
        let exact = law.log_mgf(z)?.exp();
        mgf.push(MgfCheck { z, empirical: m, exact, stderr: se, score: (m - exact) / se });
    }
    Ok(MeanOneReport {
        law: law.name().to_string(),
        draws: n,
        mean,
        stderr,
        score: (mean - 1.0) / stderr,
        mgf,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KsReport {
    pub law: String,
    pub block: u64,
    pub draws: usize,
    pub statistic: f64,
    pub critical: f64,
}

impl KsReport {
    pub fn passes(&self) -> bool {
        self.statistic <= self.critical
    }
}

/// Two-sample Kolmogorov-Smirnov test of the closed-form block sum of `block`
/// weights against the sum of `block` single draws, `n` samples each.
///
/// Both samples are snapped to a `1e-9` grid first: lattice atoms reached by
/// different float summation orders must compare equal.
pub fn convolution_ks(law: &WeightLaw, block: u64, n: usize, alpha: f64, seed: u64) -> Result<KsReport> {
    let direct = law.block(block as f64, 0.0)?;
    let single = law.sampler()?;
    let mut r1 = stream(seed, purpose::DIAGNOSTIC, 1);
    let mut r2 = stream(seed, purpose::DIAGNOSTIC, 2);
    let snap = |x: f64| (x * 1e9).round() / 1e9;
    let a: Vec<f64> = (0..n).map(|_| snap(direct.sample(&mut r1))).collect();
    let b: Vec<f64> = (0..n)
        .map(|_| snap((0..block).map(|_| single.sample(&mut r2)).sum::<f64>()))
        .collect();
    Ok(KsReport {
        law: law.name().to_string(),
        block,
        draws: n,
        statistic: ks_statistic(&a, &b),
        critical: ks_critical(alpha, n, n),
    })
}
