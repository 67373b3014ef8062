//! Naive and importance-sampling estimators of `Π = P(ξ ∈ Ω)` and the
//! divergence rate `-(1/n) log Π`.
//!
//! Replication `ℓ` always draws from stream `(seed, REPLICATION, ℓ)`. The
//! replications are cut into a fixed number of contiguous batches, each run
//! sequentially; batches are combined in index order. Results are therefore
//! bit-identical for any thread count.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use bsim_core::scaling::{m_root, min_over_m_numeric};
use bsim_core::{divergence, normalize_bs1, DivergenceGenerator};
use bsim_laws::rng::{purpose, stream};
use bsim_laws::WeightLaw;

use crate::constraint::ConstraintSet;
use crate::error::{EngineError, Result};
use crate::partition::{normalize_sums, partition, BlockPartition};
use crate::simlaw::SimulationLaw;

/// Tolerance of the bisection for the optimal scaling `m`.
pub const M_TOL: f64 = 1e-10;

/// Which random vector is tested against Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `ξ = S / n`; the rate is `inf_Ω D(Q, P)`.
    #[default]
    Deterministic,
    /// `ξ = A·S / ΣS`; the rate is `inf_Ω inf_m D(mQ, P)`.
    Normalized,
}

/// Serde for `f64` fields that may be infinite or NaN: such values are
/// written as the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// Everything the estimators need about one problem.
#[derive(Clone)]
pub struct BsSetup {
    gen: DivergenceGenerator,
    law: Arc<dyn SimulationLaw>,
    weight_law: Option<WeightLaw>,
    p: Vec<f64>,
    p_tilde: Vec<f64>,
    mass: f64,
    omega: ConstraintSet,
    mode: Mode,
    sample: Option<BlockPartition>,
}

impl std::fmt::Debug for BsSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BsSetup")
            .field("gen", &self.gen.name())
            .field("law", &self.law.name())
            .field("p", &self.p)
            .field("omega", &self.omega)
            .field("mode", &self.mode)
            .finish()
    }
}

impl BsSetup {
    /// Setup with the closed-form law of `gen`. In normalized mode `p` is
    /// rescaled to a probability vector.
    pub fn new(gen: DivergenceGenerator, p: Vec<f64>, omega: ConstraintSet, mode: Mode) -> Result<Self> {
        let law = WeightLaw::for_generator(&gen)?;
        let mut s = Self::with_law(gen, Arc::new(law), p, omega, mode)?;
        s.weight_law = Some(law);
        Ok(s)
    }

    /// Setup with a caller-supplied law; its cumulant function must be the
    /// conjugate of `gen`.
    pub fn with_law(
        gen: DivergenceGenerator,
        law: Arc<dyn SimulationLaw>,
        p: Vec<f64>,
        omega: ConstraintSet,
        mode: Mode,
    ) -> Result<Self> {
        if p.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(EngineError::Config("P must be finite and strictly positive".into()));
        }
        omega.validate(p.len())?;
        let (pt, mass) = normalize_bs1(&p)?;
        let p_tilde = pt.values().to_vec();
        let (p, mass) = match mode {
            Mode::Deterministic => (p, mass),
            Mode::Normalized => (p_tilde.clone(), 1.0),
        };
        Ok(Self { gen, law, weight_law: None, p, p_tilde, mass, omega, mode, sample: None })
    }

    /// Statistical setup: normalized mode with `P` the empirical frequencies
    /// of an observed sample; `n` is the sample size.
    pub fn from_sample(gen: DivergenceGenerator, sample: BlockPartition, omega: ConstraintSet) -> Result<Self> {
        let mut s = Self::new(gen, sample.reference().to_vec(), omega, Mode::Normalized)?;
        s.sample = Some(sample);
        Ok(s)
    }

    pub fn with_sample_law(mut self, law: Arc<dyn SimulationLaw>) -> Self {
        self.law = law;
        self.weight_law = None;
        self
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn generator(&self) -> &DivergenceGenerator {
        &self.gen
    }

    pub fn law(&self) -> &Arc<dyn SimulationLaw> {
        &self.law
    }

    /// The closed-form law, when the setup uses one.
    pub fn weight_law(&self) -> Option<&WeightLaw> {
        self.weight_law.as_ref()
    }

    /// `P` in the units of the divergence.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn p_tilde(&self) -> &[f64] {
        &self.p_tilde
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> &ConstraintSet {
        &self.omega
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn sample(&self) -> Option<&BlockPartition> {
        self.sample.as_ref()
    }

    /// Partition for sample size `n`; the observed one in statistical mode.
    pub fn partition(&self, n: usize) -> Result<BlockPartition> {
        match &self.sample {
            Some(s) => Ok(s.clone()),
            None => partition(&self.p_tilde, n),
        }
    }

    /// Block convolution powers `ν_k = n_k · M`.
    pub fn block_counts(&self, part: &BlockPartition) -> Vec<f64> {
        part.sizes().iter().map(|&s| s as f64 * self.mass).collect()
    }

    /// The point tested against Ω for block sums `sums`; `None` for a zero total.
    pub fn point(&self, sums: &[f64], n: usize) -> Option<Vec<f64>> {
        match self.mode {
            Mode::Deterministic => Some(sums.iter().map(|s| s / n as f64).collect()),
            Mode::Normalized => {
                let a = self.omega.scale();
                normalize_sums(sums).map(|v| v.into_iter().map(|x| a * x).collect())
            }
        }
    }

    pub fn member(&self, sums: &[f64], n: usize) -> bool {
        self.point(sums, n).is_some_and(|x| self.omega.contains(&x))
    }

    /// The function whose infimum over Ω is the rate: `D(Q, P)`, or
    /// `inf_m D(mQ, P)` in normalized mode. `+inf` where undefined.
    pub fn objective(&self, q: &[f64]) -> f64 {
        let v = match self.mode {
            Mode::Deterministic => divergence(&self.gen, q, &self.p).ok(),
            Mode::Normalized => min_over_m_numeric(&self.gen, q, &self.p, M_TOL).ok().map(|r| r.value),
        };
        match v {
            Some(x) if !x.is_nan() => x,
            _ => f64::INFINITY,
        }
    }

    /// Tilts `τ_k = φ′(m q_k / p_k)` toward the dominating point `q`, with
    /// `m = 1` in deterministic mode and the optimal scaling otherwise.
    pub fn tilts(&self, q: &[f64]) -> Result<(Vec<f64>, Option<f64>)> {
        if q.len() != self.k() {
            return Err(EngineError::Proxy(format!("dominating point has length {}, expected {}", q.len(), self.k())));
        }
        let m = match self.mode {
            Mode::Deterministic => None,
            Mode::Normalized => Some(m_root(&self.gen, q, &self.p, M_TOL)?),
        };
        let s = m.unwrap_or(1.0);
        let taus = q
            .iter()
            .zip(&self.p)
            .map(|(qk, pk)| {
                self.gen.phi_prime(s * qk / pk).map_err(|e| {
                    EngineError::Proxy(format!("no tilt toward q = {qk} (p = {pk}): {e}"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((taus, m))
    }
}

fn default_batches() -> usize {
    32
}

/// Parameters of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub replications: u64,
    pub seed: u64,
    /// Fixed number of work units; independent of the thread count.
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl SimConfig {
    pub fn new(n: usize, replications: u64, seed: u64) -> Self {
        Self { n, replications, seed, batches: default_batches(), threads: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(EngineError::Config("replications must be >= 1".into()));
        }
        if self.batches == 0 {
            return Err(EngineError::Config("batches must be >= 1".into()));
        }
        if self.threads == Some(0) {
            return Err(EngineError::Config("threads must be >= 1".into()));
        }
        Ok(())
    }
}

/// Runs `f` over contiguous index ranges covering `0..total`, in parallel,
/// returning per-range results in range order.
pub(crate) fn par_batches<T, F>(total: u64, batches: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync + Send,
{
    let b = (batches as u64).min(total).max(1);
    let ranges: Vec<std::ops::Range<u64>> =
        (0..b).map(|i| (i * total / b)..((i + 1) * total / b)).collect();
    let run = || ranges.into_par_iter().map(&f).collect::<Vec<T>>();
    match threads {
        None => Ok(run()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| EngineError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(run))
        }
    }
}

/// Online log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    fn merge(&mut self, other: LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Per-batch hit count and log-sum of the hit weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub replications: u64,
    pub hits: u64,
    #[serde(with = "ext_f64")]
    pub log_weight_sum: f64,
}

/// Result of one run. Infinite and NaN values serialize as strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub n: usize,
    pub replications: u64,
    pub hits: u64,
    pub block_sizes: Vec<usize>,
    pub tilts: Vec<f64>,
    #[serde(default)]
    pub dominating_point: Option<Vec<f64>>,
    #[serde(default)]
    pub scaling: Option<f64>,
    #[serde(with = "ext_f64")]
    pub log_pi: f64,
    pub pi: f64,
    #[serde(with = "ext_f64")]
    pub pi_stderr: f64,
    /// Standard error of `Π̂` relative to `Π̂`, i.e. of `log Π̂` to first order.
    #[serde(with = "ext_f64")]
    pub relative_stderr: f64,
    #[serde(with = "ext_f64")]
    pub rate: f64,
    #[serde(with = "ext_f64")]
    pub rate_stderr: f64,
    /// The requested target; the rate until inverted.
    #[serde(with = "ext_f64")]
    pub value: f64,
    #[serde(with = "ext_f64")]
    pub value_stderr: f64,
    pub target: String,
    /// Kish effective sample size of the hit weights.
    #[serde(with = "ext_f64")]
    pub effective_sample_size: f64,
    /// 95% upper bound `3/L` on `Π` when nothing was hit.
    #[serde(default)]
    pub zero_hit_bound: Option<f64>,
    pub warnings: Vec<String>,
    pub batches: Vec<BatchSummary>,
}

/// Simulates `L` replications of the block sums tilted by `taus` (all zero
/// for the naive estimator) and averages the importance-sampling weights of
/// the hits.
pub fn simulate(setup: &BsSetup, taus: &[f64], cfg: &SimConfig) -> Result<Estimate> {
    cfg.validate()?;
    if taus.len() != setup.k() {
        return Err(EngineError::Config(format!("{} tilts for K = {}", taus.len(), setup.k())));
    }
    let part = setup.partition(cfg.n)?;
    let n = part.n();
    let nus = setup.block_counts(&part);
    let draws = nus
        .iter()
        .zip(taus)
        .map(|(&nu, &tau)| setup.law.block(nu, tau))
        .collect::<Result<Vec<_>>>()?;
    let results = par_batches(cfg.replications, cfg.batches, cfg.threads, |range| {
        let mut hits = 0u64;
        let mut lw = LogSum::new();
        let mut lw2 = LogSum::new();
        let mut sums = vec![0.0; draws.len()];
        let count = range.end - range.start;
        for l in range {
            let mut rng = stream(cfg.seed, purpose::REPLICATION, l);
            let mut logw = 0.0;
            for (s, d) in sums.iter_mut().zip(&draws) {
                *s = d.sample(&mut rng);
                logw += d.log_isf(*s);
            }
            if setup.member(&sums, n) {
                hits += 1;
                lw.push(logw);
                lw2.push(2.0 * logw);
            }
        }
        (count, hits, lw, lw2)
    })?;

    let mut total = LogSum::new();
    let mut total2 = LogSum::new();
    let mut hits = 0;
    let mut batches = Vec::with_capacity(results.len());
    for (count, h, lw, lw2) in results {
        hits += h;
        total.merge(lw);
        total2.merge(lw2);
        batches.push(BatchSummary { replications: count, hits: h, log_weight_sum: lw.value() });
    }
    let l = cfg.replications as f64;
    let ln_l = l.ln();
    let log_pi = total.value() - ln_l;
    let mut warnings = Vec::new();
    if part.non_integral() {
        warnings.push(format!(
            "n·p is not integral for n = {n}; the estimate targets the rounded block frequencies"
        ));
    }
    let (relative_stderr, ess, zero_hit_bound) = if hits == 0 {
        warnings.push(format!(
            "no replication hit the constraint set; Π < {:.3e} at 95% confidence (rule of three), rate reported as +inf",
            3.0 / l
        ));
        (f64::NAN, 0.0, Some(3.0 / l))
    } else {
        // E[w²]/Π̂² - 1 is the relative variance of one weight
        let log_m2 = total2.value() - ln_l;
        let rel_var = ((log_m2 - 2.0 * log_pi).exp() - 1.0).max(0.0) * l / (l - 1.0).max(1.0);
        let ess = (2.0 * total.value() - total2.value()).exp();
        if hits < 10 {
            warnings.push(format!("only {hits} hits; the standard error is unreliable"));
        }
        ((rel_var / l).sqrt(), ess, None)
    };
    let pi = log_pi.exp();
    let rate = -log_pi / n as f64;
    let rate_stderr = relative_stderr / n as f64;
    Ok(Estimate {
        n,
        replications: cfg.replications,
        hits,
        block_sizes: part.sizes().to_vec(),
        tilts: taus.to_vec(),
        dominating_point: None,
        scaling: None,
        log_pi,
        pi,
        pi_stderr: pi * relative_stderr,
        relative_stderr,
        rate,
        rate_stderr,
        value: rate,
        value_stderr: rate_stderr,
        target: "rate".into(),
        effective_sample_size: ess,
        zero_hit_bound,
        warnings,
        batches,
    })
}

/// Crude Monte Carlo: untilted block sums.
pub fn naive_estimate(setup: &BsSetup, cfg: &SimConfig) -> Result<Estimate> {
    simulate(setup, &vec![0.0; setup.k()], cfg)
}

/// Importance sampling tilted toward the dominating point `q_star`.
pub fn is_estimate(setup: &BsSetup, q_star: &[f64], cfg: &SimConfig) -> Result<Estimate> {
    let (taus, m) = setup.tilts(q_star)?;
    let mut est = simulate(setup, &taus, cfg)?;
    est.dominating_point = Some(q_star.to_vec());
    est.scaling = m;
    Ok(est)
}
