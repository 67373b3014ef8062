//! Reductions of optimization problems to constrained power-divergence
//! minimization, and a solver that runs them through the estimator.
//!
//! Each reduction yields a [`BsSetup`], the [`Target`] to invert for, and the
//! affine map `original = offset + factor · target` back to the original
//! objective. Equalities in the reduced sets use the strict band
//! [`EQ_TOL`](crate::constraint::EQ_TOL); [`solve`] widens them to the
//! simulation band.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use bsim_core::{divergence, hellinger_integral, DivergenceGenerator, EntropyFamily, Extremum};

use crate::constraint::{ConstraintSet, ConstraintSpec, EQ_TOL};
use crate::error::{EngineError, Result};
use crate::estimator::{ext_f64, BsSetup, Estimate, Mode};
use crate::invert::Target;
use crate::pipeline::{run, BsConfig};
use crate::proxy::ProxyConfig;

fn two() -> f64 {
    2.0
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemInstance {
    /// `Σ_k c1_k + c2_k x_k + c3_k x_k²` over `x ∈ constraints`.
    SeparableQuadratic { c1: Vec<f64>, c2: Vec<f64>, c3: Vec<f64>, constraints: ConstraintSpec },
    /// `Σ_k cost_k x_k` over nonnegative `x` with `‖x‖_{1/γ} = radius`,
    /// minimized for `γ >= 2` or `γ < 0`, maximized for `γ ∈ ]0,1[`.
    LinearObjective {
        cost: Vec<f64>,
        gamma: f64,
        radius: f64,
        #[serde(default)]
        constraints: Option<ConstraintSpec>,
    },
    /// Linear assignment with row-major costs, relaxed to the polka-dot set
    /// `x_k ∈ [0, eps1] ∪ [1 - eps2, 1]`.
    Assignment {
        cost: Vec<Vec<f64>>,
        eps1: f64,
        eps2: f64,
        #[serde(default = "two")]
        gamma: f64,
        #[serde(default)]
        side_constraints: Option<ConstraintSpec>,
    },
    /// `K1 K2 Σ (π_uv - 1/(K1 K2))²` over couplings of `mu` and `nu`.
    Transport {
        mu: Vec<f64>,
        nu: Vec<f64>,
        #[serde(default)]
        side_constraints: Option<ConstraintSpec>,
    },
    /// Extremum of an entropy over `Ω ⊂ {q : Σq = total}` in dimension `k`.
    EntropyMax {
        family: EntropyFamily,
        k: usize,
        constraints: ConstraintSpec,
        #[serde(default = "one")]
        total: f64,
    },
}

impl ProblemInstance {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemInstance::SeparableQuadratic { .. } => "separable_quadratic",
            ProblemInstance::LinearObjective { .. } => "linear_objective",
            ProblemInstance::Assignment { .. } => "assignment",
            ProblemInstance::Transport { .. } => "transport",
            ProblemInstance::EntropyMax { .. } => "entropy_max",
        }
    }
}

/// A reduced problem.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub setup: BsSetup,
    pub target: Target,
    /// `original = offset + factor · target value`.
    pub offset: f64,
    pub factor: f64,
    pub extremum: Extremum,
    /// A member of Ω to start the search from, when one is known.
    pub start: Option<Vec<f64>>,
}

fn bad(msg: impl Into<String>) -> EngineError {
    EngineError::Reduction(msg.into())
}

fn and(mut parts: Vec<ConstraintSpec>, extra: &Option<ConstraintSpec>) -> ConstraintSpec {
    if let Some(s) = extra {
        parts.push(s.clone());
    }
    ConstraintSpec::And { of: parts }
}

/// `q = -c2 x`, `p = c2²/(2 c3)`, offset `c4 = Σ(c1 - c2²/(4 c3))`; the
/// objective equals `c4 + D_{φ2}(Q, P)`. Deterministic mode.
pub fn reduce_quadratic(c1: &[f64], c2: &[f64], c3: &[f64], constraints: &ConstraintSpec) -> Result<Reduction> {
    let k = c1.len();
    if k == 0 || c2.len() != k || c3.len() != k {
        return Err(bad("c1, c2, c3 must be non-empty with equal lengths"));
    }
    if c2.iter().any(|x| !(x.is_finite() && *x != 0.0)) {
        return Err(bad("every c2 must be finite and nonzero"));
    }
    if c3.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(bad("every c3 must be > 0"));
    }
    constraints.validate(k)?;
    let p: Vec<f64> = c2.iter().zip(c3).map(|(b, c)| b * b / (2.0 * c)).collect();
    let offset: f64 = (0..k).map(|i| c1[i] - c2[i] * c2[i] / (4.0 * c3[i])).sum();
    let d: Vec<f64> = c2.iter().map(|b| -1.0 / b).collect();
    let omega = ConstraintSet::from_spec(constraints.pull_back_diagonal(&d)?);
    let gen = DivergenceGenerator::power(2.0, 1.0)?;
    let setup = BsSetup::new(gen, p, omega, Mode::Deterministic)?;
    Ok(Reduction { setup, target: Target::Divergence, offset, factor: 1.0, extremum: Extremum::Min, start: None })
}

/// The original quadratic objective at `x`.
pub fn quadratic_objective(c1: &[f64], c2: &[f64], c3: &[f64], x: &[f64]) -> f64 {
    (0..x.len()).map(|i| c1[i] + c2[i] * x[i] + c3[i] * x[i] * x[i]).sum()
}

/// `x ↦ q = -c2 x`.
pub fn quadratic_forward(c2: &[f64], x: &[f64]) -> Vec<f64> {
    x.iter().zip(c2).map(|(xi, b)| -b * xi).collect()
}

/// Exponent data of the linear-to-Hellinger rewrite: `(P, c1)` with
/// `p_k ∝ cost_k^{1/(1-γ)}` and `c1 = (Σ cost^{1/(1-γ)})^{1-γ}`.
pub fn linear_weights(cost: &[f64], gamma: f64) -> Result<(Vec<f64>, f64)> {
    if cost.is_empty() || cost.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(bad("costs must be finite and > 0"));
    }
    if !gamma.is_finite() || gamma == 0.0 || (1.0..2.0).contains(&gamma) {
        return Err(bad(format!("gamma = {gamma} not in ]-inf,0[ U ]0,1[ U [2,inf[")));
    }
    let e = 1.0 / (1.0 - gamma);
    let w: Vec<f64> = cost.iter().map(|c| c.powf(e)).collect();
    let s: f64 = w.iter().sum();
    Ok((w.iter().map(|x| x / s).collect(), s.powf(1.0 - gamma)))
}

/// `q = x^{1/γ}`; `Σ cost·x = c1 H_γ(Q, P)` and `Σq = radius^{1/γ}`.
pub fn reduce_linear(cost: &[f64], gamma: f64, radius: f64, constraints: &Option<ConstraintSpec>) -> Result<Reduction> {
    let (p, c1) = linear_weights(cost, gamma)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(bad("radius must be > 0"));
    }
    let k = cost.len();
    let a = radius.powf(1.0 / gamma);
    let inner = match constraints {
        Some(s) => {
            s.validate(k)?;
            ConstraintSet::from_spec(s.clone())
        }
        None => ConstraintSet::from_spec(ConstraintSpec::All),
    };
    let map: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync> = Arc::new(move |q: &[f64]| {
        q.iter().map(|&x| if x >= 0.0 { x.powf(gamma) } else { f64::NAN }).collect()
    });
    let omega = ConstraintSet::pulled_back(inner, map, "linear objective on the 1/gamma-norm sphere").with_scale(a);
    let gen = DivergenceGenerator::power(gamma, 1.0)?;
    let setup = BsSetup::new(gen, p, omega, Mode::Normalized)?;
    let extremum = if gamma > 0.0 && gamma < 1.0 { Extremum::Max } else { Extremum::Min };
    Ok(Reduction { setup, target: Target::Hellinger, offset: 0.0, factor: c1, extremum, start: None })
}

/// `c1 · H_γ(x^{1/γ}, P)` for the linear rewrite.
pub fn linear_via_hellinger(cost: &[f64], gamma: f64, x: &[f64]) -> Result<f64> {
    let (p, c1) = linear_weights(cost, gamma)?;
    let q: Vec<f64> = x.iter().map(|v| v.powf(1.0 / gamma)).collect();
    Ok(c1 * hellinger_integral(gamma, &q, &p)?)
}

fn marginals(rows: usize, cols: usize, row_sums: Vec<f64>, col_sums: Vec<f64>) -> ConstraintSpec {
    ConstraintSpec::Marginals { rows, cols, row_sums, col_sums, tol: EQ_TOL }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

/// Largest dimension for which assignment starting points are found by enumeration.
pub const ENUMERATION_LIMIT: usize = 7;

/// `q = x` flattened row-major, `A = K`, linear rewrite with exponent `γ`
/// (exact at 0/1 points), and the polka-dot relaxation of the binary set.
pub fn reduce_assignment(
    cost: &[Vec<f64>],
    eps1: f64,
    eps2: f64,
    gamma: f64,
    side: &Option<ConstraintSpec>,
) -> Result<Reduction> {
    let k = cost.len();
    if k < 2 || cost.iter().any(|r| r.len() != k) {
        return Err(bad("cost must be a square matrix of size >= 2"));
    }
    if !(eps1 >= 0.0 && eps2 >= 0.0 && eps1 + eps2 < 1.0) {
        return Err(bad(format!("need eps1, eps2 >= 0 with eps1 + eps2 < 1, got {eps1}, {eps2}")));
    }
    if !(gamma >= 2.0 || (gamma > 0.0 && gamma < 1.0)) {
        return Err(bad("assignment needs gamma in ]0,1[ U [2,inf[ so that x^gamma = x on {0,1}"));
    }
    let flat: Vec<f64> = cost.iter().flatten().copied().collect();
    let (p, c1) = linear_weights(&flat, gamma)?;
    let spec = and(
        vec![
            marginals(k, k, vec![1.0; k], vec![1.0; k]),
            ConstraintSpec::PolkaDot { eps1, eps2, unit: 1.0 },
        ],
        side,
    );
    spec.validate(k * k)?;
    let omega = ConstraintSet::from_spec(spec.clone()).with_scale(k as f64);
    let gen = DivergenceGenerator::power(gamma, 1.0)?;
    let setup = BsSetup::new(gen, p.clone(), omega, Mode::Normalized)?;
    // the cheapest feasible permutation seeds the search when enumeration is affordable
    let start = (k <= ENUMERATION_LIMIT)
        .then(|| {
            permutations(k)
                .into_iter()
                .map(|perm| {
                    let mut q = vec![0.0; k * k];
                    perm.iter().enumerate().for_each(|(i, &j)| q[i * k + j] = 1.0);
                    q
                })
                .filter(|q| spec.contains(q))
                .map(|q| {
                    let c: f64 = q.iter().zip(&flat).map(|(a, b)| a * b).sum();
                    (q, c)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|x| x.0)
        })
        .flatten();
    let extremum = if gamma < 1.0 { Extremum::Max } else { Extremum::Min };
    Ok(Reduction { setup, target: Target::Hellinger, offset: 0.0, factor: c1, extremum, start })
}

/// `K = K1 K2`, uniform `P`, `c̃ = 2`: the objective is `D_{2φ2}(Q, P)`.
pub fn reduce_transport(mu: &[f64], nu: &[f64], side: &Option<ConstraintSpec>) -> Result<Reduction> {
    let (k1, k2) = (mu.len(), nu.len());
    if k1 == 0 || k2 == 0 || mu.iter().chain(nu).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(bad("mu and nu must be non-empty and nonnegative"));
    }
    let a: f64 = mu.iter().sum();
    let b: f64 = nu.iter().sum();
    if !(a > 0.0) || (a - b).abs() > 1e-12 * a.max(1.0) {
        return Err(bad(format!("mu and nu must have equal positive mass, got {a} and {b}")));
    }
    let k = k1 * k2;
    let spec = and(
        vec![
            marginals(k1, k2, mu.to_vec(), nu.to_vec()),
            ConstraintSpec::Box { lower: vec![Some(0.0); k], upper: vec![Some(a); k] },
        ],
        side,
    );
    spec.validate(k)?;
    let omega = ConstraintSet::from_spec(spec.clone()).with_scale(a);
    let gen = DivergenceGenerator::power(2.0, 2.0)?;
    let setup = BsSetup::new(gen, vec![1.0 / k as f64; k], omega, Mode::Normalized)?;
    let independent: Vec<f64> = (0..k).map(|i| mu[i / k2] * nu[i % k2] / a).collect();
    let start = spec.contains(&independent).then_some(independent);
    Ok(Reduction { setup, target: Target::Divergence, offset: 0.0, factor: 1.0, extremum: Extremum::Min, start })
}

/// `K Σ (q_k - 1/K)²` for a flattened coupling.
pub fn transport_objective(q: &[f64]) -> f64 {
    let k = q.len() as f64;
    k * q.iter().map(|x| (x - 1.0 / k) * (x - 1.0 / k)).sum::<f64>()
}

/// `K Σ q² + 1 - 2A`, the same objective expanded.
pub fn transport_expanded(q: &[f64]) -> f64 {
    let k = q.len() as f64;
    let a: f64 = q.iter().sum();
    k * q.iter().map(|x| x * x).sum::<f64>() + 1.0 - 2.0 * a
}

/// `D_{2φ2}(Q, uniform)`.
pub fn transport_divergence(q: &[f64]) -> Result<f64> {
    let k = q.len();
    let gen = DivergenceGenerator::power(2.0, 2.0)?;
    Ok(divergence(&gen, q, &vec![1.0 / k as f64; k])?)
}

pub fn reduce_entropy(family: &EntropyFamily, k: usize, constraints: &ConstraintSpec, total: f64) -> Result<Reduction> {
    if k < 2 {
        return Err(bad("entropy problems need k >= 2"));
    }
    constraints.validate(k)?;
    let gamma = family.generator_gamma()?;
    let gen = DivergenceGenerator::power(gamma, 1.0)
        .map_err(|e| bad(format!("no simulable power generator for this family: {e}")))?;
    let omega = ConstraintSet::from_spec(constraints.clone()).with_scale(total);
    let setup = BsSetup::new(gen, vec![1.0 / k as f64; k], omega, Mode::Normalized)?;
    Ok(Reduction {
        setup,
        target: Target::Entropy { family: *family },
        offset: 0.0,
        factor: 1.0,
        extremum: family.extremum()?,
        start: None,
    })
}

pub fn reduce(inst: &ProblemInstance) -> Result<Reduction> {
    match inst {
        ProblemInstance::SeparableQuadratic { c1, c2, c3, constraints } => reduce_quadratic(c1, c2, c3, constraints),
        ProblemInstance::LinearObjective { cost, gamma, radius, constraints } => {
            reduce_linear(cost, *gamma, *radius, constraints)
        }
        ProblemInstance::Assignment { cost, eps1, eps2, gamma, side_constraints } => {
            reduce_assignment(cost, *eps1, *eps2, *gamma, side_constraints)
        }
        ProblemInstance::Transport { mu, nu, side_constraints } => reduce_transport(mu, nu, side_constraints),
        ProblemInstance::EntropyMax { family, k, constraints, total } => reduce_entropy(family, *k, constraints, *total),
    }
}

fn default_band() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub estimator: BsConfig,
    /// Half-width of the equality bands while simulating.
    #[serde(default = "default_band")]
    pub equality_band: f64,
}

impl SolveConfig {
    pub fn new(estimator: BsConfig) -> Self {
        Self { estimator, equality_band: default_band() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemReport {
    pub problem: String,
    /// The estimated optimum of the original objective.
    #[serde(with = "ext_f64")]
    pub value: f64,
    #[serde(with = "ext_f64")]
    pub value_stderr: f64,
    pub extremum: Extremum,
    pub offset: f64,
    pub factor: f64,
    pub estimate: Estimate,
}

/// Reduces, simulates and maps the estimate back to the original objective.
/// Without a configured proxy, a known member seeds the search; otherwise
/// the proxy density is used.
pub fn solve(inst: &ProblemInstance, cfg: &SolveConfig) -> Result<ProblemReport> {
    let red = reduce(inst)?;
    solve_reduced(inst.name(), &red, cfg)
}

pub fn solve_reduced(name: &str, red: &Reduction, cfg: &SolveConfig) -> Result<ProblemReport> {
    let mut setup = red.setup.clone();
    let band = cfg.equality_band;
    if !(band >= 0.0) {
        return Err(EngineError::Config("equality band must be >= 0".into()));
    }
    let omega = setup.omega().with_equality_band(band);
    setup = BsSetup::new(setup.generator().clone(), setup.p().to_vec(), omega, setup.mode())?;
    let mut est_cfg = cfg.estimator.clone();
    if est_cfg.proxy.is_none() {
        est_cfg.proxy = Some(match &red.start {
            Some(q) => ProxyConfig::given(q.clone()),
            None => ProxyConfig::density(100_000),
        });
    }
    let est = run(&setup, &est_cfg, &red.target)?;
    Ok(ProblemReport {
        problem: name.into(),
        value: red.offset + red.factor * est.value,
        value_stderr: red.factor.abs() * est.value_stderr,
        extremum: red.extremum,
        offset: red.offset,
        factor: red.factor,
        estimate: est,
    })
}
