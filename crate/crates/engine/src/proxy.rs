//! Proxies for the dominating point `Q* = argmin_Ω` of the rate objective,
//! and a derivative-free descent that refines them inside Ω.
//!
//! All proxy randomness comes from stream `(seed, PROXY, ·)`, all descent
//! randomness from `(seed, DESCENT, 0)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use bsim_core::DivergenceGenerator;
use bsim_laws::rng::{purpose, stream};

use crate::constraint::AffineProjector;
use crate::error::{EngineError, Result};
use crate::estimator::{par_batches, BsSetup, Mode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProxyMethod {
    /// A point supplied by the caller.
    Given { q: Vec<f64> },
    /// Best hit of untilted runs of size `run_size`.
    HitRun { run_size: usize, budget: u64 },
    /// Best member among draws from the density `∝ exp(-D(T, P))`.
    Density { budget: u64 },
}

fn default_refine_budget() -> usize {
    4000
}

fn yes() -> bool {
    true
}

/// Serialized flat: the method tag and its fields sit next to `refine` and
/// `refine_budget`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProxyConfig")]
pub struct ProxyConfig {
    #[serde(flatten)]
    pub method: ProxyMethod,
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default = "default_refine_budget")]
    pub refine_budget: usize,
}

/// Strict flat form of [`ProxyConfig`]; `flatten` cannot reject unknown fields.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProxyConfig {
    method: String,
    #[serde(default)]
    q: Option<Vec<f64>>,
    #[serde(default)]
    run_size: Option<usize>,
    #[serde(default)]
    budget: Option<u64>,
    #[serde(default = "yes")]
    refine: bool,
    #[serde(default = "default_refine_budget")]
    refine_budget: usize,
}

impl TryFrom<RawProxyConfig> for ProxyConfig {
    type Error = String;

    fn try_from(r: RawProxyConfig) -> std::result::Result<Self, String> {
        let need = |name: &str| format!("proxy method `{}` needs `{name}`", r.method);
        let stray = |name: &str| format!("proxy method `{}` takes no `{name}`", r.method);
        let method = match r.method.as_str() {
            "given" => {
                if r.run_size.is_some() || r.budget.is_some() {
                    return Err(stray(if r.budget.is_some() { "budget" } else { "run_size" }));
                }
                ProxyMethod::Given { q: r.q.clone().ok_or_else(|| need("q"))? }
            }
            "hit_run" => {
                if r.q.is_some() {
                    return Err(stray("q"));
                }
                ProxyMethod::HitRun {
                    run_size: r.run_size.ok_or_else(|| need("run_size"))?,
                    budget: r.budget.ok_or_else(|| need("budget"))?,
                }
            }
            "density" => {
                if r.q.is_some() || r.run_size.is_some() {
                    return Err(stray(if r.q.is_some() { "q" } else { "run_size" }));
                }
                ProxyMethod::Density { budget: r.budget.ok_or_else(|| need("budget"))? }
            }
            other => return Err(format!("unknown proxy method `{other}`; expected given, hit_run or density")),
        };
        Ok(ProxyConfig { method, refine: r.refine, refine_budget: r.refine_budget })
    }
}

impl ProxyConfig {
    pub fn given(q: Vec<f64>) -> Self {
        Self { method: ProxyMethod::Given { q }, refine: true, refine_budget: default_refine_budget() }
    }

    pub fn density(budget: u64) -> Self {
        Self { method: ProxyMethod::Density { budget }, refine: true, refine_budget: default_refine_budget() }
    }

    pub fn hit_run(run_size: usize, budget: u64) -> Self {
        Self { method: ProxyMethod::HitRun { run_size, budget }, refine: true, refine_budget: default_refine_budget() }
    }
}

/// A proxy point with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyPoint {
    pub q: Vec<f64>,
    pub objective: f64,
    /// Members found while searching (1 for a given point).
    pub members: u64,
}

fn best_of(a: Option<(Vec<f64>, f64)>, b: Option<(Vec<f64>, f64)>) -> Option<(Vec<f64>, f64)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.1 < x.1 { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Runs the configured proxy search.
pub fn find_proxy(setup: &BsSetup, cfg: &ProxyConfig, seed: u64, threads: Option<usize>) -> Result<ProxyPoint> {
    match &cfg.method {
        ProxyMethod::Given { q } => {
            if q.len() != setup.k() {
                return Err(EngineError::Proxy(format!("given point has length {}, expected {}", q.len(), setup.k())));
            }
            if !setup.omega().contains(q) {
                return Err(EngineError::Proxy("given point is not in the constraint set".into()));
            }
            Ok(ProxyPoint { q: q.clone(), objective: setup.objective(q), members: 1 })
        }
        ProxyMethod::HitRun { run_size, budget } => hit_run(setup, *run_size, *budget, seed, threads),
        ProxyMethod::Density { budget } => density_proxy(setup, *budget, seed, threads),
    }
}

fn hit_run(setup: &BsSetup, run_size: usize, budget: u64, seed: u64, threads: Option<usize>) -> Result<ProxyPoint> {
    let part = match setup.sample() {
        Some(s) => s.replicated(run_size.div_ceil(s.n()).max(1)),
        None => setup.partition(run_size)?,
    };
    let n = part.n();
    let draws = setup
        .block_counts(&part)
        .iter()
        .map(|&nu| setup.law().block(nu, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let found = par_batches(budget, 32, threads, |range| {
        let mut best = None;
        let mut members = 0u64;
        let mut sums = vec![0.0; draws.len()];
        for l in range {
            let mut rng = stream(seed, purpose::PROXY, l);
            for (s, d) in sums.iter_mut().zip(&draws) {
                *s = d.sample(&mut rng);
            }
            if let Some(x) = setup.point(&sums, n) {
                if setup.omega().contains(&x) {
                    members += 1;
                    let v = setup.objective(&x);
                    best = best_of(best, Some((x, v)));
                }
            }
        }
        (best, members)
    })?;
    collect(found, "no run of the naive simulation hit the constraint set; increase the budget or run size")
}

fn collect(found: Vec<(Option<(Vec<f64>, f64)>, u64)>, msg: &str) -> Result<ProxyPoint> {
    let mut best = None;
    let mut members = 0;
    for (b, m) in found {
        best = best_of(best, b);
        members += m;
    }
    match best {
        Some((q, objective)) if objective.is_finite() => Ok(ProxyPoint { q, objective, members }),
        _ => Err(EngineError::Proxy(msg.into())),
    }
}

/// Inverse-CDF table of the density `∝ exp(-p φ(t/p))` on `t`.
#[derive(Debug, Clone)]
pub struct CoordinateTable {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

const TABLE_POINTS: usize = 4096;
/// The table covers `{t : p φ(t/p) < CUTOFF}`; the neglected mass is below `e^{-CUTOFF}` times the width.
const CUTOFF: f64 = 40.0;

impl CoordinateTable {
    pub fn new(gen: &DivergenceGenerator, p: f64) -> Result<Self> {
        let f = |t: f64| p * gen.phi(t / p);
        let (ilo, ihi) = gen.interior();
        let (lo_lim, hi_lim) = (ilo * p, ihi * p);
        let reach = |dir: f64, lim: f64| -> f64 {
            let mut d = 0.1 * p;
            for _ in 0..400 {
                let t = p + dir * d;
                if (dir > 0.0 && t >= lim) || (dir < 0.0 && t <= lim) {
                    return lim;
                }
                let v = f(t);
                if !(v < CUTOFF) {
                    return t;
                }
                d *= 1.5;
            }
            p + dir * d
        };
        let lo = reach(-1.0, lo_lim);
        let hi = reach(1.0, hi_lim);
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(EngineError::Proxy(format!("cannot bracket the proxy density around p = {p}")));
        }
        let h = (hi - lo) / (TABLE_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..TABLE_POINTS).map(|i| lo + h * i as f64).collect();
        let dens: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let v = f(t);
                if v.is_finite() {
                    (-v).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let mut cdf = vec![0.0; TABLE_POINTS];
        for i in 1..TABLE_POINTS {
            cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
        }
        let total = cdf[TABLE_POINTS - 1];
        if !(total > 0.0 && total.is_finite()) {
            return Err(EngineError::Proxy(format!("proxy density around p = {p} has no mass")));
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { grid, cdf })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let j = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[j - 1] + w * (self.grid[j] - self.grid[j - 1])
    }
}

fn density_proxy(setup: &BsSetup, budget: u64, seed: u64, threads: Option<usize>) -> Result<ProxyPoint> {
    let tables = setup
        .p()
        .iter()
        .map(|&p| CoordinateTable::new(setup.generator(), p))
        .collect::<Result<Vec<_>>>()?;
    let a = setup.omega().scale();
    let found = par_batches(budget, 32, threads, |range| {
        let mut best = None;
        let mut members = 0u64;
        let mut t = vec![0.0; tables.len()];
        for l in range {
            let mut rng = stream(seed, purpose::PROXY, l);
            for (x, tab) in t.iter_mut().zip(&tables) {
                *x = tab.sample(&mut rng);
            }
            let x = match setup.mode() {
                Mode::Deterministic => Some(t.clone()),
                Mode::Normalized => {
                    let s: f64 = t.iter().sum();
                    (s != 0.0).then(|| t.iter().map(|v| a * v / s).collect())
                }
            };
            if let Some(x) = x {
                if setup.omega().contains(&x) {
                    members += 1;
                    let v = setup.objective(&x);
                    best = best_of(best, Some((x, v)));
                }
            }
        }
        (best, members)
    })?;
    collect(found, "no draw of the proxy density hit the constraint set; increase the budget")
}

/// Result of a descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descent {
    pub q: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub accepted: usize,
    pub stopped_early: bool,
}

/// (1+1) evolution strategy with the one-fifth success rule, minimizing
/// `objective` over Ω from the member `start`. Candidates are projected onto
/// the affine equalities of Ω (and `Σq = A` in normalized mode), so thin
/// equality bands stay reachable. Stops once the value drops below `stop_below`.
pub fn descend<F>(
    setup: &BsSetup,
    start: &[f64],
    objective: F,
    budget: usize,
    seed: u64,
    stop_below: f64,
) -> Result<Descent>
where
    F: Fn(&[f64]) -> f64,
{
    if !setup.omega().contains(start) {
        return Err(EngineError::Proxy("descent must start inside the constraint set".into()));
    }
    let mut eqs = setup.omega().equalities();
    if setup.mode() == Mode::Normalized {
        eqs.push((vec![1.0; setup.k()], setup.omega().scale()));
    }
    let proj = AffineProjector::new(&eqs);
    let mut x = start.to_vec();
    let mut fx = objective(&x);
    if !fx.is_finite() {
        return Err(EngineError::Proxy("objective is not finite at the starting point".into()));
    }
    let size = x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64;
    let size = if size > 0.0 { size } else { 1.0 };
    let mut sigma = 0.05 * size;
    let mut rng: ChaCha8Rng = stream(seed, purpose::DESCENT, 0);
    let (up, down) = ((1.0f64 / 3.0).exp(), (-1.0f64 / 12.0).exp());
    let mut accepted = 0;
    let mut evaluations = 0;
    let mut cand = vec![0.0; x.len()];
    while evaluations < budget {
        if fx < stop_below {
            return Ok(Descent { q: x, objective: fx, evaluations, accepted, stopped_early: true });
        }
        if sigma < 1e-13 * size {
            break;
        }
        for (c, xi) in cand.iter_mut().zip(&x) {
            let z: f64 = rng.sample(StandardNormal);
            *c = xi + sigma * z;
        }
        if !proj.is_empty() {
            proj.project(&mut cand);
        }
        evaluations += 1;
        if setup.omega().contains(&cand) {
            let fc = objective(&cand);
            if fc < fx {
                x.copy_from_slice(&cand);
                fx = fc;
                accepted += 1;
                sigma *= up;
                continue;
            }
        }
        sigma *= down;
    }
    // The strategy's success rate collapses next to the boundary of Ω, so
    // finish with a pattern search along ±e_i and e_i - e_j.
    let k = x.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let mut d = vec![0.0; k];
            d[i] = 1.0;
            if i != j {
                d[j] = -1.0;
            } else {
                dirs.push(d.iter().map(|v| -v).collect());
            }
            dirs.push(d);
        }
    }
    let mut step = sigma.max(1e-3 * size);
    let limit = evaluations + budget;
    while step > 1e-13 * size && evaluations < limit && fx >= stop_below {
        let mut improved = false;
        for d in &dirs {
            for (c, (xi, di)) in cand.iter_mut().zip(x.iter().zip(d)) {
                *c = xi + step * di;
            }
            if !proj.is_empty() {
                proj.project(&mut cand);
            }
            evaluations += 1;
            if setup.omega().contains(&cand) {
                let fc = objective(&cand);
                if fc < fx {
                    x.copy_from_slice(&cand);
                    fx = fc;
                    accepted += 1;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(Descent { q: x, objective: fx, evaluations, accepted, stopped_early: fx < stop_below })
}

/// Proxy search followed, if configured, by descent on the rate objective.
pub fn dominating_point(setup: &BsSetup, cfg: &ProxyConfig, seed: u64, threads: Option<usize>) -> Result<ProxyPoint> {
    let p0 = find_proxy(setup, cfg, seed, threads)?;
    if !cfg.refine || cfg.refine_budget == 0 {
        return Ok(p0);
    }
    let d = descend(setup, &p0.q, |q| setup.objective(q), cfg.refine_budget, seed, f64::NEG_INFINITY)?;
    Ok(ProxyPoint { q: d.q, objective: d.objective, members: p0.members })
}
