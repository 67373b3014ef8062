//! Brute-force references for small problems: grid minimization of the rate
//! objective and exact enumeration of `Π` for lattice laws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bsim_core::numeric::golden_min;

use crate::error::{EngineError, Result};
use crate::estimator::{ext_f64, BsSetup, Mode};

/// Region scanned by [`grid_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridDomain {
    /// `{q >= 0 : Σq = total}` in dimension `k`.
    Simplex { k: usize, total: f64 },
    /// A coordinate box.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub q: Vec<f64>,
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub points: u64,
    /// Grid spacing before refinement.
    pub spacing: f64,
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn simplex_visit<F: FnMut(&[u64])>(rest: u64, k: usize, prefix: &mut Vec<u64>, f: &mut F) {
    if prefix.len() + 1 == k {
        prefix.push(rest);
        f(prefix);
        prefix.pop();
        return;
    }
    for c in 0..=rest {
        prefix.push(c);
        simplex_visit(rest - c, k, prefix, f);
        prefix.pop();
    }
}

fn best(a: (Vec<f64>, f64), b: (Vec<f64>, f64)) -> (Vec<f64>, f64) {
    if b.1 < a.1 {
        b
    } else {
        a
    }
}

/// Minimizes `objective` over the members of the grid, then refines the best
/// point by pattern search with step halving: along `e_i - e_j` on the
/// simplex, along `±e_i` in a box. At most `budget` grid points are used.
pub fn grid_scan<M, F>(domain: &GridDomain, budget: u64, member: M, objective: F) -> Result<GridResult>
where
    M: Fn(&[f64]) -> bool + Sync,
    F: Fn(&[f64]) -> f64 + Sync,
{
    let eval = |q: &[f64]| if member(q) { objective(q) } else { f64::INFINITY };
    let none = (Vec::new(), f64::INFINITY);
    let (found, points, spacing) = match domain {
        GridDomain::Simplex { k, total } => {
            let k = *k;
            if k < 2 {
                return Err(EngineError::Config("simplex grid needs k >= 2".into()));
            }
            let mut steps = 1u64;
            while binom(steps + k as u64, k as u64 - 1) <= budget as f64 {
                steps += 1;
            }
            let scale = total / steps as f64;
            let found = (0..=steps)
                .into_par_iter()
                .map(|c0| {
                    let mut acc = none.clone();
                    let mut prefix = vec![c0];
                    simplex_visit(steps - c0, k, &mut prefix, &mut |c| {
                        let q: Vec<f64> = c.iter().map(|&x| x as f64 * scale).collect();
                        let v = eval(&q);
                        if v < acc.1 {
                            acc = (q, v);
                        }
                    });
                    acc
                })
                .reduce(|| none.clone(), best);
            (found, binom(steps + k as u64 - 1, k as u64 - 1) as u64, scale.abs())
        }
        GridDomain::Box { lower, upper } => {
            let k = lower.len();
            if k == 0 || upper.len() != k || lower.iter().zip(upper).any(|(l, u)| !(u > l)) {
                return Err(EngineError::Config("box grid needs matching bounds with lower < upper".into()));
            }
            let per = ((budget as f64).powf(1.0 / k as f64).floor() as u64).max(2);
            let total = per.pow(k as u32);
            let found = (0..total)
                .into_par_iter()
                .map(|mut idx| {
                    let q: Vec<f64> = (0..k)
                        .map(|i| {
                            let j = idx % per;
                            idx /= per;
                            lower[i] + (upper[i] - lower[i]) * j as f64 / (per - 1) as f64
                        })
                        .collect();
                    let v = eval(&q);
                    (q, v)
                })
                .reduce(|| none.clone(), best);
            let h = lower.iter().zip(upper).map(|(l, u)| (u - l) / (per - 1) as f64).fold(0.0, f64::max);
            (found, total, h)
        }
    };
    let (mut q, mut v) = found;
    if !v.is_finite() {
        return Ok(GridResult { q, value: v, points, spacing });
    }
    let k = q.len();
    let mut moves: Vec<Vec<f64>> = Vec::new();
    match domain {
        GridDomain::Simplex { .. } => {
            for i in 0..k {
                for j in 0..k {
                    if i != j {
                        let mut d = vec![0.0; k];
                        d[i] = 1.0;
                        d[j] = -1.0;
                        moves.push(d);
                    }
                }
            }
        }
        GridDomain::Box { .. } => {
            for i in 0..k {
                for s in [1.0, -1.0] {
                    let mut d = vec![0.0; k];
                    d[i] = s;
                    moves.push(d);
                }
            }
        }
    }
    let mut step = spacing;
    let floor = 1e-13 * q.iter().map(|x| x.abs()).fold(spacing, f64::max);
    let mut rounds = 0;
    while step > floor && rounds < 10_000 {
        rounds += 1;
        let mut improved = false;
        for d in &moves {
            let cand: Vec<f64> = q.iter().zip(d).map(|(x, e)| x + step * e).collect();
            let out_of_domain = match domain {
                GridDomain::Simplex { .. } => cand.iter().any(|x| *x < 0.0),
                GridDomain::Box { lower, upper } => {
                    cand.iter().enumerate().any(|(i, x)| *x < lower[i] || *x > upper[i])
                }
            };
            if out_of_domain {
                continue;
            }
            let c = eval(&cand);
            if c < v {
                q = cand;
                v = c;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(GridResult { q, value: v, points, spacing })
}

/// Grid minimum of the rate objective of `setup` over Ω: on the simplex of
/// total `A` in normalized mode, on `domain` (required) in deterministic mode.
pub fn grid_min_divergence(setup: &BsSetup, domain: Option<GridDomain>, budget: u64) -> Result<GridResult> {
    let domain = match (setup.mode(), domain) {
        (_, Some(d)) => d,
        (Mode::Normalized, None) => GridDomain::Simplex { k: setup.k(), total: setup.omega().scale() },
        (Mode::Deterministic, None) => {
            return Err(EngineError::Config("deterministic mode needs an explicit grid box".into()))
        }
    };
    grid_scan(&domain, budget, |q| setup.omega().contains(q), |q| setup.objective(q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPi {
    pub value: f64,
    /// Probability mass of the truncated tails; `|Π - value| <= tail_bound`.
    pub tail_bound: f64,
    pub points: u64,
}

/// `Π = P(ξ ∈ Ω)` by enumerating the lattice of block sums, for a closed-form
/// lattice law. Each block's tail beyond mass `tail / K` is dropped.
pub fn exact_pi(setup: &BsSetup, n: usize, tail: f64, budget: u64) -> Result<ExactPi> {
    let law = setup
        .weight_law()
        .ok_or_else(|| EngineError::Config("exact enumeration needs a closed-form law".into()))?;
    if !law.is_discrete() {
        return Err(EngineError::Config(format!("{} is not a lattice law", law.name())));
    }
    let part = setup.partition(n)?;
    let k = setup.k();
    let pmfs = setup
        .block_counts(&part)
        .iter()
        .map(|&nu| law.block(nu, 0.0)?.lattice_pmf(tail / k as f64, budget as usize))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let size = pmfs.iter().fold(1.0, |acc, p| acc * p.probs.len() as f64);
    if size > budget as f64 {
        return Err(EngineError::Budget(format!("{size:.3e} lattice points exceed the budget {budget}")));
    }
    let tail_bound = pmfs.iter().map(|p| p.tail).sum::<f64>();
    let n_eff = part.n();
    let first = pmfs[0].probs.len();
    let value: f64 = (0..first)
        .into_par_iter()
        .map(|j0| {
            let mut idx = vec![0usize; k];
            idx[0] = j0;
            let mut acc = 0.0;
            let mut sums = vec![0.0; k];
            loop {
                let mut prob = 1.0;
                for i in 0..k {
                    sums[i] = pmfs[i].value(idx[i]);
                    prob *= pmfs[i].probs[idx[i]];
                }
                if prob > 0.0 && setup.member(&sums, n_eff) {
                    acc += prob;
                }
                // odometer over coordinates 1..k
                let mut i = 1;
                while i < k {
                    idx[i] += 1;
                    if idx[i] < pmfs[i].probs.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i >= k {
                    break;
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(ExactPi { value, tail_bound, points: size as u64 })
}
