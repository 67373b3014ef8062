//! Criterion 8: the optimization reductions are exact identities and the
//! solved reference problems land on their oracles.

use rand::Rng;

use bsim_core::{divergence, DivergenceGenerator, EntropyFamily};
use bsim_engine::problems::{
    linear_via_hellinger, quadratic_forward, quadratic_objective, reduce_quadratic, solve, transport_divergence,
    transport_expanded, transport_objective, ProblemInstance, SolveConfig,
};
use bsim_engine::{BsConfig, ConstraintSpec, Sense};
use bsim_laws::rng::stream;

use crate::report::CriterionReport;
use crate::SuiteConfig;

/// `max(|x|, 1)`-relative gap.
fn gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

/// Entropy maximum over `{q ∈ simplex : q₁ >= 1/2}` for `K = 3`.
pub const ENTROPY_MAX_ORACLE: f64 = 1.039721;

pub fn criterion_8(cfg: &SuiteConfig) -> CriterionReport {
    let mut rep = CriterionReport::new(8, "reductions");
    let mut rng = stream(cfg.seed, 8, 0);

    let k = 5;
    let c1: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let c2: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..3.0) * if rng.gen() { 1.0 } else { -1.0 }).collect();
    let c3: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..3.0)).collect();
    let chi = DivergenceGenerator::power(2.0, 1.0).expect("gamma 2");
    let mut worst = 0.0f64;
    match reduce_quadratic(&c1, &c2, &c3, &ConstraintSpec::All) {
        Ok(red) => {
            for _ in 0..100 {
                let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let direct = quadratic_objective(&c1, &c2, &c3, &x);
                let via = red.offset + divergence(&chi, &quadratic_forward(&c2, &x), red.setup.p()).unwrap_or(f64::NAN);
                worst = worst.max(gap(direct, via));
            }
        }
        Err(e) => rep.fail_with(e),
    }
    rep.check(worst <= 1e-12, format!("quadratic identity gap {worst:.3e}"));
    rep.metric("quadratic_gap", worst);

    let mut worst = 0.0f64;
    for gamma in [2.0, 3.0, 0.5, -1.0] {
        let cost: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..5.0)).collect();
        for _ in 0..25 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..3.0)).collect();
            let direct: f64 = x.iter().zip(&cost).map(|(a, b)| a * b).sum();
            let via = linear_via_hellinger(&cost, gamma, &x).unwrap_or(f64::NAN);
            worst = worst.max(gap(direct, via));
        }
    }
    rep.check(worst <= 1e-12, format!("linear identity gap {worst:.3e}"));
    rep.metric("linear_gap", worst);

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let q: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
        let direct = transport_objective(&q);
        let via = transport_divergence(&q).unwrap_or(f64::NAN);
        worst = worst.max(gap(direct, via)).max(gap(direct, transport_expanded(&q)));
    }
    rep.check(worst <= 1e-12, format!("transport identity gap {worst:.3e}"));
    rep.metric("transport_gap", worst);

    let solve_cfg = |n: usize, l: u64, offset: u64| SolveConfig::new(BsConfig { sim: cfg.sim(n, l, offset), proxy: None });
    let trivial = ProblemInstance::Transport { mu: vec![0.5, 0.5], nu: vec![0.5, 0.5], side_constraints: None };
    match solve(&trivial, &solve_cfg(1000, 20_000, 81)) {
        Ok(r) => {
            rep.check(r.value.abs() <= 0.02, format!("trivial transport {} ± {}", r.value, r.value_stderr));
            rep.metric("transport_trivial", r.value);
        }
        Err(e) => rep.fail_with(format!("transport: {e}")),
    }
    let emax = ProblemInstance::EntropyMax {
        family: EntropyFamily::Shannon,
        k: 3,
        constraints: ConstraintSpec::Halfspace { a: vec![1.0, 0.0, 0.0], b: 0.5, sense: Sense::Ge },
        total: 1.0,
    };
    match solve(&emax, &solve_cfg(2000, 100_000, 82)) {
        Ok(r) => {
            rep.check(
                (r.value - ENTROPY_MAX_ORACLE).abs() <= 0.03,
                format!("entropy max {} ± {} vs {ENTROPY_MAX_ORACLE}", r.value, r.value_stderr),
            );
            rep.metric("entropy_max", r.value);
        }
        Err(e) => rep.fail_with(format!("entropy max: {e}")),
    }
    rep
}
