//! Criterion 1: generators rebuilt from the defining relation agree with the
//! closed forms, and the conjugate of each closed-form cumulant is `φ`.

use std::sync::Arc;

use bsim_core::legendre::{closed_form_cumulant, GeneratorSpec};
use bsim_core::{build_lambda, build_phi, legendre_transform, DivergenceGenerator};

use crate::report::CriterionReport;

/// One representative per case, with the signed two-point variant added.
pub fn families() -> Vec<(&'static str, DivergenceGenerator)> {
    let mk = |r: bsim_core::Result<DivergenceGenerator>| r.expect("valid family parameters");
    vec![
        ("stable gamma=-1", mk(DivergenceGenerator::power(-1.0, 1.0))),
        ("stable gamma=-0.5", mk(DivergenceGenerator::power(-0.5, 2.0))),
        ("cpg gamma=0.5", mk(DivergenceGenerator::power(0.5, 1.0))),
        ("cpg gamma=0.25", mk(DivergenceGenerator::power(0.25, 0.7))),
        ("distorted gamma=3", mk(DivergenceGenerator::power(3.0, 1.0))),
        ("distorted gamma=2.5", mk(DivergenceGenerator::power(2.5, 1.5))),
        ("gaussian", mk(DivergenceGenerator::power(2.0, 4.0))),
        ("gamma", mk(DivergenceGenerator::power(0.0, 1.0))),
        ("poisson", mk(DivergenceGenerator::power(1.0, 2.0))),
        ("shifted poisson", mk(DivergenceGenerator::anchored_kl(0.7))),
        ("negbin", mk(DivergenceGenerator::generalized_kl(0.5, 2.0))),
        ("jensen-shannon", mk(DivergenceGenerator::jensen_shannon(1.0))),
        ("binomial", mk(DivergenceGenerator::generalized_kl(-0.5, 1.5))),
        ("blended", mk(DivergenceGenerator::blended_weight_chi_sq(0.5, 1.0))),
        ("two point", mk(DivergenceGenerator::two_point(0.0, 2.0))),
        ("two point signed", mk(DivergenceGenerator::two_point(-1.0, 3.0))),
        ("gal", mk(DivergenceGenerator::gen_asym_laplace(1.0, 2.0, 1.0, 1.0))),
    ]
}

/// 50 interior points of `[lo, hi] ∩ [-3, 4]`, 2% away from each end.
fn grid(lo: f64, hi: f64) -> Vec<f64> {
    let lo = if lo.is_finite() { lo.max(-3.0) } else { -3.0 };
    let hi = if hi.is_finite() { hi.min(4.0) } else { 4.0 };
    (0..50).map(|i| lo + (hi - lo) * (0.02 + 0.96 * i as f64 / 49.0)).collect()
}

/// Error relative to `1 + |b|`.
fn err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / (1.0 + b.abs())
    }
}

pub fn criterion_1() -> CriterionReport {
    let mut rep = CriterionReport::new(1, "duality");
    let (mut worst_phi, mut worst_lambda, mut worst_conj) = (0.0f64, 0.0f64, 0.0f64);
    for (name, gen) in families() {
        let spec = match GeneratorSpec::from_generator(&gen) {
            Some(s) => Arc::new(s),
            None => {
                rep.fail_with(format!("{name}: no generator spec"));
                continue;
            }
        };
        let closed = match closed_form_cumulant(&gen) {
            Some(c) => c,
            None => {
                rep.fail_with(format!("{name}: no closed-form cumulant"));
                continue;
            }
        };
        let built_phi = build_phi(&spec);
        let built_lambda = build_lambda(&spec);
        let (tm, tp) = spec.t_bounds();
        let (lo, hi) = gen.interior();
        let ts = grid(tm.max(lo), tp.min(hi));

        let mut e_phi = 0.0f64;
        for &t in &ts {
            e_phi = e_phi.max(err(built_phi.phi(t), gen.phi(t)));
            e_phi = e_phi.max(err(built_phi.phi_prime_ext(t), gen.phi_prime_ext(t)));
        }
        let (zl, zh) = closed.domain();
        let e_lambda = grid(zl, zh).iter().map(|&z| err(built_lambda.eval(z), closed.eval(z))).fold(0.0, f64::max);
        let conj = legendre_transform(closed.handle(), closed.domain());
        let e_conj = ts.iter().map(|&t| err(conj(t), gen.phi(t))).fold(0.0, f64::max);

        rep.check(e_phi <= 1e-8, format!("{name}: built phi error {e_phi:.3e} > 1e-8"));
        rep.check(e_lambda <= 1e-8, format!("{name}: built Lambda error {e_lambda:.3e} > 1e-8"));
        rep.check(e_conj <= 1e-7, format!("{name}: conjugate error {e_conj:.3e} > 1e-7"));
        worst_phi = worst_phi.max(e_phi);
        worst_lambda = worst_lambda.max(e_lambda);
        worst_conj = worst_conj.max(e_conj);
    }
    rep.metric("max_phi_error", worst_phi);
    rep.metric("max_lambda_error", worst_lambda);
    rep.metric("max_conjugate_error", worst_conj);
    rep
}
