use bsim_core::scaling::{
    hellinger_identity_residual, power_divergence_from_rate, rate_from_power_divergence,
};
use bsim_core::*;
use proptest::prelude::*;

const GAMMAS: [f64; 8] = [-1.5, -1.0, 0.0, 0.3, 0.5, 1.0, 2.0, 3.0];

fn prob(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn positive(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..2.0, k)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn generators() -> Vec<DivergenceGenerator> {
    let mut v: Vec<_> = GAMMAS.iter().map(|&g| DivergenceGenerator::power(g, 1.3).unwrap()).collect();
    v.push(DivergenceGenerator::jensen_shannon(1.0).unwrap());
    v.push(DivergenceGenerator::generalized_kl(-0.4, 1.0).unwrap());
    v.push(DivergenceGenerator::anchored_kl(-0.5).unwrap());
    v.push(DivergenceGenerator::blended_weight_chi_sq(0.6, 1.0).unwrap());
    v.push(DivergenceGenerator::two_point(-0.5, 4.0).unwrap());
    v.push(DivergenceGenerator::gen_asym_laplace(0.5, 1.5, 2.0, 1.0).unwrap());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reflexive_and_positive(p in prob(3), q in positive(3)) {
        for gen in generators() {
            prop_assert!(divergence(&gen, &p, &p).unwrap().abs() < 1e-14);
            // keep Q inside the effective domain of the bounded families
            let (lo, hi) = gen.interior();
            let qq: Vec<f64> = q.iter().zip(&p).map(|(x, pk)| {
                let t = (x / pk).clamp(lo.max(0.0) + 1e-3, if hi.is_finite() { hi - 1e-3 } else { f64::MAX });
                t * pk
            }).collect();
            if qq.iter().zip(&p).any(|(a, b)| (a - b).abs() > 1e-6) {
                let d = divergence(&gen, &qq, &p).unwrap();
                prop_assert!(d > 0.0, "{gen:?} {qq:?} {p:?} gives {d}");
            }
        }
    }

    #[test]
    fn hellinger_identity(p in prob(4), q in positive(4), gi in 0usize..8) {
        let g = GAMMAS[gi];
        let r = hellinger_identity_residual(g, 1.0, &q, &p).unwrap();
        prop_assert!(r.abs() < 1e-12 * (1.0 + hellinger_integral(g, &q, &p).unwrap_or(1.0)), "gamma {g}: residual {r}");
    }

    #[test]
    fn weighted_rescaling(p in positive(3), q in positive(3), c in positive(3), gi in 0usize..8) {
        let gen = DivergenceGenerator::power(GAMMAS[gi], 1.0).unwrap();
        let w = weighted_divergence(&gen, &q, &p, &c).unwrap();
        let qc: Vec<f64> = q.iter().zip(&c).map(|(a, b)| a * b).collect();
        let pc: Vec<f64> = p.iter().zip(&c).map(|(a, b)| a * b).collect();
        let d = divergence(&gen, &qc, &pc).unwrap();
        prop_assert!(rel(w, d) < 1e-12);
    }

    #[test]
    fn bs1_identity(p in positive(3), q in positive(3), gi in 0usize..8) {
        let g = GAMMAS[gi];
        let (pt, m) = normalize_bs1(&p).unwrap();
        let d = divergence(&DivergenceGenerator::power(g, 1.0).unwrap(), &q, &p).unwrap();
        let qs: Vec<f64> = q.iter().map(|x| x / m).collect();
        let ds = divergence(&DivergenceGenerator::power(g, m).unwrap(), &qs, pt.values()).unwrap();
        prop_assert!(rel(d, ds) < 1e-12, "{d} vs {ds}");
    }

    #[test]
    fn min_over_m_closed_matches_numeric(p in prob(3), q in positive(3), gi in 0usize..8, scale in 0.5f64..3.0) {
        let g = GAMMAS[gi];
        let closed = min_over_m_closed(g, scale, &q, &p).unwrap();
        let gen = DivergenceGenerator::power(g, scale).unwrap();
        let numeric = min_over_m_numeric(&gen, &q, &p, 1e-15).unwrap();
        prop_assert!((closed.value - numeric.value).abs() < 1e-10, "{closed:?} vs {numeric:?}");
    }

    #[test]
    fn inversion_round_trip(p in prob(3), q in positive(3), gi in 0usize..8) {
        let g = GAMMAS[gi];
        let a: f64 = q.iter().sum();
        let gen = DivergenceGenerator::power(g, 1.0).unwrap();
        let d = divergence(&gen, &q, &p).unwrap();
        let rate = rate_from_power_divergence(g, 1.0, a, d).unwrap();
        let back = power_divergence_from_rate(g, 1.0, a, rate).unwrap();
        prop_assert!(rel(back, d) < 1e-12, "gamma {g}: {d} -> {rate} -> {back}");
    }

    #[test]
    fn generators_are_convex(t in -3.0f64..6.0) {
        for gen in generators() {
            let (lo, hi) = gen.interior();
            let h = 1e-3;
            if t - h > lo && t + h < hi {
                let d2 = gen.phi(t + h) - 2.0 * gen.phi(t) + gen.phi(t - h);
                prop_assert!(d2 >= -1e-12, "{gen:?} at {t}: {d2}");
            }
        }
    }
}
