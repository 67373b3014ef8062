use bsim_engine::partition::normalize_sums;
use bsim_engine::*;
use proptest::prelude::*;

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #[test]
    fn partition_sizes_cover_n(p in simplex(4), extra in 0usize..500) {
        let need = p.iter().map(|x| (1.0 / x).ceil() as usize).max().unwrap();
        let n = need + extra;
        if let Ok(part) = partition(&p, n) {
            prop_assert_eq!(part.sizes().iter().sum::<usize>(), n);
            prop_assert!(part.sizes().iter().all(|&s| s >= 1));
            for (s, x) in part.sizes()[..3].iter().zip(&p) {
                prop_assert!((*s as f64 - n as f64 * x).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn normalized_sums_add_to_one(s in prop::collection::vec(0.0f64..1e6, 2..8)) {
        if let Some(v) = normalize_sums(&s) {
            prop_assert_eq!(v.iter().sum::<f64>(), 1.0);
        } else {
            prop_assert!(s.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn projection_lands_on_the_equalities(x in prop::collection::vec(-5.0f64..5.0, 4)) {
        let spec = ConstraintSpec::Marginals { rows: 2, cols: 2, row_sums: vec![0.3, 0.7], col_sums: vec![0.6, 0.4], tol: 1e-9 };
        let proj = AffineProjector::new(&spec.equalities());
        let mut y = x.clone();
        proj.project(&mut y);
        prop_assert!(spec.contains(&y));
    }

    #[test]
    fn serialized_specs_keep_membership(b in -1.0f64..1.0, q in prop::collection::vec(-2.0f64..2.0, 3)) {
        let spec = ConstraintSpec::Or { of: vec![
            ConstraintSpec::Halfspace { a: vec![1.0, -1.0, 0.5], b, sense: Sense::Le },
            ConstraintSpec::Ball { center: vec![0.0; 3], radius: 0.5, weights: None },
        ]};
        let back: ConstraintSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        prop_assert_eq!(back.contains(&q), spec.contains(&q));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn same_seed_same_estimate(seed in any::<u64>(), threads in 1usize..4) {
        let gen = bsim_core::DivergenceGenerator::power(0.5, 1.0).unwrap();
        let omega = ConstraintSet::from_spec(ConstraintSpec::Halfspace { a: vec![1.0, 0.0], b: 0.7, sense: Sense::Ge });
        let s = BsSetup::new(gen, vec![0.5, 0.5], omega, Mode::Normalized).unwrap();
        let mut cfg = SimConfig::new(50, 500, seed);
        let a = is_estimate(&s, &[0.7, 0.3], &cfg).unwrap();
        cfg.threads = Some(threads);
        let b = is_estimate(&s, &[0.7, 0.3], &cfg).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
