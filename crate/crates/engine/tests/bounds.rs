use bsim_core::{divergence, DivergenceGenerator};
use bsim_engine::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn jensen_shannon_bounds_bracket_the_grid_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let gen = DivergenceGenerator::jensen_shannon(1.0).unwrap();
    for i in 0..5 {
        let mut p: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..1.0)).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let t = p[0] + rng.gen_range(0.1..0.3);
        let omega = ConstraintSet::from_spec(ConstraintSpec::Halfspace { a: vec![1.0, 0.0, 0.0], b: t, sense: Sense::Ge });
        let setup = BsSetup::new(gen.clone(), p.clone(), omega, Mode::Normalized).unwrap();
        let cfg = BsConfig { sim: SimConfig::new(10_000_000, 4000, 100 + i), proxy: Some(ProxyConfig::density(20_000)) };
        let b = bounds_general(&setup, &cfg, None).unwrap();
        let oracle = grid_scan(
            &GridDomain::Simplex { k: 3, total: 1.0 },
            200_000,
            |q| setup.omega().contains(q),
            |q| divergence(&gen, q, &p).unwrap_or(f64::INFINITY),
        )
        .unwrap()
        .value;
        println!("{i}: lower {} oracle {oracle} upper {} (converged {})", b.lower, b.upper, b.converged);
        assert!(b.lower <= oracle + 1e-6 && oracle <= b.upper + 1e-9, "{} {oracle} {}", b.lower, b.upper);
    }
}

#[test]
fn power_bounds_coincide_with_the_inversion() {
    let gen = DivergenceGenerator::power(2.0, 1.0).unwrap();
    let omega = ConstraintSet::from_spec(ConstraintSpec::Halfspace { a: vec![1.0, 0.0, 0.0], b: 0.5, sense: Sense::Ge });
    let setup = BsSetup::new(gen, vec![0.2, 0.3, 0.5], omega, Mode::Normalized).unwrap();
    let cfg = BsConfig { sim: SimConfig::new(100_000, 4000, 9), proxy: Some(ProxyConfig::density(20_000)) };
    let b = bounds_general(&setup, &cfg, Some(0.01)).unwrap();
    assert!((b.lower - 0.28125).abs() < 0.01, "{b:?}");
    assert!((b.upper - 0.28125).abs() < 0.01, "{b:?}");
}
