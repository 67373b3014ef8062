use bsim_core::DivergenceGenerator;
use bsim_engine::*;

fn poisson_setup() -> BsSetup {
    let gen = DivergenceGenerator::power(1.0, 1.0).unwrap();
    let omega = ConstraintSet::from_spec(ConstraintSpec::Halfspace { a: vec![1.0, 0.0], b: 1.0, sense: Sense::Ge });
    BsSetup::new(gen, vec![0.5, 0.5], omega, Mode::Deterministic).unwrap()
}

#[test]
fn exact_pi_matches_poisson_tail() {
    let s = poisson_setup();
    let e = exact_pi(&s, 4, 1e-15, 1_000_000).unwrap();
    // P(POI(2) >= 4)
    let expect = 1.0 - (-2.0f64).exp() * (1.0 + 2.0 + 2.0 + 4.0 / 3.0);
    assert!((e.value - expect).abs() < 1e-12, "{} vs {expect}", e.value);
    assert!(e.tail_bound < 1e-14);
}

#[test]
fn naive_and_tilted_estimators_are_unbiased() {
    let s = poisson_setup();
    let exact = exact_pi(&s, 4, 1e-15, 1_000_000).unwrap().value;
    let cfg = SimConfig::new(4, 200_000, 42);
    let naive = naive_estimate(&s, &cfg).unwrap();
    let is = is_estimate(&s, &[1.0, 0.5], &cfg).unwrap();
    for e in [&naive, &is] {
        let z = (e.pi - exact) / e.pi_stderr;
        assert!(z.abs() < 4.0, "pi {} ± {} vs {exact}", e.pi, e.pi_stderr);
    }
    assert!(is.pi_stderr < naive.pi_stderr);
    assert_eq!(is.tilts[1], 0.0);
    assert!((is.tilts[0] - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let s = poisson_setup();
    let mut cfg = SimConfig::new(4, 20_000, 7);
    cfg.threads = Some(1);
    let a = is_estimate(&s, &[1.0, 0.5], &cfg).unwrap();
    cfg.threads = Some(4);
    let b = is_estimate(&s, &[1.0, 0.5], &cfg).unwrap();
    assert_eq!(a, b);
    cfg.seed = 8;
    let c = is_estimate(&s, &[1.0, 0.5], &cfg).unwrap();
    assert_ne!(a.pi, c.pi);
}

#[test]
fn zero_hits_report_infinite_rate() {
    let gen = DivergenceGenerator::power(2.0, 1.0).unwrap();
    let omega = ConstraintSet::from_spec(ConstraintSpec::Halfspace { a: vec![1.0, 0.0], b: 50.0, sense: Sense::Ge });
    let s = BsSetup::new(gen, vec![0.5, 0.5], omega, Mode::Deterministic).unwrap();
    let e = naive_estimate(&s, &SimConfig::new(100, 1000, 1)).unwrap();
    assert_eq!(e.hits, 0);
    assert_eq!(e.rate, f64::INFINITY);
    assert_eq!(e.zero_hit_bound, Some(3e-3));
    assert!(!e.warnings.is_empty());
    let json = serde_json::to_string(&e).unwrap();
    assert!(json.contains("\"rate\":\"inf\""));
}

fn simplex_setup(gamma: f64) -> BsSetup {
    let gen = DivergenceGenerator::power(gamma, 1.0).unwrap();
    let omega = ConstraintSet::from_spec(ConstraintSpec::Halfspace { a: vec![1.0, 0.0, 0.0], b: 0.5, sense: Sense::Ge });
    BsSetup::new(gen, vec![0.2, 0.3, 0.5], omega, Mode::Normalized).unwrap()
}

#[test]
fn descent_reaches_the_grid_minimum() {
    for gamma in [2.0, 1.0, 0.0] {
        let s = simplex_setup(gamma);
        let grid = grid_min_divergence(&s, None, 200_000).unwrap();
        let p = dominating_point(&s, &ProxyConfig::density(20_000), 3, None).unwrap();
        assert!(s.omega().contains(&p.q));
        assert!((p.objective - grid.value).abs() < 1e-6 * grid.value.max(1.0), "{gamma}: {} vs {}", p.objective, grid.value);
    }
}

#[test]
fn normalized_estimate_inverts_to_the_divergence() {
    // the γ = 2 minimum over {q ∈ simplex, q1 >= 1/2} is 0.28125
    let s = simplex_setup(2.0);
    let cfg = BsConfig { sim: SimConfig::new(2000, 20_000, 5), proxy: Some(ProxyConfig::density(20_000)) };
    let e = run(&s, &cfg, &Target::Divergence).unwrap();
    assert!((e.value - 0.28125).abs() < 0.02, "{} ± {}", e.value, e.value_stderr);
}

#[test]
fn hit_run_proxy_finds_members() {
    let s = simplex_setup(1.0);
    let p = find_proxy(&s, &ProxyConfig::hit_run(20, 5000), 9, None).unwrap();
    assert!(p.members > 0);
    assert!(s.omega().contains(&p.q));
    let e = find_proxy(&s, &ProxyConfig::given(vec![0.1, 0.4, 0.5]), 9, None);
    assert!(e.is_err());
}

#[test]
fn proxy_config_json_is_flat_and_strict() {
    let c: ProxyConfig = serde_json::from_str(r#"{"method":"density","budget":500,"refine":false}"#).unwrap();
    assert_eq!(c.method, ProxyMethod::Density { budget: 500 });
    assert!(!c.refine);
    let back: ProxyConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
    for bad in [
        r#"{"method":"density"}"#,
        r#"{"method":"density","budget":5,"q":[1.0]}"#,
        r#"{"method":"density","budget":5,"extra":1}"#,
        r#"{"method":"walk","budget":5}"#,
    ] {
        assert!(serde_json::from_str::<ProxyConfig>(bad).is_err(), "{bad}");
    }
}
