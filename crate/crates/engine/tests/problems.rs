use bsim_core::{divergence, DivergenceGenerator, EntropyFamily, Extremum};
use bsim_engine::problems::*;
use bsim_engine::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn quadratic_identity_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = 5;
    let c1: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let c2: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..3.0) * if rng.gen() { 1.0 } else { -1.0 }).collect();
    let c3: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..3.0)).collect();
    let red = reduce_quadratic(&c1, &c2, &c3, &ConstraintSpec::All).unwrap();
    let gen = DivergenceGenerator::power(2.0, 1.0).unwrap();
    for _ in 0..100 {
        let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let direct = quadratic_objective(&c1, &c2, &c3, &x);
        let via = red.offset + divergence(&gen, &quadratic_forward(&c2, &x), red.setup.p()).unwrap();
        assert!((direct - via).abs() < 1e-12 * direct.abs().max(1.0), "{direct} vs {via}");
    }
}

#[test]
fn quadratic_perfect_square_and_membership() {
    let red = reduce_quadratic(&[1.0], &[-2.0], &[1.0], &ConstraintSpec::All).unwrap();
    let gen = DivergenceGenerator::power(2.0, 1.0).unwrap();
    let q = quadratic_forward(&[-2.0], &[1.0]);
    assert!((red.offset + divergence(&gen, &q, red.setup.p()).unwrap()).abs() < 1e-15);
    // x in [1, 2] <-> q = 2x in [2, 4]
    let c = ConstraintSpec::Box { lower: vec![Some(1.0)], upper: vec![Some(2.0)] };
    let red = reduce_quadratic(&[0.0], &[-2.0], &[1.0], &c).unwrap();
    for x in [0.5, 1.0, 1.5, 2.0, 2.5] {
        assert_eq!(red.setup.omega().contains(&quadratic_forward(&[-2.0], &[x])), c.contains(&[x]));
    }
}

#[test]
fn linear_identity_and_constants() {
    let (_, c1) = linear_weights(&[1.0, 1.0], 2.0).unwrap();
    assert!((c1 - 0.5).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for gamma in [2.0, 3.0, 0.5, -1.0] {
        let cost: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..5.0)).collect();
        for _ in 0..100 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..3.0)).collect();
            let direct: f64 = x.iter().zip(&cost).map(|(a, b)| a * b).sum();
            let via = linear_via_hellinger(&cost, gamma, &x).unwrap();
            assert!((direct - via).abs() < 1e-12 * direct.max(1.0), "{gamma}: {direct} vs {via}");
        }
    }
    // binary points are fixed by x^γ at γ = 2
    for b in [0.0f64, 1.0] {
        assert_eq!(b.powf(2.0), b);
    }
    assert!(linear_weights(&[1.0, 0.0], 2.0).is_err());
    assert!(linear_weights(&[1.0, 1.0], 1.5).is_err());
}

#[test]
fn transport_identities_and_forced_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let q: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
        let direct = transport_objective(&q);
        assert!((direct - transport_divergence(&q).unwrap()).abs() < 1e-12 * direct.max(1.0));
        assert!((direct - transport_expanded(&q)).abs() < 1e-12 * direct.max(1.0));
    }
    let red = reduce_transport(&[1.0, 0.0], &[0.5, 0.5], &None).unwrap();
    let forced = [0.5, 0.5, 0.0, 0.0];
    assert!(red.setup.omega().contains(&forced));
    assert!((transport_objective(&forced) - 1.0).abs() < 1e-15);
    assert!(reduce_transport(&[1.0], &[0.5], &None).is_err());
}

#[test]
fn assignment_reduction() {
    let cost = vec![vec![1.0, 10.0], vec![10.0, 1.0]];
    let red = reduce_assignment(&cost, 0.1, 0.1, 2.0, &None).unwrap();
    assert_eq!(red.start.as_deref(), Some(&[1.0, 0.0, 0.0, 1.0][..]));
    let omega = red.setup.omega();
    assert!(omega.contains(&[1.0, 0.0, 0.0, 1.0]));
    assert!(omega.contains(&[0.95, 0.05, 0.05, 0.95]));
    assert!(!omega.contains(&[0.5, 0.5, 0.5, 0.5]));
    assert!(!omega.contains(&[1.0, 0.0, 0.0, 1.0 + 1e-8]));
    // the discrete optimum: c1 · H_2(Q, P) = Σ c·x = 2 at the identity
    let (p, c1) = linear_weights(&[1.0, 10.0, 10.0, 1.0], 2.0).unwrap();
    let h = bsim_core::hellinger_integral(2.0, &[1.0, 0.0, 0.0, 1.0], &p).unwrap();
    assert!((c1 * h - 2.0).abs() < 1e-12);
    // eps = 0 leaves only the 0/1 points
    let red = reduce_assignment(&cost, 0.0, 0.0, 2.0, &None).unwrap();
    assert!(!red.setup.omega().contains(&[0.99, 0.01, 0.01, 0.99]));
    assert!(reduce_assignment(&cost, 0.6, 0.5, 2.0, &None).is_err());
}

fn sim(n: usize, l: u64) -> SolveConfig {
    SolveConfig::new(BsConfig { sim: SimConfig::new(n, l, 11), proxy: None })
}

#[test]
fn transport_trivial_instance_is_near_zero() {
    let inst = ProblemInstance::Transport { mu: vec![0.5, 0.5], nu: vec![0.5, 0.5], side_constraints: None };
    let r = solve(&inst, &sim(1000, 20_000)).unwrap();
    assert!(r.value.abs() < 0.02, "{r:?}");
}

#[test]
fn entropy_max_matches_oracle() {
    let inst = ProblemInstance::EntropyMax {
        family: EntropyFamily::Shannon,
        k: 3,
        constraints: ConstraintSpec::Halfspace { a: vec![1.0, 0.0, 0.0], b: 0.5, sense: Sense::Ge },
        total: 1.0,
    };
    let r = solve(&inst, &sim(2000, 20_000)).unwrap();
    assert_eq!(r.extremum, Extremum::Max);
    assert!((r.value - 1.039721).abs() < 0.03, "{} ± {}", r.value, r.value_stderr);
}

#[test]
fn quadratic_box_around_the_target_recovers_the_offset() {
    // ‖x - v‖² with v inside the box: optimum 0
    let v = [1.0, -2.0, 0.5];
    let inst = ProblemInstance::SeparableQuadratic {
        c1: v.iter().map(|x| x * x).collect(),
        c2: v.iter().map(|x| -2.0 * x).collect(),
        c3: vec![1.0; 3],
        constraints: ConstraintSpec::Box { lower: vec![Some(0.0), Some(-3.0), Some(0.0)], upper: vec![Some(2.0), Some(-1.0), Some(1.0)] },
    };
    let r = solve(&inst, &sim(500, 5000)).unwrap();
    assert!(r.value.abs() < 0.02, "{r:?}");
    assert!(r.offset.abs() < 1e-15);
}

#[test]
fn problem_json_round_trip() {
    let json = r#"{"problem":"transport","mu":[0.5,0.5],"nu":[0.5,0.5]}"#;
    let inst: ProblemInstance = serde_json::from_str(json).unwrap();
    assert_eq!(inst.name(), "transport");
    let back: ProblemInstance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
    assert_eq!(back, inst);
}
