use bsim_core::divergence::{HTransform};
use bsim_core::scaling::power_divergence_from_rate;
use bsim_core::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn phi_values() {
    let g2 = DivergenceGenerator::power(2.0, 1.0).unwrap();
    assert_eq!(g2.phi(1.0), 0.0);
    assert_eq!(g2.phi(3.0), 2.0);
    let g0 = DivergenceGenerator::power(0.0, 1.0).unwrap();
    assert_eq!(g0.phi(0.0), f64::INFINITY);
    let g1 = DivergenceGenerator::power(1.0, 1.0).unwrap();
    assert_eq!(g1.phi_prime(1.0).unwrap(), 0.0);
    assert!(close(g1.phi_prime(2.0).unwrap(), 2f64.ln(), 1e-15));
    assert!(close(g2.phi_prime(0.25).unwrap(), -0.75, 1e-15));
    assert!(g0.phi_prime(-1.0).is_err());
    assert!(DivergenceGenerator::power(1.5, 1.0).is_err());
}

#[test]
fn divergence_values() {
    let g2 = DivergenceGenerator::power(2.0, 1.0).unwrap();
    let g1 = DivergenceGenerator::power(1.0, 1.0).unwrap();
    let p = [0.5, 0.5];
    assert_eq!(divergence(&g2, &p, &p).unwrap(), 0.0);
    assert!(close(divergence(&g2, &[1.0, 0.0], &p).unwrap(), 0.5, 1e-15));
    assert!(close(divergence(&g1, &[0.25, 0.75], &p).unwrap(), 0.130812, 1e-6));
    assert!(divergence(&g2, &[1.0], &p).is_err());
    let w = weighted_divergence(&g2, &[1.0, 0.0], &p, &[2.0, 2.0]).unwrap();
    assert!(close(w, 1.0, 1e-15));
    assert!(weighted_divergence(&g2, &[1.0, 0.0], &p, &[0.0, 2.0]).is_err());
}

#[test]
fn bs1_normalization() {
    let (pt, m) = normalize_bs1(&[1.0, 1.0, 1.0, 1.0]).unwrap();
    assert_eq!(m, 4.0);
    assert_eq!(pt.values(), &[0.25; 4]);
    let (pt, m) = normalize_bs1(&[2.0, 3.0, 5.0]).unwrap();
    assert_eq!(m, 10.0);
    for (a, b) in pt.values().iter().zip([0.2, 0.3, 0.5]) {
        assert!(close(*a, b, 1e-15));
    }
    assert!(normalize_bs1(&[0.0, 0.0]).is_err());
}

#[test]
fn hellinger_and_kl_values() {
    let p = [0.5, 0.5];
    assert!(close(hellinger_integral(0.5, &p, &p).unwrap(), 1.0, 1e-15));
    assert!(close(hellinger_integral(0.5, &[1.0, 0.0], &p).unwrap(), 0.707107, 1e-6));
    assert!(close(hellinger_integral(2.0, &[0.25, 0.75], &p).unwrap(), 1.25, 1e-15));
    assert_eq!(modified_kl(&p, &p).unwrap(), 0.0);
    assert_eq!(modified_rev_kl(&p, &p).unwrap(), 0.0);
    assert!(close(modified_kl(&[0.25, 0.75], &p).unwrap(), 0.130812, 1e-6));
    assert!(close(modified_kl(&[1.0, 1.0], &p).unwrap(), 1.386294, 1e-6));
}

#[test]
fn renyi_values() {
    let p = [0.5, 0.5];
    assert!(close(renyi(0.5, &p, &p).unwrap(), 0.0, 1e-15));
    assert!(close(renyi(0.5, &[1.0, 0.0], &p).unwrap(), 1.386294, 1e-6));
    let bh = HTransform::Arccos { c5: 1.0, c6: 1.0 };
    assert!(close(renyi_transform(&bh, 0.5, &[1.0, 0.0], &p).unwrap(), 0.785398, 1e-6));
    assert!(close(escort_renyi(2.0, 3.0, &[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0, 1e-14));
}

#[test]
fn entropy_values() {
    assert!(close(entropy(&EntropyFamily::Shannon, &[0.25; 4]).unwrap(), 4f64.ln(), 1e-15));
    assert_eq!(entropy(&EntropyFamily::HavrdaCharvat { gamma: 2.0 }, &[1.0, 0.0]).unwrap(), 0.0);
    assert!(close(entropy(&EntropyFamily::GammaNorm { gamma: 2.0 }, &[0.6, 0.8]).unwrap(), 1.0, 1e-15));
    assert!(EntropyFamily::Generalized { gamma: 2.0, c1: 0.0, c2: 1.0, c3: 0.0 }.resolve().is_err());
}

#[test]
fn flatten_round_trip() {
    assert_eq!(flatten_matrix(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), vec![1.0, 0.0, 0.0, 1.0]);
    let m = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
    let v = flatten_matrix(&m).unwrap();
    assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0]);
    assert_eq!(unflatten(&v, 2, 2).unwrap(), m);
}

#[test]
fn lemma_values() {
    let r = min_over_m_closed(2.0, 1.0, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
    assert!(r.value.abs() < 1e-15 && (r.m - 1.0).abs() < 1e-15);
    let r = min_over_m_closed(2.0, 1.0, &[0.25, 0.75], &[0.5, 0.5]).unwrap();
    assert!(close(r.value, 0.1, 1e-15) && close(r.m, 0.8, 1e-15));
    assert!(close(power_divergence_from_rate(2.0, 1.0, 1.0, 0.25).unwrap(), 0.5, 1e-15));
}
