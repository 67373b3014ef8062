use bsim_laws::rng::stream;
use bsim_laws::{check_mean_one, convolution_ks, WeightLaw};

fn all_laws() -> Vec<WeightLaw> {
    use WeightLaw::*;
    vec![
        TiltedStable { gamma: -1.0, scale: 1.0 },
        TiltedStable { gamma: -0.5, scale: 1.5 },
        CompoundPoissonGamma { gamma: 0.5, scale: 1.0 },
        DistortedStable { gamma: 3.0, scale: 1.0 },
        Gaussian { scale: 4.0 },
        GammaLaw { scale: 1.0 },
        ScaledPoisson { scale: 2.0 },
        ShiftedPoisson { anchor: 0.5 },
        ScaledNegBinomial { alpha: 1.0, scale: 1.0 },
        ScaledBinomial { m: 4, scale: 2.0 },
        ModTiltedStable { beta: 0.5, scale: 1.0 },
        TwoPointLaw { z1: 0.0, z2: 2.0 },
        GenAsymLaplaceLaw { alpha: 1.0, beta1: 2.0, beta2: 1.0, scale: 1.0 },
    ]
}

/// Interior points with `2z` inside the MGF domain.
fn test_points(law: &WeightLaw) -> Vec<f64> {
    let (lo, hi) = law.domain().unwrap();
    let w_hi = if hi.is_finite() { (0.4 * hi).min(0.5) } else { 0.5 };
    let w_lo = if lo.is_finite() { (0.4 * lo).max(-0.5) } else { -0.5 };
    vec![w_lo, 0.5 * w_hi, w_hi]
}

#[test]
fn spec_examples() {
    let pois = WeightLaw::ScaledPoisson { scale: 1.0 };
    let pmf = pois.sampler().unwrap().lattice_pmf(1e-14, 1000).unwrap();
    assert!((pmf.probs[0] - (-1.0f64).exp()).abs() < 1e-15);
    assert_eq!(pmf.value(3), 3.0);

    let two = WeightLaw::TwoPointLaw { z1: 0.0, z2: 2.0 };
    let pmf = two.sampler().unwrap().lattice_pmf(0.0, 10).unwrap();
    // index counts draws at z1 = 0
    assert_eq!(pmf.value(1), 0.0);
    assert!((pmf.probs[1] - 0.5).abs() < 1e-15);

    let g = WeightLaw::GammaLaw { scale: 1.0 };
    assert!((g.log_mgf(0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
    let tilted = g.block(2.0, 0.5).unwrap();
    assert!((tilted.mean() - 4.0).abs() < 1e-6);

    let p = pois.block(3.0, 2f64.ln()).unwrap();
    let pmf = p.lattice_pmf(1e-14, 1000).unwrap();
    assert!((pmf.probs[0] - (-6.0f64).exp()).abs() < 1e-15);

    let gauss = WeightLaw::Gaussian { scale: 1.0 };
    assert!(gauss.log_isf(1.0, 2.0, 3.0).unwrap().abs() < 1e-15);
    assert_eq!(gauss.log_mgf(0.0).unwrap(), 0.0);
    assert_eq!(gauss.log_isf(0.0, 5.0, 17.0).unwrap(), 0.0);

    let gl = WeightLaw::Gaussian { scale: 4.0 };
    let s = gl.sampler().unwrap();
    let mut rng = stream(11, 9, 0);
    let xs: Vec<f64> = (0..200_000).map(|_| s.sample(&mut rng)).collect();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    assert!((v - 0.25).abs() < 0.005, "{v}");
}

#[test]
fn generator_round_trip() {
    for law in all_laws() {
        let g = law.generator().unwrap();
        assert_eq!(WeightLaw::for_generator(&g).unwrap(), law);
    }
    let gap = bsim_core::DivergenceGenerator::generalized_kl(-0.3, 1.0).unwrap();
    assert!(WeightLaw::for_generator(&gap).is_err());
}

#[test]
fn tilting_is_exact_on_lattices() {
    let cases: Vec<(WeightLaw, f64, f64)> = vec![
        (WeightLaw::ScaledPoisson { scale: 2.0 }, 3.0, 0.4),
        (WeightLaw::ShiftedPoisson { anchor: -0.3 }, 2.5, -0.7),
        (WeightLaw::ScaledNegBinomial { alpha: 0.5, scale: 1.0 }, 2.0, 0.3),
        (WeightLaw::ScaledBinomial { m: 3, scale: 1.5 }, 2.0, 0.8),
        (WeightLaw::TwoPointLaw { z1: -1.0, z2: 3.0 }, 5.0, 0.25),
    ];
    for (law, nu, tau) in cases {
        let base = law.block(nu, 0.0).unwrap().lattice_pmf(1e-15, 10_000).unwrap();
        let tilted_sampler = law.block(nu, tau).unwrap();
        let tilted = tilted_sampler.lattice_pmf(1e-15, 10_000).unwrap();
        assert_eq!(base.offset, tilted.offset);
        let lnorm = nu * law.log_mgf(tau).unwrap();
        for j in 0..base.probs.len().min(tilted.probs.len()).min(40) {
            let expect = base.probs[j] * (tau * base.value(j) - lnorm).exp();
            let got = tilted.probs[j];
            assert!((got - expect).abs() <= 1e-12 * expect.max(1e-300), "{law:?} j={j}: {got} vs {expect}");
            assert!((tilted_sampler.log_isf(base.value(j)) + tau * base.value(j) - lnorm).abs() < 1e-12);
        }
    }
}

#[test]
fn mean_and_mgf() {
    for (i, law) in all_laws().into_iter().enumerate() {
        let rep = check_mean_one(&law, 200_000, &test_points(&law), 100 + i as u64).unwrap();
        assert!(rep.passes(4.0, 4.0), "{rep:?}");
    }
}

#[test]
fn convolution_consistency() {
    for (i, law) in all_laws().into_iter().enumerate() {
        for &nk in &[2u64, 5] {
            let rep = convolution_ks(&law, nk, 20_000, 1e-3, 500 + i as u64).unwrap();
            assert!(rep.passes(), "{rep:?}");
        }
    }
}

#[test]
fn tilted_blocks_reweight_to_untilted() {
    // E_tilted[1{S > t} e^{log_isf(S)}] equals the untilted P(S > t)
    let cases = vec![
        (WeightLaw::TiltedStable { gamma: -1.0, scale: 1.0 }, 0.3),
        (WeightLaw::TiltedStable { gamma: -2.0, scale: 1.0 }, 0.2),
        (WeightLaw::CompoundPoissonGamma { gamma: 0.5, scale: 1.0 }, 0.5),
        (WeightLaw::DistortedStable { gamma: 3.0, scale: 1.0 }, 0.4),
        (WeightLaw::ModTiltedStable { beta: 0.5, scale: 1.0 }, 0.3),
        (WeightLaw::GenAsymLaplaceLaw { alpha: 1.0, beta1: 2.0, beta2: 1.0, scale: 1.0 }, 0.5),
        (WeightLaw::ScaledNegBinomial { alpha: 1.0, scale: 1.0 }, 0.2),
    ];
    let nu = 3.0;
    let n = 200_000;
    for (law, tau) in cases {
        let plain = law.block(nu, 0.0).unwrap();
        let tilted = law.block(nu, tau).unwrap();
        let t = nu * 1.5;
        let mut r1 = stream(3, 1, 0);
        let mut r2 = stream(3, 1, 1);
        let p: Vec<f64> = (0..n).map(|_| if plain.sample(&mut r1) > t { 1.0 } else { 0.0 }).collect();
        let q: Vec<f64> = (0..n)
            .map(|_| {
                let s = tilted.sample(&mut r2);
                if s > t {
                    tilted.log_isf(s).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let stats = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / n as f64;
            let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
            (m, (var / n as f64).sqrt())
        };
        let ((mp, sp), (mq, sq)) = (stats(&p), stats(&q));
        let z = (mp - mq) / (sp * sp + sq * sq).sqrt();
        assert!(z.abs() < 4.0, "{law:?}: plain {mp}±{sp}, tilted {mq}±{sq}");
        assert!((tilted.mean() - nu * 1.0).abs() > 1e-3, "tilt should move the mean");
    }
}

#[test]
fn custom_and_gap_generators_are_unsupported() {
    assert!(bsim_core::DivergenceGenerator::power(1.5, 1.0).is_err());
    let law = WeightLaw::GammaLaw { scale: 1.0 };
    assert!(law.block(2.0, 1.0).is_err());
    assert!(WeightLaw::TwoPointLaw { z1: 0.0, z2: 2.0 }.block(2.5, 0.0).is_err());
}
