//! Criterion 2: every weight law has mean one, the right moment generating
//! function and block sums distributed as convolutions of single draws.

use rayon::prelude::*;

use bsim_laws::{check_mean_one, convolution_ks, WeightLaw};

use crate::report::CriterionReport;

pub fn all_laws() -> Vec<WeightLaw> {
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

/// Three interior points `z` with `2z` inside the MGF domain, so that the
/// empirical MGF has finite variance.
pub fn mgf_points(law: &WeightLaw) -> Vec<f64> {
    let (lo, hi) = law.domain().unwrap_or((0.0, 0.0));
    let w_hi = if hi.is_finite() { (0.4 * hi).min(0.5) } else { 0.5 };
    let w_lo = if lo.is_finite() { (0.4 * lo).max(-0.5) } else { -0.5 };
    vec![w_lo, 0.5 * w_hi, w_hi]
}

const MEAN_DRAWS: usize = 1_000_000;
const KS_DRAWS: usize = 100_000;
const KS_ALPHA: f64 = 1e-3;
const BLOCKS: [u64; 3] = [2, 5, 20];

pub fn criterion_2(seed: u64) -> CriterionReport {
    let mut rep = CriterionReport::new(2, "weight laws");
    let laws = all_laws();
    let results: Vec<_> = laws
        .par_iter()
        .enumerate()
        .map(|(i, law)| {
            let mean = check_mean_one(law, MEAN_DRAWS, &mgf_points(law), seed.wrapping_add(i as u64));
            let ks: Vec<_> = BLOCKS
                .iter()
                .map(|&b| convolution_ks(law, b, KS_DRAWS, KS_ALPHA, seed.wrapping_add(1000 + 10 * i as u64 + b)))
                .collect();
            (mean, ks)
        })
        .collect();
    for (i, (law, (mean, ks))) in laws.iter().zip(results).enumerate() {
        let tag = format!("{i:02}_{}", law.name());
        match mean {
            Ok(m) => {
                rep.check(m.passes(4.0, 3.0), format!("{tag}: mean {} ± {} or MGF mismatch", m.mean, m.stderr));
                rep.metric(format!("{tag}.mean_score"), m.score);
                for (j, c) in m.mgf.iter().enumerate() {
                    rep.metric(format!("{tag}.mgf_score_{j}"), c.score);
                }
            }
            Err(e) => rep.fail_with(format!("{tag}: {e}")),
        }
        for (b, r) in BLOCKS.iter().zip(ks) {
            match r {
                Ok(k) => {
                    rep.check(k.passes(), format!("{tag}: KS n_k={b} statistic {} > {}", k.statistic, k.critical));
                    rep.metric(format!("{tag}.ks_{b}"), k.statistic);
                }
                Err(e) => rep.fail_with(format!("{tag} n_k={b}: {e}")),
            }
        }
    }
    rep
}
