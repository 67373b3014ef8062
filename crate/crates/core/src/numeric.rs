//! Scalar numerics: root bracketing, golden-section search, adaptive
//! Gauss-Kronrod quadrature, one-sided limits, log-sum-exp and the
//! two-sample Kolmogorov-Smirnov statistic.

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Minimizes a unimodal `f` on `[lo, hi]`; returns `(x, f(x))` with `|x - x*| <= tol`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parameter(format!("bad bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > tol && iter < 500 {
        if fc.is_nan() || fd.is_nan() {
            return Err(Error::Numeric("objective is NaN".into()));
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let (x, fx) = [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best });
    if !fx.is_finite() && fx.is_nan() {
        return Err(Error::Numeric("objective is NaN".into()));
    }
    Ok((x, fx))
}

/// Root of a function with a sign change on `[lo, hi]`.
///
/// Illinois regula falsi safeguarded by bisection; at most `max_iter` steps.
/// The function may return `±inf` at points it cannot evaluate.
pub fn bracketed_root<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::Numeric(format!(
            "no sign change on [{lo}, {hi}]: f = ({fa}, {fb})"
        )));
    }
    let mut side = 0i32;
    for _ in 0..max_iter {
        let width = b - a;
        if width.abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        let mut x = if fa.is_finite() && fb.is_finite() {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        // keep regula falsi steps away from the bracket ends
        let lo_guard = a.min(b) + 0.01 * width.abs();
        let hi_guard = a.max(b) - 0.01 * width.abs();
        if !(x > lo_guard && x < hi_guard) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(Error::Numeric(format!("NaN at x = {x}")));
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Plain bisection for an increasing function on `[lo, hi]`.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// `tol` is an absolute tolerance on the whole integral. Oriented: `b < a`
/// returns the negated integral. Endpoints are never evaluated.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let total = b - a;
    // relative floor: an absolute target below rounding of a large integral is unreachable
    let (coarse, _) = gk15(&f, a, b);
    let target = tol.max(1e-13 * coarse.abs());
    let mut stack = vec![(a, b, 0u32)];
    let mut sum = 0.0;
    let mut budget = 50_000usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&f, lo, hi);
        budget = budget.saturating_sub(1);
        let local_tol = (target * (hi - lo) / total).max(1e-14 * val.abs());
        if err <= local_tol || depth >= 48 || budget == 0 || !val.is_finite() {
            sum += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    sum
}

/// One-sided limit of `f` as its argument approaches `x0` along `x0 + dir * h`.
///
/// `x0` may be `±inf`, in which case the sequence `dir * 2^j` (with `dir`
/// pointing outward) is used. Convergent sequences are Aitken-extrapolated;
/// sequences whose increments do not contract are reported as `±inf`.
pub fn one_sided_limit<F: Fn(f64) -> f64>(f: F, x0: f64, dir: f64, scale: f64) -> f64 {
    let points: Vec<f64> = if x0.is_finite() {
        (0..34)
            .map(|j| x0 + dir * scale * 0.5f64.powi(j))
            .filter(|&x| x != x0)
            .collect()
    } else {
        (0..60).map(|j| x0.signum() * scale * 2f64.powi(j)).collect()
    };
    let vals: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    let mut last = f64::NAN;
    let mut prev_diff = f64::NAN;
    let mut ratios = Vec::new();
    let mut est = f64::NAN;
    for (i, &v) in vals.iter().enumerate() {
        if v.is_infinite() {
            return v;
        }
        if v.is_nan() {
            break;
        }
        if i > 0 {
            let d = v - last;
            if prev_diff.is_finite() && prev_diff != 0.0 {
                ratios.push(d / prev_diff);
                let denom = d - prev_diff;
                est = if denom != 0.0 { v - d * d / denom } else { v };
            }
            if d.abs() <= 1e-15 * (1.0 + v.abs()) {
                return v;
            }
            prev_diff = d;
        }
        last = v;
    }
    let tail: Vec<f64> = ratios.iter().rev().take(6).copied().collect();
    if tail.len() >= 4 && tail.iter().all(|r| r.abs() < 0.95) {
        if est.is_finite() {
            est
        } else {
            last
        }
    } else if prev_diff.is_finite() && prev_diff != 0.0 {
        prev_diff.signum() * f64::INFINITY
    } else {
        last
    }
}

/// `log(Σ exp(x_i))` over finite or `-inf` entries; `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|` (ties handled exactly).
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample KS statistic at level `alpha`.
pub fn ks_critical(alpha: f64, na: usize, nb: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// Central first and second differences of `f` at `x` with step `h`.
pub fn derivatives<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> (f64, f64) {
    let fp = f(x + h);
    let fm = f(x - h);
    let f0 = f(x);
    ((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
}
