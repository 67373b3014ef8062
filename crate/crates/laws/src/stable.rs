//! Positive stable and exponentially tilted stable variates.
//!
//! - [`kanter`]: standard positive stable with Laplace transform `exp(-u^α)`, `α ∈ ]0,1[`.
//! - [`TiltedPositiveStable`]: Laplace transform `exp(-D((θ+u)^α - θ^α))`, drawn exactly
//!   (inverse Gaussian at `α = 1/2`, otherwise rejection from untilted pieces).
//! - [`InverseCdfTable`]: a law given by its cumulant function on the imaginary
//!   axis, tabulated by Fourier inversion and sampled by table lookup.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, InverseGaussian};

use crate::error::{LawError, Result};

/// One draw with Laplace transform `exp(-u^α)` (Kanter's representation).
pub fn kanter<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = PI * rng.gen::<f64>();
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * u).sin()
        / u.sin().powf(1.0 / (1.0 - alpha));
    (a / e).powf((1.0 - alpha) / alpha)
}

/// Law with Laplace transform `exp(-D((θ+u)^α - θ^α))`, `D > 0`, `θ >= 0`, `α ∈ ]0,1[`.
#[derive(Debug, Clone)]
pub struct TiltedPositiveStable {
    alpha: f64,
    d: f64,
    theta: f64,
    pieces: u64,
    inverse_gaussian: Option<InverseGaussian<f64>>,
}

impl TiltedPositiveStable {
    pub fn new(alpha: f64, d: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0 && d > 0.0 && d.is_finite() && theta >= 0.0) {
            return Err(LawError::Parameter(format!(
                "tilted stable needs alpha in ]0,1[, D > 0, theta >= 0; got {alpha}, {d}, {theta}"
            )));
        }
        let inverse_gaussian = if alpha == 0.5 && theta > 0.0 {
            // exp(-D(sqrt(θ+u) - sqrtθ)) is IG(mean D/(2 sqrtθ), shape D^2/2)
            let ig = InverseGaussian::new(d / (2.0 * theta.sqrt()), d * d / 2.0)
                .map_err(|e| LawError::Parameter(format!("inverse Gaussian: {e}")))?;
            Some(ig)
        } else {
            None
        };
        // each piece is accepted with probability exp(-D θ^α / N) >= 1/e
        let load = d * theta.powf(alpha);
        let pieces = load.ceil().max(1.0);
        if pieces > 1e9 {
            return Err(LawError::Parameter(format!("tilted stable load {load} too large")));
        }
        Ok(Self { alpha, d, theta, pieces: pieces as u64, inverse_gaussian })
    }

    pub fn mean(&self) -> f64 {
        if self.theta == 0.0 {
            f64::INFINITY
        } else {
            self.d * self.alpha * self.theta.powf(self.alpha - 1.0)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let Some(ig) = &self.inverse_gaussian {
            return ig.sample(rng);
        }
        let n = self.pieces;
        let piece_scale = (self.d / n as f64).powf(1.0 / self.alpha);
        let mut total = 0.0;
        for _ in 0..n {
            loop {
                let s = piece_scale * kanter(self.alpha, rng);
                if self.theta == 0.0 || rng.gen::<f64>() <= (-self.theta * s).exp() {
                    total += s;
                    break;
                }
            }
        }
        total
    }
}

/// Inverse-CDF table of a law with cumulant function `K` (given on `w ∈ ]lo, hi[`
/// for real arguments and on the imaginary axis for the characteristic function).
#[derive(Debug, Clone)]
pub struct InverseCdfTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

const TABLE_POINTS: usize = 8193;
const TAIL_LOG: f64 = 40.0;

impl InverseCdfTable {
    /// Tabulates `Y` with `E exp(wY) = exp((θ + w)^α - θ^α)`, `α ∈ ]1,2[`, `θ > 0`:
    /// an exponentially tilted, totally skewed stable law.
    pub fn tilted_skewed_stable(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0 && theta > 0.0 && theta.is_finite()) {
            return Err(LawError::Parameter(format!(
                "skewed stable table needs alpha in ]1,2[ and theta > 0; got {alpha}, {theta}"
            )));
        }
        let k_real = |w: f64| (theta + w).powf(alpha) - theta.powf(alpha);
        let k_imag = |t: f64| Complex64::new(theta, t).powf(alpha) - theta.powf(alpha);
        let mean = alpha * theta.powf(alpha - 1.0);
        let sd = (alpha * (alpha - 1.0) * theta.powf(alpha - 2.0)).sqrt();
        Self::from_cumulant(k_real, k_imag, (-theta, f64::INFINITY), mean, sd)
    }

    /// Generic constructor: Chernoff bounds fix the table range, the density is
    /// the trapezoidal Fourier inversion of `exp(K(it))`, the CDF its running integral.
    pub fn from_cumulant<KR, KI>(
        k_real: KR,
        k_imag: KI,
        (w_lo, w_hi): (f64, f64),
        mean: f64,
        sd: f64,
    ) -> Result<Self>
    where
        KR: Fn(f64) -> f64,
        KI: Fn(f64) -> Complex64,
    {
        // P(Y <= x) <= exp(K(w) - w x) for w < 0, P(Y >= x) <= exp(K(w) - w x) for w > 0
        let bound = |w: f64| (k_real(w) + TAIL_LOG) / w;
        let left = {
            let lo = if w_lo.is_finite() { w_lo } else { -50.0 / sd };
            let mut best = f64::NEG_INFINITY;
            for i in 1..200 {
                let w = lo * (i as f64 / 200.0);
                let x = bound(w);
                if x.is_finite() && x > best {
                    best = x;
                }
            }
            best
        };
        let right = {
            let hi = if w_hi.is_finite() { w_hi } else { 50.0 / sd };
            let mut best = f64::INFINITY;
            for i in 1..200 {
                let w = hi * (i as f64 / 200.0);
                let x = bound(w);
                if x.is_finite() && x < best {
                    best = x;
                }
            }
            best
        };
        if !(left.is_finite() && right.is_finite() && left < mean && mean < right) {
            return Err(LawError::Numeric(format!("table range [{left}, {right}] around mean {mean}")));
        }
        let width = right - left;
        // aliasing period 2π/h must exceed twice the range
        let h = PI / width;
        let mut t_max = 1.0 / sd;
        while k_imag(t_max).re > -45.0 {
            t_max *= 1.5;
            if t_max > 1e7 {
                return Err(LawError::Numeric("characteristic function does not decay".into()));
            }
        }
        let nt = (t_max / h).ceil() as usize + 1;
        if nt > 2_000_000 {
            return Err(LawError::Numeric(format!("{nt} frequency nodes needed")));
        }
        // φ(t) e^{-itμ}, centred to limit oscillation
        let phis: Vec<Complex64> = (0..nt)
            .map(|j| {
                let t = j as f64 * h;
                (k_imag(t) - Complex64::new(0.0, t * mean)).exp() * if j == 0 { 0.5 } else { 1.0 }
            })
            .collect();
        let xs: Vec<f64> = (0..TABLE_POINTS)
            .map(|i| left + width * i as f64 / (TABLE_POINTS - 1) as f64)
            .collect();
        let dens: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let y = x - mean;
                // rotate e^{-ihy j} incrementally
                let step = Complex64::new(0.0, -h * y).exp();
                let mut rot = Complex64::new(1.0, 0.0);
                let mut acc = 0.0;
                for (j, ph) in phis.iter().enumerate() {
                    if j % 64 == 0 {
                        rot = Complex64::new(0.0, -h * y * j as f64).exp();
                    }
                    acc += (ph * rot).re;
                    rot *= step;
                }
                (acc * h / PI).max(0.0)
            })
            .collect();
        let mut cdf = Vec::with_capacity(TABLE_POINTS);
        cdf.push(0.0);
        let dx = width / (TABLE_POINTS - 1) as f64;
        for i in 1..TABLE_POINTS {
            let prev = cdf[i - 1];
            cdf.push(prev + 0.5 * dx * (dens[i - 1] + dens[i]));
        }
        let total = cdf[TABLE_POINTS - 1];
        if (total - 1.0).abs() > 1e-4 {
            return Err(LawError::Numeric(format!("tabulated mass {total} differs from 1")));
        }
        for c in &mut cdf {
            *c /= total;
        }
        Ok(Self { xs, cdf })
    }

    /// Quantile by linear interpolation of the tabulated CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        if c1 > c0 {
            x0 + (x1 - x0) * (u - c0) / (c1 - c0)
        } else {
            x0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }

    /// Mean of the tabulated (piecewise-uniform) law.
    pub fn table_mean(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.cdf.windows(2))
            .map(|(x, c)| 0.5 * (x[0] + x[1]) * (c[1] - c[0]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kanter_half_matches_levy_laplace_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        let lt: f64 = (0..n).map(|_| (-kanter(0.5, &mut rng)).exp()).sum::<f64>() / n as f64;
        assert!((lt - (-1.0f64).exp()).abs() < 5e-3, "{lt}");
    }

    #[test]
    fn split_sampler_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let law = TiltedPositiveStable::new(0.3, 4.0, 2.0).unwrap();
        let n = 100_000;
        let m: f64 = (0..n).map(|_| law.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((m - law.mean()).abs() < 0.02 * law.mean(), "{m} vs {}", law.mean());
    }

    #[test]
    fn skewed_table_has_right_mean() {
        let t = InverseCdfTable::tilted_skewed_stable(1.5, 0.8).unwrap();
        let mean = 1.5 * 0.8f64.powf(0.5);
        assert!((t.table_mean() - mean).abs() < 1e-3, "{} vs {mean}", t.table_mean());
    }
}
