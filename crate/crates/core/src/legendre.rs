//! Construction of a generator φ and a cumulant function Λ from a strictly
//! increasing map `F` (the would-be φ′ up to a shift) and an anchor `c`.
//!
//! With `v0 = F⁻¹(c)`:
//! - `Λ(z) = ∫₀^z F⁻¹(u + c) du + z (1 - v0)` on `]λ_-, λ_+[ = ]F(a_F) - c, F(b_F) - c[`;
//! - `φ(t) = ∫_{v0}^{v0 + t - 1} (F(v) - c) dv` on `]t_-, t_+[`, `t_± = 1 + (a_F, b_F) - v0`,
//!   continued by its endpoint limits and affine tails of slope `λ_±` where those are finite.
//!
//! `F⁻¹` is never required analytically; it is recovered by bracketed root finding.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::generator::{DivergenceGenerator, GeneratorKind};
use crate::numeric::{bracketed_root, golden_min, integrate, one_sided_limit};

/// Shared scalar function handle.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const GRID_POINTS: usize = 512;
const QUAD_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-15;

/// A strictly increasing map `F` on `]a_F, b_F[` together with an anchor `c`.
pub struct GeneratorSpec {
    f: ScalarFn,
    a_f: f64,
    b_f: f64,
    anchor: f64,
    v0: f64,
    range: (f64, f64),
    grid: Vec<(f64, f64)>,
    phi_ends: (f64, f64),
}

impl fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorSpec")
            .field("a_f", &self.a_f)
            .field("b_f", &self.b_f)
            .field("anchor", &self.anchor)
            .field("range", &self.range)
            .finish()
    }
}

fn grid_points(a: f64, b: f64) -> Vec<f64> {
    let n = GRID_POINTS;
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            match (a.is_finite(), b.is_finite()) {
                (true, true) => a + (b - a) * 0.5 * (1.0 - (std::f64::consts::PI * u).cos()),
                (true, false) => a + (1.0 - a) * (60.0 * u - 30.0).exp(),
                (false, true) => b - (b - 1.0) * (30.0 - 60.0 * u).exp(),
                (false, false) => 1.0 + (60.0 * u - 30.0).sinh(),
            }
        })
        .filter(|x| *x > a && *x < b)
        .collect()
}

impl GeneratorSpec {
    /// Builds and checks a specification; `F` must be strictly increasing with `a_F < 1 < b_F`.
    pub fn new(f: ScalarFn, a_f: f64, b_f: f64, anchor: f64) -> Result<Self> {
        if !(a_f < 1.0 && b_f > 1.0) {
            return Err(Error::Parameter(format!("need a_F < 1 < b_F, got ]{a_f}, {b_f}[")));
        }
        if !anchor.is_finite() {
            return Err(Error::Parameter("anchor must be finite".into()));
        }
        let grid: Vec<(f64, f64)> = grid_points(a_f, b_f).into_iter().map(|x| (x, f(x))).collect();
        for w in grid.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if !y0.is_finite() || !y1.is_finite() {
                return Err(Error::Parameter(format!("F is not finite on the grid near {x0}")));
            }
            if y1 < y0 - 1e-12 * (1.0 + y0.abs()) {
                return Err(Error::Parameter(format!(
                    "F is not increasing: F({x0}) = {y0} > F({x1}) = {y1}"
                )));
            }
        }
        let strict = grid.windows(2).filter(|w| w[1].1 > w[0].1).count();
        if strict * 2 < grid.len() {
            return Err(Error::Parameter("F is not strictly increasing".into()));
        }
        let lo_scale = if a_f.is_finite() { 0.25 * (1.0 - a_f) } else { 1.0 };
        let hi_scale = if b_f.is_finite() { 0.25 * (b_f - 1.0) } else { 1.0 };
        let f_lo = one_sided_limit(&*f, a_f, 1.0, lo_scale);
        let f_hi = one_sided_limit(&*f, b_f, -1.0, hi_scale);
        if !(f_lo < anchor && anchor < f_hi) {
            return Err(Error::Parameter(format!(
                "anchor {anchor} outside the open range ]{f_lo}, {f_hi}[ of F"
            )));
        }
        let mut spec = Self {
            f,
            a_f,
            b_f,
            anchor,
            v0: f64::NAN,
            range: (f_lo, f_hi),
            grid,
            phi_ends: (f64::NAN, f64::NAN),
        };
        spec.v0 = spec.f_inv(anchor)?;
        let (tm, tp) = spec.t_bounds();
        let lo_end = if tm.is_finite() {
            one_sided_limit(|t| spec.phi_inner(t), tm, 1.0, 0.25 * (1.0 - tm))
        } else {
            f64::INFINITY
        };
        let hi_end = if tp.is_finite() {
            one_sided_limit(|t| spec.phi_inner(t), tp, -1.0, 0.25 * (tp - 1.0))
        } else {
            f64::INFINITY
        };
        spec.phi_ends = (lo_end, hi_end);
        Ok(spec)
    }

    /// Specification reproducing a closed-form generator (`None` for custom ones).
    pub fn from_generator(gen: &DivergenceGenerator) -> Option<Self> {
        const INF: f64 = f64::INFINITY;
        let (f, a, b, c): (ScalarFn, f64, f64, f64) = match *gen.kind() {
            GeneratorKind::PowerGamma { gamma, scale } => {
                if gamma == 2.0 {
                    (Arc::new(move |t| scale * (t - 1.0)), -INF, INF, 0.0)
                } else if gamma == 1.0 {
                    (Arc::new(move |t: f64| scale * t.ln()), 0.0, INF, 0.0)
                } else {
                    (
                        Arc::new(move |t: f64| scale * (t.powf(gamma - 1.0) - 1.0) / (gamma - 1.0)),
                        0.0,
                        INF,
                        0.0,
                    )
                }
            }
            GeneratorKind::GeneralizedKl { alpha, scale } => {
                let b = if alpha > 0.0 { INF } else { -1.0 / alpha };
                (
                    Arc::new(move |t: f64| scale * (t.ln() + alpha.ln_1p() - (alpha * t).ln_1p())),
                    0.0,
                    b,
                    0.0,
                )
            }
            GeneratorKind::AnchoredKl { anchor } => {
                (Arc::new(|t: f64| t.ln()), 0.0, INF, anchor)
            }
            GeneratorKind::BlendedWeightChiSq { beta, scale } => (
                Arc::new(move |t: f64| {
                    let u = beta * t + 1.0 - beta;
                    scale / (2.0 * beta) * (1.0 - 1.0 / (u * u))
                }),
                1.0 - 1.0 / beta,
                INF,
                0.0,
            ),
            GeneratorKind::TwoPoint { z1, z2 } => (
                Arc::new(move |t: f64| {
                    (((t - z1) * (z2 - 1.0)) / ((z2 - t) * (1.0 - z1))).ln() / (z2 - z1)
                }),
                z1,
                z2,
                0.0,
            ),
            GeneratorKind::GenAsymLaplace { alpha, beta1, beta2, scale } => (
                Arc::new(move |t: f64| {
                    let x = (1.0 - t) / alpha + 1.0 / beta2 - 1.0 / beta1;
                    let s = beta1 + beta2;
                    let r = (2.0f64).hypot(s * x);
                    scale * (beta1 - beta2) / 2.0 - scale * s * s * x / (2.0 * (r + 2.0))
                }),
                -INF,
                INF,
                0.0,
            ),
            GeneratorKind::Custom(_) => return None,
        };
        Self::new(f, a, b, c).ok()
    }

    pub fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a_f, self.b_f)
    }

    /// Limits of `F` at `a_F` and `b_F`.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// `F⁻¹(c)`.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// `(λ_-, λ_+)`.
    pub fn lambda_bounds(&self) -> (f64, f64) {
        (self.range.0 - self.anchor, self.range.1 - self.anchor)
    }

    /// `(t_-, t_+)`.
    pub fn t_bounds(&self) -> (f64, f64) {
        (1.0 + self.a_f - self.v0, 1.0 + self.b_f - self.v0)
    }

    /// Interior of the set where φ is finite (affine tails included).
    pub fn t_bounds_effective(&self) -> (f64, f64) {
        let (tm, tp) = self.t_bounds();
        let (lm, lp) = self.lambda_bounds();
        let lo = if lm.is_finite() && self.phi_ends.0.is_finite() { f64::NEG_INFINITY } else { tm };
        let hi = if lp.is_finite() && self.phi_ends.1.is_finite() { f64::INFINITY } else { tp };
        (lo, hi)
    }

    /// `F⁻¹(y)` for `y` in the open range of `F`.
    pub fn f_inv(&self, y: f64) -> Result<f64> {
        if !(y > self.range.0 && y < self.range.1) {
            return Err(Error::Domain(format!(
                "{y} outside the range ]{}, {}[",
                self.range.0, self.range.1
            )));
        }
        let g = |x: f64| self.f(x) - y;
        let first = self.grid[0];
        let last = self.grid[self.grid.len() - 1];
        let (lo, hi) = if y < first.1 {
            let mut x = first.0;
            let mut inner = first.0;
            for j in 1..200 {
                inner = x;
                x = if self.a_f.is_finite() {
                    self.a_f + (first.0 - self.a_f) * 0.5f64.powi(j)
                } else {
                    first.0 - (1.0 + first.0.abs()) * 2f64.powi(j)
                };
                if self.f(x) < y {
                    break;
                }
            }
            (x, inner)
        } else if y > last.1 {
            let mut x = last.0;
            let mut inner = last.0;
            for j in 1..200 {
                inner = x;
                x = if self.b_f.is_finite() {
                    self.b_f - (self.b_f - last.0) * 0.5f64.powi(j)
                } else {
                    last.0 + (1.0 + last.0.abs()) * 2f64.powi(j)
                };
                if self.f(x) > y {
                    break;
                }
            }
            (inner, x)
        } else {
            let i = self.grid.partition_point(|&(_, fy)| fy < y);
            let i = i.clamp(1, self.grid.len() - 1);
            (self.grid[i - 1].0, self.grid[i].0)
        };
        bracketed_root(g, lo, hi, ROOT_TOL, 200)
    }

    fn phi_inner(&self, t: f64) -> f64 {
        let c = self.anchor;
        integrate(|v| self.f(v) - c, self.v0, self.v0 + t - 1.0, QUAD_TOL)
    }

    /// The generator φ including endpoint limits and affine tails.
    pub fn phi(&self, t: f64) -> f64 {
        let (tm, tp) = self.t_bounds();
        let (lm, lp) = self.lambda_bounds();
        if t > tm && t < tp {
            return self.phi_inner(t).max(0.0);
        }
        if t == tm {
            return self.phi_ends.0;
        }
        if t == tp {
            return self.phi_ends.1;
        }
        if t < tm {
            if lm.is_finite() && self.phi_ends.0.is_finite() {
                self.phi_ends.0 + lm * (t - tm)
            } else {
                f64::INFINITY
            }
        } else if lp.is_finite() && self.phi_ends.1.is_finite() {
            self.phi_ends.1 + lp * (t - tp)
        } else {
            f64::INFINITY
        }
    }

    /// φ′ extended by the tail slopes, or `±inf` where φ is infinite.
    pub fn phi_prime(&self, t: f64) -> f64 {
        let (tm, tp) = self.t_bounds();
        let (lo, hi) = self.t_bounds_effective();
        let (lm, lp) = self.lambda_bounds();
        if t > tm && t < tp {
            self.f(self.v0 + t - 1.0) - self.anchor
        } else if t <= tm {
            if lo.is_infinite() {
                lm
            } else {
                f64::NEG_INFINITY
            }
        } else if hi.is_infinite() {
            lp
        } else {
            f64::INFINITY
        }
    }

    fn lambda_inner(&self, z: f64) -> f64 {
        let c = self.anchor;
        let integral = integrate(
            |u| self.f_inv(u + c).unwrap_or(f64::NAN),
            0.0,
            z,
            QUAD_TOL,
        );
        integral + z * (1.0 - self.v0)
    }

    /// Λ(z) by quadrature of `F⁻¹`; endpoint limits at `λ_±`, `+inf` outside.
    pub fn lambda(&self, z: f64) -> f64 {
        let (lm, lp) = self.lambda_bounds();
        if z > lm && z < lp {
            self.lambda_inner(z)
        } else if z == lm && lm.is_finite() {
            one_sided_limit(|x| self.lambda_inner(x), lm, 1.0, 0.25 * lm.abs())
        } else if z == lp && lp.is_finite() {
            one_sided_limit(|x| self.lambda_inner(x), lp, -1.0, 0.25 * lp.abs())
        } else {
            f64::INFINITY
        }
    }
}

/// How a [`CumulantFunction`] is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CumulantMethod {
    ClosedForm,
    Quadrature,
}

/// A cumulant function Λ with its open effective domain.
#[derive(Clone)]
pub struct CumulantFunction {
    eval: ScalarFn,
    domain: (f64, f64),
    method: CumulantMethod,
}

impl fmt::Debug for CumulantFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CumulantFunction")
            .field("domain", &self.domain)
            .field("method", &self.method)
            .finish()
    }
}

impl CumulantFunction {
    pub fn new(eval: ScalarFn, domain: (f64, f64), method: CumulantMethod) -> Self {
        Self { eval, domain, method }
    }

    pub fn eval(&self, z: f64) -> f64 {
        (self.eval)(z)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn method(&self) -> CumulantMethod {
        self.method
    }

    pub fn handle(&self) -> ScalarFn {
        self.eval.clone()
    }

    /// `(Λ(0), Λ′(0))`, the latter by a central difference.
    pub fn normalization(&self) -> (f64, f64) {
        let h = 1e-5 * (self.domain.1 - self.domain.0).abs().min(1.0);
        (self.eval(0.0), (self.eval(h) - self.eval(-h)) / (2.0 * h))
    }
}

/// Closed-form Λ = φ* for the built-in families (`None` for custom generators).
pub fn closed_form_cumulant(gen: &DivergenceGenerator) -> Option<CumulantFunction> {
    let domain = gen.lambda_bounds();
    let (lo, hi) = domain;
    let eval: ScalarFn = match *gen.kind() {
        GeneratorKind::PowerGamma { gamma, scale } => {
            if gamma == 1.0 {
                Arc::new(move |z: f64| scale * (z / scale).exp_m1())
            } else if gamma == 0.0 {
                Arc::new(move |z: f64| {
                    if z < scale {
                        -scale * (-z / scale).ln_1p()
                    } else {
                        f64::INFINITY
                    }
                })
            } else {
                Arc::new(move |z: f64| {
                    if !(z > lo && z < hi) {
                        return f64::INFINITY;
                    }
                    let base = 1.0 + (gamma - 1.0) * z / scale;
                    scale / gamma * (base.powf(gamma / (gamma - 1.0)) - 1.0)
                })
            }
        }
        GeneratorKind::GeneralizedKl { alpha, scale } => Arc::new(move |z: f64| {
            let arg = 1.0 + alpha - alpha * (z / scale).exp();
            if arg > 0.0 && z < hi {
                -scale / alpha * arg.ln()
            } else {
                f64::INFINITY
            }
        }),
        GeneratorKind::AnchoredKl { anchor } => {
            let e = anchor.exp();
            Arc::new(move |z: f64| e * z.exp_m1() + z * (1.0 - e))
        }
        GeneratorKind::BlendedWeightChiSq { beta, scale } => Arc::new(move |z: f64| {
            if z < hi {
                scale / (beta * beta) * (1.0 - (1.0 - 2.0 * beta * z / scale).sqrt())
                    - z * (1.0 - beta) / beta
            } else {
                f64::INFINITY
            }
        }),
        GeneratorKind::TwoPoint { z1, z2 } => {
            let p = (z2 - 1.0) / (z2 - z1);
            Arc::new(move |z: f64| {
                // log(p e^{z z1} + (1-p) e^{z z2}) evaluated stably
                let (a, b) = (p.ln() + z * z1, (1.0 - p).ln() + z * z2);
                let m = a.max(b);
                m + ((a - m).exp() + (b - m).exp()).ln()
            })
        }
        GeneratorKind::GenAsymLaplace { alpha, beta1, beta2, scale } => {
            let shift = 1.0 - alpha / beta1 + alpha / beta2;
            Arc::new(move |z: f64| {
                if !(z > lo && z < hi) {
                    return f64::INFINITY;
                }
                shift * z
                    - scale * alpha * (-z / (scale * beta1)).ln_1p()
                    - scale * alpha * (z / (scale * beta2)).ln_1p()
            })
        }
        GeneratorKind::Custom(_) => return None,
    };
    Some(CumulantFunction::new(eval, domain, CumulantMethod::ClosedForm))
}

/// Λ built from a specification by quadrature.
pub fn build_lambda(spec: &Arc<GeneratorSpec>) -> CumulantFunction {
    let s = spec.clone();
    CumulantFunction::new(
        Arc::new(move |z| s.lambda(z)),
        spec.lambda_bounds(),
        CumulantMethod::Quadrature,
    )
}

/// The generator of a specification, as a custom [`DivergenceGenerator`].
pub fn build_phi(spec: &Arc<GeneratorSpec>) -> DivergenceGenerator {
    DivergenceGenerator::custom(spec.clone())
}

/// Numeric convex conjugate `f*(t) = sup_{z ∈ ]lo, hi[} (z t - f(z))`.
///
/// Ascent bracketing from the point of the domain nearest to 0, then
/// golden-section search and a Newton polish; unbounded suprema give `+inf`.
pub fn legendre_transform(f: ScalarFn, domain: (f64, f64)) -> ScalarFn {
    Arc::new(move |t| conjugate_at(&*f, domain, t))
}

fn conjugate_at(f: &dyn Fn(f64) -> f64, (lo, hi): (f64, f64), t: f64) -> f64 {
    let g = |z: f64| -> f64 {
        if !(z > lo && z < hi) {
            return f64::NEG_INFINITY;
        }
        let v = f(z);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            z * t - v
        }
    };
    let z0 = if lo < 0.0 && hi > 0.0 {
        0.0
    } else if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo + 1.0
    } else {
        hi - 1.0
    };
    let probe = 1e-6 * (1.0 + z0.abs());
    let dir = if g(z0 + probe) >= g(z0 - probe) { 1.0 } else { -1.0 };
    let bound = if dir > 0.0 { hi } else { lo };
    let mut prev2 = z0;
    let mut prev = z0;
    let mut gprev = g(z0);
    let mut step = 0.05 * (1.0 + z0.abs());
    let far;
    loop {
        let mut cand = prev + dir * step;
        if bound.is_finite() && (cand - bound) * dir >= 0.0 {
            cand = prev + 0.5 * (bound - prev);
        }
        let gc = g(cand);
        if gc <= gprev {
            far = cand;
            break;
        }
        if cand.abs() > 1e15 {
            return f64::INFINITY;
        }
        if bound.is_finite() && (bound - cand).abs() <= 1e-13 * (1.0 + bound.abs()) {
            // supremum approached at the boundary
            return one_sided_limit(g, bound, -dir, (bound - z0).abs().max(1e-12) * 0.25);
        }
        prev2 = prev;
        prev = cand;
        gprev = gc;
        step *= 2.0;
    }
    let (a, b) = if prev2 < far { (prev2, far) } else { (far, prev2) };
    let (mut z, mut best) = match golden_min(|z| -g(z), a, b, 1e-11 * (1.0 + a.abs().max(b.abs())))
    {
        Ok((z, v)) => (z, -v),
        Err(_) => (prev, gprev),
    };
    // Newton polish on f'(z) = t
    for _ in 0..3 {
        let h = 1e-4 * (1.0 + z.abs()).min((z - lo).abs().min((hi - z).abs()) * 0.5 + 1e-12);
        let (d1, d2) = crate::numeric::derivatives(f, z, h);
        if !(d2 > 0.0 && d1.is_finite()) {
            break;
        }
        let zn = z - (d1 - t) / d2;
        let gn = g(zn);
        if gn > best {
            z = zn;
            best = gn;
        } else {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn log_spec_gives_poisson_cumulant() {
        let spec = Arc::new(GeneratorSpec::new(Arc::new(|t: f64| t.ln()), 0.0, f64::INFINITY, 0.0).unwrap());
        let lam = build_lambda(&spec);
        assert!(lam.eval(0.0).abs() < 1e-14);
        for &z in &[-2.0, -0.5, 0.3, 1.0, 2.5] {
            assert!(close(lam.eval(z), z.exp() - 1.0, 1e-10), "z={z}");
        }
        let phi = build_phi(&spec);
        for &t in &[0.1, 0.5, 1.0, 2.0, 7.0] {
            assert!(close(phi.phi(t), t * t.ln() + 1.0 - t, 1e-10), "t={t}");
        }
        assert!(close(phi.phi(0.0), 1.0, 1e-8));
    }

    #[test]
    fn linear_spec_gives_gaussian_cumulant() {
        let spec = Arc::new(
            GeneratorSpec::new(Arc::new(|t: f64| t - 1.0), f64::NEG_INFINITY, f64::INFINITY, 0.0)
                .unwrap(),
        );
        let lam = build_lambda(&spec);
        for &z in &[-3.0, 0.5, 2.0] {
            assert!(close(lam.eval(z), z * z / 2.0 + z, 1e-10));
        }
    }

    #[test]
    fn anchored_log_boundary() {
        let spec = Arc::new(GeneratorSpec::new(Arc::new(|t: f64| t.ln()), 0.0, f64::INFINITY, 1.0).unwrap());
        let e = 1f64.exp();
        let (tm, _) = spec.t_bounds();
        assert!((tm - (1.0 - e)).abs() < 1e-12);
        assert!(close(spec.phi(1.0 - e), e, 1e-8), "{}", spec.phi(1.0 - e));
        assert_eq!(spec.phi(1.0 - e - 0.1), f64::INFINITY);
    }

    #[test]
    fn conjugate_examples() {
        let quad: ScalarFn = Arc::new(|z: f64| z * z / 2.0 + z);
        let conj = legendre_transform(quad, (f64::NEG_INFINITY, f64::INFINITY));
        for &t in &[-2.0, 0.0, 1.0, 4.0] {
            assert!(close(conj(t), (t - 1.0) * (t - 1.0) / 2.0, 1e-10), "t={t}");
        }
        let pois: ScalarFn = Arc::new(|z: f64| z.exp() - 1.0);
        let c2 = legendre_transform(pois, (f64::NEG_INFINITY, f64::INFINITY));
        assert!(close(c2(2.0), 0.386294361, 1e-8));
        // unbounded supremum
        let lin: ScalarFn = Arc::new(|z: f64| z);
        let c3 = legendre_transform(lin, (f64::NEG_INFINITY, f64::INFINITY));
        assert_eq!(c3(2.0), f64::INFINITY);
    }

    #[test]
    fn rejects_decreasing_map() {
        assert!(GeneratorSpec::new(Arc::new(|t: f64| -t), f64::NEG_INFINITY, f64::INFINITY, 0.0).is_err());
        assert!(GeneratorSpec::new(Arc::new(|t: f64| t.ln()), 0.0, f64::INFINITY, f64::NAN).is_err());
    }
}
