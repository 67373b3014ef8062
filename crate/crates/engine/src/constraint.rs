//! Constraint sets Ω ⊂ ℝ^K: a serializable composition language plus
//! closure-backed sets for library callers.
//!
//! Membership is deterministic and total. Regularity (`cl Ω = cl int Ω`) is a
//! property the caller asserts; it is recorded, never checked. Affine
//! equalities carry a tolerance band, since the simulated vectors are
//! continuous and an exact hyperplane is hit with probability zero.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// Default half-width of the band around an affine equality.
pub const EQ_TOL: f64 = 1e-9;

fn eq_tol() -> f64 {
    EQ_TOL
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    #[default]
    Ge,
    Le,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    /// The whole space.
    All,
    Empty,
    /// `a·q >= b` (or `<=` with `sense: le`).
    Halfspace {
        a: Vec<f64>,
        b: f64,
        #[serde(default)]
        sense: Sense,
    },
    /// Coordinatewise bounds; `null` means unbounded.
    Box { lower: Vec<Option<f64>>, upper: Vec<Option<f64>> },
    /// `|a·q - b| <= tol`.
    AffineEq {
        a: Vec<f64>,
        b: f64,
        #[serde(default = "eq_tol")]
        tol: f64,
    },
    /// `Σ w_k (q_k - c_k)^2 <= r^2`, unit weights by default.
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    /// Every coordinate in `[0, ε1·u] ∪ [(1-ε2)·u, u]`.
    PolkaDot {
        eps1: f64,
        eps2: f64,
        #[serde(default = "one")]
        unit: f64,
    },
    /// Sup-norm neighbourhoods of radius `radius` around finitely many points.
    Dots { centers: Vec<Vec<f64>>, radius: f64 },
    /// Row and column sums of a row-major `rows x cols` matrix.
    Marginals {
        rows: usize,
        cols: usize,
        row_sums: Vec<f64>,
        col_sums: Vec<f64>,
        #[serde(default = "eq_tol")]
        tol: f64,
    },
    And { of: Vec<ConstraintSpec> },
    Or { of: Vec<ConstraintSpec> },
}

fn dot(a: &[f64], q: &[f64]) -> f64 {
    a.iter().zip(q).map(|(x, y)| x * y).sum()
}

impl ConstraintSpec {
    pub fn contains(&self, q: &[f64]) -> bool {
        use ConstraintSpec::*;
        match self {
            All => true,
            Empty => false,
            Halfspace { a, b, sense } => {
                let v = dot(a, q);
                match sense {
                    Sense::Ge => v >= *b,
                    Sense::Le => v <= *b,
                }
            }
            Box { lower, upper } => q.iter().enumerate().all(|(k, &x)| {
                lower[k].map_or(true, |l| x >= l) && upper[k].map_or(true, |u| x <= u)
            }),
            AffineEq { a, b, tol } => (dot(a, q) - b).abs() <= *tol,
            Ball { center, radius, weights } => {
                let d2: f64 = q
                    .iter()
                    .zip(center)
                    .enumerate()
                    .map(|(k, (x, c))| weights.as_ref().map_or(1.0, |w| w[k]) * (x - c) * (x - c))
                    .sum();
                d2 <= radius * radius
            }
            PolkaDot { eps1, eps2, unit } => q.iter().all(|&x| {
                (x >= 0.0 && x <= eps1 * unit) || (x >= (1.0 - eps2) * unit && x <= *unit)
            }),
            Dots { centers, radius } => centers
                .iter()
                .any(|c| c.iter().zip(q).all(|(ci, x)| (x - ci).abs() <= *radius)),
            Marginals { rows, cols, row_sums, col_sums, tol } => {
                (0..*rows).all(|i| {
                    let s: f64 = q[i * cols..(i + 1) * cols].iter().sum();
                    (s - row_sums[i]).abs() <= *tol
                }) && (0..*cols).all(|j| {
                    let s: f64 = (0..*rows).map(|i| q[i * cols + j]).sum();
                    (s - col_sums[j]).abs() <= *tol
                })
            }
            And { of } => of.iter().all(|c| c.contains(q)),
            Or { of } => of.iter().any(|c| c.contains(q)),
        }
    }

    /// Checks parameter shapes against the dimension `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        use ConstraintSpec::*;
        let len = |name: &str, v: usize| {
            if v == k {
                Ok(())
            } else {
                Err(EngineError::Constraint(format!("{name} has length {v}, expected {k}")))
            }
        };
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(EngineError::Constraint(format!("{name} must be finite")))
            }
        };
        match self {
            All | Empty => Ok(()),
            Halfspace { a, b, .. } => {
                len("halfspace normal", a.len())?;
                finite("halfspace offset", *b)
            }
            Box { lower, upper } => {
                len("box lower", lower.len())?;
                len("box upper", upper.len())
            }
            AffineEq { a, b, tol } => {
                len("equality normal", a.len())?;
                finite("equality offset", *b)?;
                if !(*tol >= 0.0) {
                    return Err(EngineError::Constraint("equality tolerance must be >= 0".into()));
                }
                Ok(())
            }
            Ball { center, radius, weights } => {
                len("ball center", center.len())?;
                if let Some(w) = weights {
                    len("ball weights", w.len())?;
                    if w.iter().any(|x| !(*x > 0.0)) {
                        return Err(EngineError::Constraint("ball weights must be > 0".into()));
                    }
                }
                if !(*radius >= 0.0) {
                    return Err(EngineError::Constraint("ball radius must be >= 0".into()));
                }
                Ok(())
            }
            PolkaDot { eps1, eps2, unit } => {
                if !(*eps1 >= 0.0 && *eps2 >= 0.0 && eps1 + eps2 < 1.0 && *unit > 0.0) {
                    return Err(EngineError::Constraint(format!(
                        "polka dot needs eps1, eps2 >= 0 with eps1 + eps2 < 1 and unit > 0; got {eps1}, {eps2}, {unit}"
                    )));
                }
                Ok(())
            }
            Dots { centers, radius } => {
                for c in centers {
                    len("dot center", c.len())?;
                }
                if !(*radius >= 0.0) {
                    return Err(EngineError::Constraint("dot radius must be >= 0".into()));
                }
                Ok(())
            }
            Marginals { rows, cols, row_sums, col_sums, tol } => {
                len("marginal grid", rows * cols)?;
                if row_sums.len() != *rows || col_sums.len() != *cols {
                    return Err(EngineError::Constraint("marginal vectors do not match the grid".into()));
                }
                if !(*tol >= 0.0) {
                    return Err(EngineError::Constraint("marginal tolerance must be >= 0".into()));
                }
                Ok(())
            }
            And { of } | Or { of } => of.iter().try_for_each(|c| c.validate(k)),
        }
    }

    /// Affine equalities `(a, b)` that every member satisfies up to their band:
    /// those reachable through conjunctions only.
    pub fn equalities(&self) -> Vec<(Vec<f64>, f64)> {
        use ConstraintSpec::*;
        match self {
            AffineEq { a, b, .. } => vec![(a.clone(), *b)],
            Marginals { rows, cols, row_sums, col_sums, .. } => {
                let k = rows * cols;
                let mut out = Vec::new();
                for i in 0..*rows {
                    let mut a = vec![0.0; k];
                    a[i * cols..(i + 1) * cols].iter_mut().for_each(|x| *x = 1.0);
                    out.push((a, row_sums[i]));
                }
                for j in 0..*cols {
                    let mut a = vec![0.0; k];
                    (0..*rows).for_each(|i| a[i * cols + j] = 1.0);
                    out.push((a, col_sums[j]));
                }
                out
            }
            And { of } => of.iter().flat_map(|c| c.equalities()).collect(),
            _ => Vec::new(),
        }
    }

    /// Widens every equality band to at least `band`.
    pub fn with_equality_band(&self, band: f64) -> Self {
        use ConstraintSpec::*;
        match self {
            AffineEq { a, b, tol } => AffineEq { a: a.clone(), b: *b, tol: tol.max(band) },
            Marginals { rows, cols, row_sums, col_sums, tol } => Marginals {
                rows: *rows,
                cols: *cols,
                row_sums: row_sums.clone(),
                col_sums: col_sums.clone(),
                tol: tol.max(band),
            },
            And { of } => And { of: of.iter().map(|c| c.with_equality_band(band)).collect() },
            Or { of } => Or { of: of.iter().map(|c| c.with_equality_band(band)).collect() },
            other => other.clone(),
        }
    }

    /// The set `{q : (d_k q_k)_k ∈ self}` for nonzero factors `d`.
    ///
    /// Marginal and polka-dot constraints are rewritten as equalities and
    /// unions of boxes, since they are not closed under anisotropic scaling.
    pub fn pull_back_diagonal(&self, d: &[f64]) -> Result<Self> {
        use ConstraintSpec::*;
        if d.iter().any(|x| !(x.is_finite() && *x != 0.0)) {
            return Err(EngineError::Constraint("scaling factors must be finite and nonzero".into()));
        }
        let k = d.len();
        let scaled = |a: &[f64]| a.iter().zip(d).map(|(x, s)| x * s).collect::<Vec<f64>>();
        let bounds = |lo: Option<f64>, hi: Option<f64>, s: f64| {
            let (l, h) = (lo.map(|x| x / s), hi.map(|x| x / s));
            if s > 0.0 {
                (l, h)
            } else {
                (h, l)
            }
        };
        Ok(match self {
            All => All,
            Empty => Empty,
            Halfspace { a, b, sense } => Halfspace { a: scaled(a), b: *b, sense: *sense },
            Box { lower, upper } => {
                let (lower, upper) =
                    (0..k).map(|i| bounds(lower[i], upper[i], d[i])).unzip();
                Box { lower, upper }
            }
            AffineEq { a, b, tol } => AffineEq { a: scaled(a), b: *b, tol: *tol },
            Ball { center, radius, weights } => Ball {
                center: center.iter().zip(d).map(|(c, s)| c / s).collect(),
                radius: *radius,
                weights: Some((0..k).map(|i| weights.as_ref().map_or(1.0, |w| w[i]) * d[i] * d[i]).collect()),
            },
            PolkaDot { eps1, eps2, unit } => {
                let per: Vec<ConstraintSpec> = (0..k)
                    .map(|i| {
                        let interval = |lo: f64, hi: f64| {
                            let mut lower = vec![None; k];
                            let mut upper = vec![None; k];
                            let (l, h) = bounds(Some(lo), Some(hi), d[i]);
                            lower[i] = l;
                            upper[i] = h;
                            Box { lower, upper }
                        };
                        Or { of: vec![interval(0.0, eps1 * unit), interval((1.0 - eps2) * unit, *unit)] }
                    })
                    .collect();
                And { of: per }
            }
            Dots { centers, radius } => Or {
                of: centers
                    .iter()
                    .map(|c| {
                        let (lower, upper) = (0..k)
                            .map(|i| bounds(Some(c[i] - radius), Some(c[i] + radius), d[i]))
                            .unzip();
                        Box { lower, upper }
                    })
                    .collect(),
            },
            Marginals { tol, .. } => And {
                of: self
                    .equalities()
                    .into_iter()
                    .map(|(a, b)| AffineEq { a: scaled(&a), b, tol: *tol })
                    .collect(),
            },
            And { of } => And { of: of.iter().map(|c| c.pull_back_diagonal(d)).collect::<Result<_>>()? },
            Or { of } => Or { of: of.iter().map(|c| c.pull_back_diagonal(d)).collect::<Result<_>>()? },
        })
    }
}

pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
pub type VectorMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum Membership {
    Spec(ConstraintSpec),
    /// `{q : map(q) ∈ inner}`.
    Mapped { inner: Box<ConstraintSet>, map: VectorMap },
    Custom(Predicate),
}

/// A constraint set together with its scale `A` (the total mass of its
/// members in normalized mode) and caller-asserted metadata.
#[derive(Clone)]
pub struct ConstraintSet {
    membership: Membership,
    scale: f64,
    regularity_asserted: bool,
    description: String,
}

impl fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSet")
            .field("description", &self.description)
            .field("scale", &self.scale)
            .field("regularity_asserted", &self.regularity_asserted)
            .finish()
    }
}

impl ConstraintSet {
    pub fn from_spec(spec: ConstraintSpec) -> Self {
        let description = format!("{spec:?}");
        Self { membership: Membership::Spec(spec), scale: 1.0, regularity_asserted: true, description }
    }

    pub fn from_predicate(pred: Predicate, description: impl Into<String>) -> Self {
        Self {
            membership: Membership::Custom(pred),
            scale: 1.0,
            regularity_asserted: true,
            description: description.into(),
        }
    }

    /// `{q : map(q) ∈ inner}`; the scale and metadata are those of `inner`.
    pub fn pulled_back(inner: ConstraintSet, map: VectorMap, description: impl Into<String>) -> Self {
        let scale = inner.scale;
        let regularity_asserted = inner.regularity_asserted;
        Self {
            membership: Membership::Mapped { inner: Box::new(inner), map },
            scale,
            regularity_asserted,
            description: description.into(),
        }
    }

    pub fn with_scale(mut self, a: f64) -> Self {
        self.scale = a;
        self
    }

    pub fn with_regularity_asserted(mut self, yes: bool) -> Self {
        self.regularity_asserted = yes;
        self
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        if q.iter().any(|x| x.is_nan()) {
            return false;
        }
        match &self.membership {
            Membership::Spec(s) => s.contains(q),
            Membership::Mapped { inner, map } => inner.contains(&map(q)),
            Membership::Custom(p) => p(q),
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn regularity_asserted(&self) -> bool {
        self.regularity_asserted
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn spec(&self) -> Option<&ConstraintSpec> {
        match &self.membership {
            Membership::Spec(s) => Some(s),
            _ => None,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if !(self.scale.is_finite() && self.scale != 0.0) {
            return Err(EngineError::Constraint(format!("scale A = {} must be finite and nonzero", self.scale)));
        }
        match &self.membership {
            Membership::Spec(s) => s.validate(k),
            _ => Ok(()),
        }
    }

    /// Equalities usable for projecting search points; empty for closure-backed sets.
    pub fn equalities(&self) -> Vec<(Vec<f64>, f64)> {
        match &self.membership {
            Membership::Spec(s) => s.equalities(),
            _ => Vec::new(),
        }
    }

    /// Widens equality bands to `band` (spec-backed sets only, others unchanged).
    pub fn with_equality_band(&self, band: f64) -> Self {
        let mut out = self.clone();
        match &self.membership {
            Membership::Spec(s) => out.membership = Membership::Spec(s.with_equality_band(band)),
            Membership::Mapped { inner, map } => {
                out.membership = Membership::Mapped {
                    inner: Box::new(inner.with_equality_band(band)),
                    map: map.clone(),
                }
            }
            Membership::Custom(_) => {}
        }
        out
    }
}

/// Orthogonal projection onto `{x : a_i·x = b_i}`.
///
/// Rows are orthonormalized by Gram-Schmidt (dependent rows dropped), so
/// redundant systems such as row plus column sums are handled.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    rows: Vec<(Vec<f64>, f64)>,
}

impl AffineProjector {
    pub fn new(eqs: &[(Vec<f64>, f64)]) -> Self {
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for (a, b) in eqs {
            let (mut v, mut c) = (a.clone(), *b);
            for (u, d) in &rows {
                let proj = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= proj * y);
                c -= proj * d;
            }
            let norm = dot(&v, &v).sqrt();
            let scale = dot(a, a).sqrt();
            if norm > 1e-10 * scale.max(1.0) {
                v.iter_mut().for_each(|x| *x /= norm);
                rows.push((v, c / norm));
            }
        }
        Self { rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn project(&self, x: &mut [f64]) {
        // one pass is exact for orthonormal rows; a second removes rounding drift
        for _ in 0..2 {
            for (u, c) in &self.rows {
                let r = dot(u, x) - c;
                x.iter_mut().zip(u).for_each(|(xi, ui)| *xi -= r * ui);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_and_serde() {
        let json = r#"{"type":"and","of":[
            {"type":"halfspace","a":[1,0,0],"b":0.5},
            {"type":"box","lower":[0,0,0],"upper":[null,null,1]}]}"#;
        let spec: ConstraintSpec = serde_json::from_str(json).unwrap();
        assert!(spec.contains(&[0.6, 0.2, 0.2]));
        assert!(!spec.contains(&[0.4, 0.3, 0.3]));
        spec.validate(3).unwrap();
        assert!(spec.validate(2).is_err());
        let back: ConstraintSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn projection_handles_redundant_marginals() {
        let m = ConstraintSpec::Marginals {
            rows: 2,
            cols: 2,
            row_sums: vec![0.5, 0.5],
            col_sums: vec![0.7, 0.3],
            tol: 1e-9,
        };
        let proj = AffineProjector::new(&m.equalities());
        let mut x = vec![0.9, 0.1, 0.3, 0.2];
        proj.project(&mut x);
        assert!(m.contains(&x), "{x:?}");
    }

    #[test]
    fn diagonal_pull_back() {
        let spec = ConstraintSpec::And {
            of: vec![
                ConstraintSpec::Box { lower: vec![Some(0.0), Some(1.0)], upper: vec![Some(2.0), None] },
                ConstraintSpec::Ball { center: vec![1.0, 2.0], radius: 1.5, weights: None },
                ConstraintSpec::PolkaDot { eps1: 0.5, eps2: 0.4, unit: 3.0 },
            ],
        };
        let d = [-2.0, 0.5];
        let pulled = spec.pull_back_diagonal(&d).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let q = [-2.0 + 0.1 * i as f64, 0.25 * j as f64];
                let orig = [q[0] * d[0], q[1] * d[1]];
                assert_eq!(pulled.contains(&q), spec.contains(&orig), "{q:?}");
            }
        }
    }
}
