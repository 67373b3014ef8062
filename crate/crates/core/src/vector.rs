//! Vector newtypes and the row-major matrix flattening convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite real vector of length `K >= 1` with nonnegative entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NonNegVector(Vec<f64>);

impl NonNegVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("vector must have length >= 1".into()));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::Inadmissible(format!("entry {x} is not finite and >= 0")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    pub fn not_identically_zero(&self) -> bool {
        self.0.iter().any(|&x| x > 0.0)
    }

    pub fn mass(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl TryFrom<Vec<f64>> for NonNegVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NonNegVector> for Vec<f64> {
    fn from(v: NonNegVector) -> Self {
        v.0
    }
}

/// Tolerance on the sum of a probability vector.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A probability vector: nonnegative entries summing to one within `1e-12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let v = NonNegVector::new(values)?;
        let s = v.mass();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Inadmissible(format!("entries sum to {s}, not 1")));
        }
        Ok(Self(v.0))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("K must be >= 1".into()));
        }
        Ok(Self(vec![1.0 / k as f64; k]))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(v: ProbVector) -> Self {
        v.0
    }
}

/// Row-major flattening: entry `(i, j)` lands at `i * K2 + j`.
pub fn flatten_matrix(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k2 = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || k2 == 0 {
        return Err(Error::Parameter("matrix must be non-empty".into()));
    }
    if rows.iter().any(|r| r.len() != k2) {
        return Err(Error::Parameter("ragged matrix".into()));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("matrix entries must be finite".into()));
    }
    Ok(rows.iter().flatten().copied().collect())
}

/// Inverse of [`flatten_matrix`].
pub fn unflatten(v: &[f64], k1: usize, k2: usize) -> Result<Vec<Vec<f64>>> {
    crate::error::check_len(k1 * k2, v.len())?;
    Ok(v.chunks(k2).map(<[f64]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_examples() {
        assert_eq!(
            flatten_matrix(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            vec![1.0, 0.0, 0.0, 1.0]
        );
        let m = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let f = flatten_matrix(&m).unwrap();
        assert_eq!(f, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(unflatten(&f, 2, 2).unwrap(), m);
    }

    #[test]
    fn prob_vector_checks_sum() {
        assert!(ProbVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(NonNegVector::new(vec![-1.0]).is_err());
        let v = NonNegVector::new(vec![0.0, 2.0]).unwrap();
        assert!(v.not_identically_zero() && !v.all_positive());
    }
}
