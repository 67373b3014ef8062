//! Block partitions of the indices `1..n` and the ξ-vectors built from them.
//!
//! Block `k` holds `n_k` consecutive indices. In deterministic mode
//! `n_k = ⌊n p̃_k⌋` for `k < K` and the last block takes the remainder; in
//! empirical mode `n_k` counts the observations of category `k`.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    Deterministic,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    n: usize,
    sizes: Vec<usize>,
    reference: Vec<f64>,
    mode: PartitionMode,
    non_integral: bool,
}

/// Deterministic partition of `n` indices along the probability vector `p̃`.
pub fn partition(reference: &[f64], n: usize) -> Result<BlockPartition> {
    let k = reference.len();
    if k == 0 {
        return Err(EngineError::Config("reference vector is empty".into()));
    }
    let s: f64 = reference.iter().sum();
    if reference.iter().any(|x| !(x.is_finite() && *x > 0.0)) || (s - 1.0).abs() > 1e-10 {
        return Err(EngineError::Config(format!(
            "reference must be a strictly positive probability vector (sum {s})"
        )));
    }
    let need = reference.iter().map(|p| (1.0 / p).ceil() as usize).max().unwrap_or(1);
    if n < need {
        return Err(EngineError::SampleSize(format!("n = {n} leaves an empty block; need n >= {need}")));
    }
    let mut sizes = Vec::with_capacity(k);
    let mut non_integral = false;
    let mut used = 0usize;
    for (i, &p) in reference.iter().enumerate() {
        let exact = n as f64 * p;
        let r = exact.round();
        let integral = (exact - r).abs() <= 1e-9 * exact.max(1.0);
        non_integral |= !integral;
        if i + 1 < k {
            let nk = if integral { r as usize } else { exact.floor() as usize };
            sizes.push(nk);
            used += nk;
        }
    }
    if used >= n {
        return Err(EngineError::SampleSize(format!("n = {n} leaves the last block empty")));
    }
    sizes.push(n - used);
    if sizes.iter().any(|&s| s == 0) {
        return Err(EngineError::SampleSize(format!("n = {n} leaves an empty block")));
    }
    Ok(BlockPartition { n, sizes, reference: reference.to_vec(), mode: PartitionMode::Deterministic, non_integral })
}

/// Empirical partition from observed category labels, sorted into `categories` order.
pub fn ingest_sample<T: Ord + Clone>(observations: &[T], categories: &[T]) -> Result<BlockPartition> {
    let mut ingest = StreamIngest::new(categories)?;
    for x in observations {
        ingest.push(x)?;
    }
    ingest.finish()
}

/// Incremental counterpart of [`ingest_sample`]: observations arrive one at a time.
#[derive(Debug, Clone)]
pub struct StreamIngest<T: Ord> {
    index: BTreeMap<T, usize>,
    counts: Vec<usize>,
}

impl<T: Ord + Clone> StreamIngest<T> {
    pub fn new(categories: &[T]) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, c) in categories.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(EngineError::Config("duplicate category".into()));
            }
        }
        if index.is_empty() {
            return Err(EngineError::Config("no categories".into()));
        }
        Ok(Self { index, counts: vec![0; categories.len()] })
    }

    pub fn push(&mut self, x: &T) -> Result<()> {
        let i = *self
            .index
            .get(x)
            .ok_or_else(|| EngineError::Config("observation outside the category list".into()))?;
        self.counts[i] += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<BlockPartition> {
        BlockPartition::from_counts(self.counts)
    }
}

impl BlockPartition {
    /// Empirical partition with the given category counts.
    pub fn from_counts(counts: Vec<usize>) -> Result<Self> {
        if let Some(k) = counts.iter().position(|&c| c == 0) {
            return Err(EngineError::Config(format!("category {k} has no observation")));
        }
        let n: usize = counts.iter().sum();
        let reference = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(Self { n, sizes: counts, reference, mode: PartitionMode::Empirical, non_integral: false })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `p̃`: the reference vector, or the empirical frequencies.
    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    /// True when some `n p̃_k` was not an integer; the estimator then targets
    /// the rounded frequencies `n_k / n` and carries an `O(1/n)` bias.
    pub fn non_integral(&self) -> bool {
        self.non_integral
    }

    /// Contiguous index ranges `I_k`.
    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.sizes
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect()
    }

    /// Every block enlarged `r`-fold, as when each observation is replicated `r` times.
    pub fn replicated(&self, r: usize) -> Self {
        let mut out = self.clone();
        out.n *= r;
        for s in &mut out.sizes {
            *s *= r;
        }
        out
    }
}

/// `(ξ_det, ξ_norm)` for one weight vector: block sums over `n`, and block sums
/// over the total (`None` when the total is zero, a guaranteed non-member).
pub fn xi_vectors(weights: &[f64], part: &BlockPartition) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if weights.len() != part.n() {
        return Err(EngineError::Config(format!("{} weights for n = {}", weights.len(), part.n())));
    }
    let sums: Vec<f64> = part.ranges().into_iter().map(|r| weights[r].iter().sum()).collect();
    let n = part.n() as f64;
    let det = sums.iter().map(|s| s / n).collect();
    Ok((det, normalize_sums(&sums)))
}

/// `S / ΣS`, `None` for a zero total.
///
/// The last entry is `1 - Σ others`; for nonnegative sums the components then
/// add up (left to right) to exactly `1.0`.
pub fn normalize_sums(sums: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = sums.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return None;
    }
    let k = sums.len();
    let mut out: Vec<f64> = sums[..k - 1].iter().map(|s| s / total).collect();
    let head: f64 = out.iter().sum();
    out.push(1.0 - head);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(partition(&[0.5, 0.5], 4).unwrap().sizes(), &[2, 2]);
        assert_eq!(partition(&[0.2, 0.3, 0.5], 10).unwrap().sizes(), &[2, 3, 5]);
        let third = 1.0 / 3.0;
        let p = partition(&[third, third, third], 10).unwrap();
        assert_eq!(p.sizes(), &[3, 3, 4]);
        assert!(p.non_integral());
        assert!(!partition(&[0.2, 0.3, 0.5], 10).unwrap().non_integral());
        assert!(partition(&[0.1, 0.9], 5).is_err());
    }

    #[test]
    fn ingest() {
        let p = ingest_sample(&['a', 'b', 'a', 'b'], &['a', 'b']).unwrap();
        assert_eq!(p.sizes(), &[2, 2]);
        assert_eq!(p.reference(), &[0.5, 0.5]);
        let p = ingest_sample(&['a', 'a', 'a', 'b'], &['a', 'b']).unwrap();
        assert_eq!(p.reference(), &[0.75, 0.25]);
        assert!(ingest_sample(&['a', 'a'], &['a', 'b']).is_err());
    }

    #[test]
    fn xi_examples() {
        let part = partition(&[0.5, 0.5], 4).unwrap();
        let (d, nrm) = xi_vectors(&[1.0; 4], &part).unwrap();
        assert_eq!(d, vec![0.5, 0.5]);
        assert_eq!(nrm.unwrap(), vec![0.5, 0.5]);
        let (d, nrm) = xi_vectors(&[2.0, 0.0, 0.0, 2.0], &part).unwrap();
        assert_eq!(d, vec![0.5, 0.5]);
        assert_eq!(nrm.unwrap(), vec![0.5, 0.5]);
        let (_, nrm) = xi_vectors(&[1.0, -1.0, 1.0, -1.0], &part).unwrap();
        assert!(nrm.is_none());
    }
}
