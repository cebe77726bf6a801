//! Probability vectors and integer compositions of the probability simplex.

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on `Σ w_i = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A validated point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates `entries`: nonempty, finite, nonnegative, summing to 1 within
    /// [`SUM_TOLERANCE`]. No renormalization happens here; see [`Self::normalize`].
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        for (i, &w) in entries.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidProbability(format!("entry {i} = {w}")));
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbability(format!("entries sum to {sum}")));
        }
        Ok(Self(entries))
    }

    /// Divides nonnegative finite weights by their total.
    pub fn normalize(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidProbability("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidProbability("weights sum to zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(len: usize) -> Result<Self> {
        Self::normalize(vec![1.0; len])
    }

    pub fn point_mass(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::InvalidArgument(format!("index {index} out of range for length {len}")));
        }
        let mut v = vec![0.0; len];
        v[index] = 1.0;
        Ok(Self(v))
    }

    /// The type `(k_i / n)` of an integer composition.
    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        let n: u64 = counts.iter().map(|&k| u64::from(k)).sum();
        if n == 0 {
            return Err(Error::InvalidProbability("composition of zero".into()));
        }
        Ok(Self(counts.iter().map(|&k| f64::from(k) / n as f64).collect()))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&w| w > 0.0)
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: other.len() });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("mixing weight {lambda} outside [0, 1]")));
        }
        Self::normalize(
            self.0.iter().zip(&other.0).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect(),
        )
    }

    /// Applies `perm` to the letters: entry `i` of the result is `self[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&j| self.0[j]).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Upper bound on the number of compositions any brute-force oracle may visit.
pub const MAX_COMPOSITIONS: f64 = 1e8;

/// `C(n + parts − 1, parts − 1)` as a float (exact for the sizes we accept).
pub fn composition_count(n: u32, parts: usize) -> f64 {
    let k = parts.saturating_sub(1) as f64;
    let mut c = 1.0;
    for j in 1..parts {
        c *= (f64::from(n) + j as f64) / j as f64;
    }
    // round away the float drift in the running product
    if k > 0.0 {
        c.round()
    } else {
        1.0
    }
}

/// Lexicographic iterator over `(k_1, …, k_m)` with `k_i ≥ 0`, `Σ k_i = n`.
///
/// The first composition yielded is `(0, …, 0, n)`; the last is `(n, 0, …, 0)`.
pub struct Compositions {
    current: Vec<u32>,
    n: u32,
    done: bool,
}

impl Compositions {
    pub fn new(n: u32, parts: usize) -> Result<Self> {
        if parts == 0 {
            return Err(Error::InvalidArgument("compositions need at least one part".into()));
        }
        let count = composition_count(n, parts);
        if count > MAX_COMPOSITIONS {
            return Err(Error::ResourceLimit { what: "composition count", count, limit: MAX_COMPOSITIONS });
        }
        let mut current = vec![0; parts];
        current[parts - 1] = n;
        Ok(Self { current, n, done: false })
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let m = self.current.len();
        // Advance: find the rightmost position j < m-1 that can be incremented,
        // i.e. where the tail after j still has mass to borrow.
        let mut advanced = false;
        let mut tail: u32 = self.current[m - 1];
        for j in (0..m.saturating_sub(1)).rev() {
            if tail > 0 {
                self.current[j] += 1;
                let used: u32 = self.current[..=j].iter().sum();
                for k in j + 1..m {
                    self.current[k] = 0;
                }
                self.current[m - 1] = self.n - used;
                advanced = true;
                break;
            }
            tail += self.current[j];
        }
        if !advanced {
            self.done = true;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_vectors() {
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.4]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn positivity_flag() {
        assert!(ProbabilityVector::new(vec![0.25, 0.75]).unwrap().is_strictly_positive());
        assert!(!ProbabilityVector::new(vec![1.0, 0.0]).unwrap().is_strictly_positive());
    }

    #[test]
    fn compositions_are_complete_and_lexicographic() {
        for parts in 1..=4 {
            for n in 0..=7u32 {
                let all: Vec<_> = Compositions::new(n, parts).unwrap().collect();
                assert_eq!(all.len() as f64, composition_count(n, parts), "n={n} parts={parts}");
                assert!(all.iter().all(|c| c.iter().sum::<u32>() == n));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn composition_guard() {
        assert!(Compositions::new(10_000, 4).is_err());
        assert_eq!(composition_count(128, 3), 8385.0);
    }
}
