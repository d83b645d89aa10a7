use serde::{Deserialize, Serialize};

use crate::error::VectorError;

/// Unit-L2-norm embedding with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Normalizes `values` to unit length.
    pub fn normalized(values: Vec<f64>) -> Result<Self, VectorError> {
        if values.is_empty() {
            return Err(VectorError::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite);
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(VectorError::ZeroNorm);
        }
        Ok(Self { values: values.into_iter().map(|v| v / norm).collect() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &EmbeddingVector) -> Result<f64, VectorError> {
        if self.dim() != other.dim() {
            return Err(VectorError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(dot(&self.values, &other.values))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity clamped to `[-1, 1]`.
///
/// Evaluated as `a·b / sqrt((a·a)(b·b))`, so identical inputs give exactly
/// `1.0`: the two dot products are bit-identical and `sqrt(x*x) == x`.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, VectorError> {
    let ab = a.dot(b)?;
    let denom = (dot(&a.values, &a.values) * dot(&b.values, &b.values)).sqrt();
    Ok((ab / denom).clamp(-1.0, 1.0))
}

/// Symmetric pairwise cosine distances, `1 - cos`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from explicit entries. Callers must supply a symmetric matrix
    /// with zero diagonal and entries in `[0, 2]`.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self, VectorError> {
        if entries.len() != n * n {
            return Err(VectorError::DimensionMismatch { left: n * n, right: entries.len() });
        }
        let m = Self { n, entries };
        m.check_laws()?;
        Ok(m)
    }

    pub(crate) fn from_entries_unchecked(n: usize, entries: Vec<f64>) -> Self {
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Symmetry, zero diagonal, range `[0, 2]`.
    pub fn check_laws(&self) -> Result<(), VectorError> {
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(VectorError::MatrixLaw(format!("diagonal {i} is {}", self.get(i, i))));
            }
            for j in 0..self.n {
                let d = self.get(i, j);
                if !(0.0..=2.0).contains(&d) {
                    return Err(VectorError::MatrixLaw(format!("entry ({i},{j}) = {d}")));
                }
                if d != self.get(j, i) {
                    return Err(VectorError::MatrixLaw(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(())
    }
}

/// Coherence plus retention, averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicScore {
    pub coherence: f64,
    pub retention: f64,
    pub mean: f64,
}

impl HeuristicScore {
    pub fn new(coherence: f64, retention: f64) -> Self {
        Self { coherence, retention, mean: (coherence + retention) / 2.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes() {
        let v = EmbeddingVector::normalized(vec![3.0, 4.0]).unwrap();
        assert_eq!(v.values(), &[0.6, 0.8]);
        assert!(matches!(EmbeddingVector::normalized(vec![0.0, 0.0]), Err(VectorError::ZeroNorm)));
        assert!(matches!(
            EmbeddingVector::normalized(vec![f64::NAN]),
            Err(VectorError::NonFinite)
        ));
    }

    #[test]
    fn cosine_identity_is_exact() {
        let v = EmbeddingVector::normalized(vec![0.1, -0.7, 0.33, 1e-3, 5.0]).unwrap();
        assert_eq!(cosine_similarity(&v, &v).unwrap(), 1.0);
        let w = EmbeddingVector::normalized(vec![1.0, 0.0]).unwrap();
        assert!(cosine_similarity(&v, &w).is_err());
    }

    #[test]
    fn heuristic_mean() {
        let s = HeuristicScore::new(0.8, 0.6);
        assert!((s.mean - 0.7).abs() < 1e-15);
    }

    #[test]
    fn matrix_laws() {
        assert!(DistanceMatrix::from_entries(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(DistanceMatrix::from_entries(2, vec![0.0, 1.0, 0.5, 0.0]).is_err());
        assert!(DistanceMatrix::from_entries(2, vec![0.1, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_entries(2, vec![0.0, 2.5, 2.5, 0.0]).is_err());
    }
}
