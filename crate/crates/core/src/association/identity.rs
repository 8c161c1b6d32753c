use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MotsError, Result};
use crate::fusion::{cosine, FeatureGrid};

/// Length of every identity vector.
pub const IDENTITY_DIM: usize = 128;

/// Unit-norm appearance embedding of one detected object.
///
/// An all-zero ROI yields the null vector, which is similar to nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityVector {
    values: Vec<f64>,
}

impl IdentityVector {
    /// Normalizes `values`; a zero vector becomes the null vector.
    pub fn from_raw(values: Vec<f64>) -> Result<Self> {
        if values.len() != IDENTITY_DIM {
            return Err(MotsError::shape(format!(
                "identity vector has {} components, expected {IDENTITY_DIM}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MotsError::shape("identity vector is not finite"));
        }
        Ok(Self::normalized(values))
    }

    fn normalized(mut values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        IdentityVector { values }
    }

    pub fn null() -> Self {
        IdentityVector {
            values: vec![0.0; IDENTITY_DIM],
        }
    }

    pub fn is_null(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Cosine similarity; 0 against the null vector.
    pub fn similarity(&self, other: &IdentityVector) -> f64 {
        cosine(&self.values, &other.values)
    }

    /// Adds isotropic Gaussian noise of standard deviation `sigma` per
    /// component (relative to the unit vector) and renormalizes.
    pub fn perturbed(&self, sigma: f64, rng: &mut impl rand::Rng) -> Self {
        if sigma == 0.0 || self.is_null() {
            return self.clone();
        }
        let values = self
            .values
            .iter()
            .map(|v| {
                let n: f64 = StandardNormal.sample(rng);
                v + sigma * n
            })
            .collect();
        Self::normalized(values)
    }
}

/// Seeded fully connected map from a flattened ROI to [`IDENTITY_DIM`] components.
#[derive(Debug, Clone)]
pub struct IdentityEmbedder {
    input_dim: usize,
    seed: u64,
    weights: Vec<f64>,
}

impl IdentityEmbedder {
    pub fn new(input_dim: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(MotsError::shape("ROI must not be empty"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (input_dim as f64).sqrt();
        let weights = (0..input_dim * IDENTITY_DIM)
            .map(|_| {
                let n: f64 = StandardNormal.sample(&mut rng);
                scale * n
            })
            .collect();
        Ok(IdentityEmbedder {
            input_dim,
            seed,
            weights,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn embed(&self, roi: &FeatureGrid) -> Result<IdentityVector> {
        let flat = roi.as_slice();
        if flat.len() != self.input_dim {
            return Err(MotsError::shape(format!(
                "ROI has {} values, embedder expects {}",
                flat.len(),
                self.input_dim
            )));
        }
        let values = self
            .weights
            .chunks_exact(self.input_dim)
            .map(|row| row.iter().zip(flat).map(|(w, x)| w * x).sum())
            .collect();
        Ok(IdentityVector::normalized(values))
    }
}

/// One-shot embedding of `roi` with the map drawn from `seed`.
pub fn embed_roi(roi: &FeatureGrid, seed: u64) -> Result<IdentityVector> {
    IdentityEmbedder::new(roi.as_slice().len(), seed)?.embed(roi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roi() -> FeatureGrid {
        FeatureGrid::from_fn(3, 4, 4, |c, y, x| ((c * 5 + y * 3 + x) % 7) as f64 - 2.5)
    }

    #[test]
    fn deterministic_and_unit_norm() {
        let a = embed_roi(&roi(), 11).unwrap();
        let b = embed_roi(&roi(), 11).unwrap();
        assert_eq!(a, b);
        let norm: f64 = a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_ne!(a, embed_roi(&roi(), 12).unwrap());
    }

    #[test]
    fn scale_invariant() {
        let mut scaled = roi();
        scaled.scale(3.0);
        let a = embed_roi(&roi(), 5).unwrap();
        let b = embed_roi(&scaled, 5).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_roi_is_null() {
        let v = embed_roi(&FeatureGrid::zeros(2, 3, 3), 1).unwrap();
        assert!(v.is_null());
        assert_eq!(v.similarity(&v), 0.0);
        assert_eq!(v.similarity(&embed_roi(&roi(), 1).unwrap()), 0.0);
    }

    #[test]
    fn raw_length_checked() {
        assert!(IdentityVector::from_raw(vec![1.0; 3]).is_err());
    }
}
