//! Value-level training objectives: detection cross-entropy, smooth-L1 box
//! regression, per-class sigmoid mask BCE, and the batch-hard triplet loss
//! on identity vectors.

use crate::error::{MotsError, Result};
use crate::fusion::cosine;

/// Probability floor used wherever a logarithm is taken.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSample {
    /// Class distribution over `K` classes.
    pub class_probs: Vec<f64>,
    pub true_class: usize,
    pub box_offsets: [f64; 4],
    pub true_offsets: [f64; 4],
}

impl DetectionSample {
    pub fn validate(&self) -> Result<()> {
        if self.true_class >= self.class_probs.len() {
            return Err(MotsError::shape(format!(
                "true class {} out of range for {} classes",
                self.true_class,
                self.class_probs.len()
            )));
        }
        if self.class_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(MotsError::shape("class probabilities must lie in [0, 1]"));
        }
        let total: f64 = self.class_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(MotsError::shape(format!("class probabilities sum to {total}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSample {
    /// `probs[k]` is the `m x m` row-major sigmoid output for class `k`.
    pub probs: Vec<Vec<f64>>,
    pub target: Vec<bool>,
    pub true_class: usize,
}

fn nonempty<T>(xs: &[T], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(MotsError::UndefinedLoss(format!("{what} needs at least one sample")));
    }
    Ok(())
}

/// Mean of `-ln p[true]`, with `p` floored at [`PROB_EPS`].
pub fn classification_loss(samples: &[DetectionSample]) -> Result<f64> {
    nonempty(samples, "classification loss")?;
    let mut total = 0.0;
    for s in samples {
        s.validate()?;
        total -= s.class_probs[s.true_class].max(PROB_EPS).ln();
    }
    Ok(total / samples.len() as f64)
}

pub fn smooth_l1(d: f64) -> f64 {
    let a = d.abs();
    if a < 1.0 {
        0.5 * d * d
    } else {
        a - 0.5
    }
}

/// Mean over samples of the smooth-L1 distance summed over the four offsets.
pub fn box_regression_loss(samples: &[DetectionSample]) -> Result<f64> {
    nonempty(samples, "box regression loss")?;
    let total: f64 = samples
        .iter()
        .map(|s| {
            s.box_offsets
                .iter()
                .zip(&s.true_offsets)
                .map(|(t, g)| smooth_l1(t - g))
                .sum::<f64>()
        })
        .sum();
    Ok(total / samples.len() as f64)
}

/// Binary cross-entropy of the ground-truth class channel only, averaged over
/// samples and pixels; probabilities are clamped to `[eps, 1 - eps]`.
pub fn mask_loss(samples: &[MaskSample]) -> Result<f64> {
    nonempty(samples, "mask loss")?;
    let mut total = 0.0;
    for s in samples {
        let channel = s.probs.get(s.true_class).ok_or_else(|| {
            MotsError::shape(format!("mask sample has no channel {}", s.true_class))
        })?;
        if channel.len() != s.target.len() || channel.is_empty() {
            return Err(MotsError::shape("mask probabilities and target differ in size"));
        }
        let bce: f64 = channel
            .iter()
            .zip(&s.target)
            .map(|(&p, &y)| {
                let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
                if y {
                    -p.ln()
                } else {
                    -(1.0 - p).ln()
                }
            })
            .sum();
        total += bce / channel.len() as f64;
    }
    Ok(total / samples.len() as f64)
}

/// Embeddings with identity labels for the batch-hard triplet loss.
#[derive(Debug, Clone)]
pub struct TripletBatch {
    pub vectors: Vec<Vec<f64>>,
    pub ids: Vec<u64>,
    pub margin: f64,
}

impl TripletBatch {
    pub fn new(vectors: Vec<Vec<f64>>, ids: Vec<u64>, margin: f64) -> Result<Self> {
        if vectors.len() != ids.len() {
            return Err(MotsError::shape("one id is needed per vector"));
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(MotsError::Config(format!("margin must be >= 0, got {margin}")));
        }
        Ok(TripletBatch {
            vectors,
            ids,
            margin,
        })
    }
}

/// Batch-hard triplet loss with cosine similarity, averaged over anchors that
/// have at least one positive (another vector of the same id) and one negative.
pub fn triplet_track_loss(batch: &TripletBatch) -> Result<f64> {
    triplet_track_loss_with(batch, cosine)
}

/// As [`triplet_track_loss`] with a caller-supplied similarity.
pub fn triplet_track_loss_with(
    batch: &TripletBatch,
    similarity: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    nonempty(&batch.vectors, "triplet loss")?;
    let n = batch.vectors.len();
    // running mean, so equal per-anchor losses average to exactly that value
    let mut mean = 0.0;
    let mut anchors = 0usize;
    for a in 0..n {
        let mut hardest_neg = f64::NEG_INFINITY;
        let mut hardest_pos = f64::INFINITY;
        for b in 0..n {
            if b == a {
                continue;
            }
            let s = similarity(&batch.vectors[a], &batch.vectors[b]);
            if batch.ids[b] == batch.ids[a] {
                hardest_pos = hardest_pos.min(s);
            } else {
                hardest_neg = hardest_neg.max(s);
            }
        }
        if hardest_pos.is_finite() && hardest_neg.is_finite() {
            let loss = (batch.margin + (hardest_neg - hardest_pos)).max(0.0);
            anchors += 1;
            mean += (loss - mean) / anchors as f64;
        }
    }
    if anchors == 0 {
        return Err(MotsError::UndefinedLoss(
            "no anchor has both a positive and a negative".into(),
        ));
    }
    Ok(mean)
}

/// Unweighted sum of the four components.
pub fn total_loss(cls: f64, bbox: f64, mask: f64, track: f64) -> f64 {
    cls + bbox + mask + track
}
