use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{MotsError, Result};
use crate::geometry::{mask_to_bbox, BBox, BinaryMask};
use crate::metrics::FrameAnnotations;
use crate::pipeline::Detection;

/// Degradations applied to ground truth to imitate detector and flow output.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationModel {
    /// Standard deviation (px) of independent noise on each detector box coordinate.
    pub box_jitter: f64,
    /// Margin (px) by which detector boxes exceed the true box on every side.
    pub box_expand: f64,
    /// Erosion (> 0) or dilation (< 0) radius applied to each mask.
    pub mask_radius: i32,
    pub miss_prob: f64,
    /// Mean number of spurious detections per frame.
    pub false_positive_rate: f64,
    /// Per-component noise added to identity vectors before normalization.
    pub embedding_noise: f64,
    /// Per-object flow error (px) per frame of temporal distance.
    pub flow_noise: f64,
}

impl PerturbationModel {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(0.0..=1.0).contains(&self.miss_prob) {
            return Err(MotsError::Config(format!(
                "miss probability {} outside [0, 1]",
                self.miss_prob
            )));
        }
        for (name, v) in [
            ("box_jitter", self.box_jitter),
            ("box_expand", self.box_expand),
            ("false_positive_rate", self.false_positive_rate),
            ("embedding_noise", self.embedding_noise),
            ("flow_noise", self.flow_noise),
        ] {
            if !finite_nonneg(v) {
                return Err(MotsError::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        *self == PerturbationModel::default()
    }
}

fn jitter_box(b: &BBox, model: &PerturbationModel, w: f64, h: f64, rng: &mut ChaCha8Rng) -> BBox {
    let e = model.box_expand;
    let mut c = [b.x1 - e, b.y1 - e, b.x2 + e, b.y2 + e];
    if model.box_jitter > 0.0 {
        let normal = Normal::new(0.0, model.box_jitter).expect("validated jitter");
        c.iter_mut().for_each(|v| *v += normal.sample(rng));
    }
    let (x1, x2) = clamp_span(c[0], c[2], w);
    let (y1, y2) = clamp_span(c[1], c[3], h);
    BBox { x1, y1, x2, y2 }
}

/// Orders and clamps a span to `[0, limit]`, keeping it at least 1 px long.
fn clamp_span(a: f64, b: f64, limit: f64) -> (f64, f64) {
    let lo = a.min(b).clamp(0.0, limit - 1.0);
    let hi = a.max(b).clamp(lo + 1.0, limit);
    (lo, hi)
}

/// Turns ground truth into detections, deterministically in `seed` and the frame index.
///
/// Objects are processed in id order; each surviving mask is clipped against
/// the masks kept before it so the output stays non-overlapping.
pub fn perturb(gt: &FrameAnnotations, model: &PerturbationModel, seed: u64) -> Result<Vec<Detection>> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(0xD134_2543_DE82_EF95)
            .wrapping_add(gt.frame as u64),
    );
    let mut objects: Vec<_> = gt.objects.iter().collect();
    objects.sort_by_key(|o| o.object_id);

    let mut out: Vec<Detection> = Vec::with_capacity(objects.len());
    let mut occupied: Option<BinaryMask> = None;
    let keep = |mask: BinaryMask, occupied: &mut Option<BinaryMask>| -> Result<Option<BinaryMask>> {
        let clipped = match occupied.as_ref() {
            Some(o) => mask.subtract(o)?,
            None => mask,
        };
        if clipped.is_empty() {
            return Ok(None);
        }
        *occupied = Some(match occupied.take() {
            Some(o) => o.union(&clipped)?,
            None => clipped.clone(),
        });
        Ok(Some(clipped))
    };

    for o in objects {
        // draw every random quantity so one object's fate never shifts another's stream
        let missed = rng.random_bool(model.miss_prob);
        let (w, h) = (o.mask.width() as f64, o.mask.height() as f64);
        let true_box = mask_to_bbox(&o.mask)?;
        let bbox = jitter_box(&true_box, model, w, h, &mut rng);
        if missed {
            continue;
        }
        let mask = o.mask.morph(model.mask_radius);
        if let Some(mask) = keep(mask, &mut occupied)? {
            out.push(Detection { class_id: o.class_id, bbox, mask, source_id: Some(o.object_id) });
        }
    }

    if model.false_positive_rate > 0.0 {
        let Some(first) = gt.objects.first() else {
            return Ok(out);
        };
        let (h, w) = (first.mask.height(), first.mask.width());
        let count = Poisson::new(model.false_positive_rate)
            .map_err(|e| MotsError::Config(format!("false positive rate: {e}")))?
            .sample(&mut rng) as usize;
        for _ in 0..count {
            let bw = rng.random_range(4..=(w / 4).max(4)).min(w);
            let bh = rng.random_range(4..=(h / 4).max(4)).min(h);
            let x0 = rng.random_range(0..=w - bw);
            let y0 = rng.random_range(0..=h - bh);
            let class_id = if rng.random_bool(0.5) { 1 } else { 2 };
            let mask = BinaryMask::from_fn(h, w, |r, c| {
                (x0..x0 + bw).contains(&c) && (y0..y0 + bh).contains(&r)
            });
            if let Some(mask) = keep(mask, &mut occupied)? {
                let b = mask_to_bbox(&mask)?;
                let bbox = jitter_box(&b, model, w as f64, h as f64, &mut rng);
                out.push(Detection { class_id, bbox, mask, source_id: None });
            }
        }
    }
    Ok(out)
}
