use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{MotsError, Result};
use crate::geometry::{mask_iou, BinaryMask};

/// One labelled instance mask.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedObject {
    pub object_id: u32,
    pub class_id: u32,
    pub mask: BinaryMask,
}

/// All instances of one source (ground truth or prediction) in one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameAnnotations {
    pub frame: u32,
    pub objects: Vec<AnnotatedObject>,
}

impl FrameAnnotations {
    pub fn new(frame: u32, objects: Vec<AnnotatedObject>) -> Self {
        FrameAnnotations { frame, objects }
    }

    /// Checks id uniqueness, consistent image size and pairwise disjoint masks.
    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| MotsError::InvalidAnnotations {
            frame: self.frame,
            reason,
        };
        let mut seen = HashSet::new();
        for o in &self.objects {
            if !seen.insert(o.object_id) {
                return Err(invalid(format!("duplicate object id {}", o.object_id)));
            }
        }
        if let Some(first) = self.objects.first() {
            let dims = (first.mask.height(), first.mask.width());
            if let Some(o) = self
                .objects
                .iter()
                .find(|o| (o.mask.height(), o.mask.width()) != dims)
            {
                return Err(invalid(format!(
                    "object {} is {}x{}, expected {}x{}",
                    o.object_id,
                    o.mask.height(),
                    o.mask.width(),
                    dims.0,
                    dims.1
                )));
            }
        }
        for (i, a) in self.objects.iter().enumerate() {
            for b in &self.objects[i + 1..] {
                if a.mask.intersection_area(&b.mask)? > 0 {
                    return Err(invalid(format!(
                        "masks of objects {} and {} overlap",
                        a.object_id, b.object_id
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskMatch {
    pub class_id: u32,
    pub gt_id: u32,
    pub pred_id: u32,
    pub iou: f64,
}

/// Outcome of matching one frame: true positives plus unmatched ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatches {
    pub frame: u32,
    pub matches: Vec<MaskMatch>,
    /// `(class_id, pred_id)` of unmatched predictions.
    pub false_positives: Vec<(u32, u32)>,
    /// `(class_id, gt_id)` of unmatched ground-truth masks.
    pub false_negatives: Vec<(u32, u32)>,
}

/// Matches predictions to ground truth of the same class at mask IoU > 0.5.
pub fn match_frame(gt: &FrameAnnotations, pred: &FrameAnnotations) -> Result<FrameMatches> {
    gt.validate()?;
    pred.validate()?;
    if let (Some(g), Some(p)) = (gt.objects.first(), pred.objects.first()) {
        if (g.mask.height(), g.mask.width()) != (p.mask.height(), p.mask.width()) {
            return Err(MotsError::shape(format!(
                "frame {}: ground truth is {}x{} but predictions are {}x{}",
                gt.frame,
                g.mask.height(),
                g.mask.width(),
                p.mask.height(),
                p.mask.width()
            )));
        }
    }
    let mut out = FrameMatches {
        frame: gt.frame,
        ..Default::default()
    };
    let mut pred_taken = vec![false; pred.objects.len()];
    for g in &gt.objects {
        let mut hit = None;
        for (j, p) in pred.objects.iter().enumerate() {
            if pred_taken[j] || p.class_id != g.class_id {
                continue;
            }
            let iou = mask_iou(&g.mask, &p.mask)?;
            // disjoint masks admit at most one partner above 0.5
            if iou > 0.5 {
                hit = Some((j, iou));
                break;
            }
        }
        match hit {
            Some((j, iou)) => {
                pred_taken[j] = true;
                out.matches.push(MaskMatch {
                    class_id: g.class_id,
                    gt_id: g.object_id,
                    pred_id: pred.objects[j].object_id,
                    iou,
                });
            }
            None => out.false_negatives.push((g.class_id, g.object_id)),
        }
    }
    for (p, taken) in pred.objects.iter().zip(pred_taken) {
        if !taken {
            out.false_positives.push((p.class_id, p.object_id));
        }
    }
    Ok(out)
}
