use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::FrameMatches;
use crate::error::{MotsError, Result};

/// Raw counts for one class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    /// Number of ground-truth masks, `|M|`.
    pub gt_masks: u64,
    pub tp: u64,
    /// Sum of mask IoU over true positives.
    pub soft_tp: f64,
    pub fp: u64,
    pub fn_: u64,
    pub ids: u64,
}

impl ClassCounts {
    fn merge(&mut self, o: &ClassCounts) {
        self.gt_masks += o.gt_masks;
        self.tp += o.tp;
        self.soft_tp += o.soft_tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.ids += o.ids;
    }

    /// `(TP - FP - IDS) / |M|`.
    pub fn motsa(&self) -> Result<f64> {
        if self.gt_masks == 0 {
            return Err(MotsError::UndefinedScores);
        }
        Ok((self.tp as f64 - self.fp as f64 - self.ids as f64) / self.gt_masks as f64)
    }

    /// `(soft TP - FP - IDS) / |M|`.
    pub fn smotsa(&self) -> Result<f64> {
        if self.gt_masks == 0 {
            return Err(MotsError::UndefinedScores);
        }
        Ok((self.soft_tp - self.fp as f64 - self.ids as f64) / self.gt_masks as f64)
    }

    /// `soft TP / TP`; reported as 1.0 with `defined = false` when there are no TPs.
    pub fn motsp(&self) -> (f64, bool) {
        if self.tp == 0 {
            (1.0, false)
        } else {
            (self.soft_tp / self.tp as f64, true)
        }
    }

    pub fn summary(&self) -> Result<ScoreSummary> {
        let (motsp, motsp_defined) = self.motsp();
        Ok(ScoreSummary {
            smotsa: self.smotsa()?,
            motsa: self.motsa()?,
            motsp,
            motsp_defined,
            ids: self.ids,
            counts: *self,
        })
    }
}

/// Derived scores for one class (or the class union).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub smotsa: f64,
    pub motsa: f64,
    pub motsp: f64,
    pub motsp_defined: bool,
    pub ids: u64,
    pub counts: ClassCounts,
}

/// Accumulated CLEAR-MOTS counts per class.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MotsScores {
    pub per_class: BTreeMap<u32, ClassCounts>,
}

impl MotsScores {
    pub fn class(&self, class_id: u32) -> Option<&ClassCounts> {
        self.per_class.get(&class_id)
    }

    /// Counts summed over all classes.
    pub fn combined(&self) -> ClassCounts {
        let mut all = ClassCounts::default();
        for c in self.per_class.values() {
            all.merge(c);
        }
        all
    }
}

/// Folds per-frame matches (ascending frame order) into per-class counts.
///
/// An id switch is counted when a ground-truth object is matched to a
/// different predicted id than at its most recent earlier match, however many
/// frames ago that was.
pub fn accumulate(frames: &[FrameMatches]) -> Result<MotsScores> {
    let mut scores = MotsScores::default();
    let mut last_pred: HashMap<(u32, u32), u32> = HashMap::new();
    let mut prev_frame: Option<u32> = None;
    for f in frames {
        if let Some(p) = prev_frame {
            if f.frame <= p {
                return Err(MotsError::FrameOrder {
                    frame: f.frame,
                    last: p,
                });
            }
        }
        prev_frame = Some(f.frame);
        for m in &f.matches {
            let c = scores.per_class.entry(m.class_id).or_default();
            c.gt_masks += 1;
            c.tp += 1;
            c.soft_tp += m.iou;
            if let Some(prev) = last_pred.insert((m.class_id, m.gt_id), m.pred_id) {
                if prev != m.pred_id {
                    c.ids += 1;
                }
            }
        }
        for &(class, _) in &f.false_negatives {
            let c = scores.per_class.entry(class).or_default();
            c.gt_masks += 1;
            c.fn_ += 1;
        }
        for &(class, _) in &f.false_positives {
            scores.per_class.entry(class).or_default().fp += 1;
        }
    }
    if scores.combined().gt_masks == 0 {
        return Err(MotsError::UndefinedScores);
    }
    Ok(scores)
}
