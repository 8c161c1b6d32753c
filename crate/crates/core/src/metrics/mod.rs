//! CLEAR-MOTS evaluation: per-frame mask matching, id-switch accounting and
//! the sMOTSA / MOTSA / MOTSP scores.

mod matching;
mod report;
mod scores;

pub use matching::{match_frame, AnnotatedObject, FrameAnnotations, FrameMatches, MaskMatch};
pub use report::{class_name, csv_table, text_table, ClassFilter, CLASS_CAR, CLASS_PEDESTRIAN};
pub use scores::{accumulate, ClassCounts, MotsScores, ScoreSummary};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;

/// Matches and accumulates whole sequences. Frames missing from either side
/// are treated as empty.
pub fn evaluate(gt: &[FrameAnnotations], pred: &[FrameAnnotations]) -> Result<MotsScores> {
    let gt: BTreeMap<u32, &FrameAnnotations> = gt.iter().map(|f| (f.frame, f)).collect();
    let pred: BTreeMap<u32, &FrameAnnotations> = pred.iter().map(|f| (f.frame, f)).collect();
    let frames: BTreeSet<u32> = gt.keys().chain(pred.keys()).copied().collect();
    let matches = frames
        .into_iter()
        .map(|f| {
            let empty = FrameAnnotations::new(f, Vec::new());
            match_frame(gt.get(&f).copied().unwrap_or(&empty), pred.get(&f).copied().unwrap_or(&empty))
        })
        .collect::<Result<Vec<_>>>()?;
    accumulate(&matches)
}
