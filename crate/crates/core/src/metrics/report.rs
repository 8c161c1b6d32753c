use std::fmt::Write;

use super::{ClassCounts, MotsScores};
use crate::error::Result;

pub const CLASS_CAR: u32 = 1;
pub const CLASS_PEDESTRIAN: u32 = 2;

pub fn class_name(class_id: u32) -> String {
    match class_id {
        CLASS_CAR => "car".to_string(),
        CLASS_PEDESTRIAN => "pedestrian".to_string(),
        other => format!("class{other}"),
    }
}

/// Which rows to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassFilter {
    Only(u32),
    All,
}

fn rows(scores: &MotsScores, filter: ClassFilter) -> Vec<(String, ClassCounts)> {
    match filter {
        ClassFilter::Only(c) => scores
            .class(c)
            .map(|counts| vec![(class_name(c), *counts)])
            .unwrap_or_default(),
        ClassFilter::All => {
            let mut v: Vec<_> = scores
                .per_class
                .iter()
                .map(|(&c, counts)| (class_name(c), *counts))
                .collect();
            if scores.per_class.len() > 1 {
                v.push(("all".to_string(), scores.combined()));
            }
            v
        }
    }
}

fn fmt_score(counts: &ClassCounts, f: impl Fn(&ClassCounts) -> Result<f64>) -> String {
    match f(counts) {
        Ok(v) => format!("{v:.4}"),
        Err(_) => "nan".to_string(),
    }
}

/// Fixed-width text table: class, sMOTSA, MOTSA, MOTSP, IDS.
pub fn text_table(scores: &MotsScores, filter: ClassFilter) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>8} {:>8} {:>6}",
        "class", "sMOTSA", "MOTSA", "MOTSP", "IDS"
    );
    for (name, c) in rows(scores, filter) {
        let (motsp, defined) = c.motsp();
        let motsp = if defined {
            format!("{motsp:.4}")
        } else {
            format!("{motsp:.4}*")
        };
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>8} {:>8} {:>6}",
            name,
            fmt_score(&c, ClassCounts::smotsa),
            fmt_score(&c, ClassCounts::motsa),
            motsp,
            c.ids
        );
    }
    out
}

/// Same rows as [`text_table`] in CSV form, with the raw counts appended.
pub fn csv_table(scores: &MotsScores, filter: ClassFilter) -> String {
    let mut out = String::from("class,sMOTSA,MOTSA,MOTSP,IDS,TP,FP,FN,GT\n");
    for (name, c) in rows(scores, filter) {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{},{},{},{},{}",
            name,
            c.smotsa().map_or("nan".into(), |v| format!("{v:.6}")),
            c.motsa().map_or("nan".into(), |v| format!("{v:.6}")),
            c.motsp().0,
            c.ids,
            c.tp,
            c.fp,
            c.fn_,
            c.gt_masks
        );
    }
    out
}
