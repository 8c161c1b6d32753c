//! Detector boxes sidecar: one `frame id x1 y1 x2 y2` line per detection,
//! keyed by the same ids as the mask file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{MotsError, Result};
use crate::geometry::BBox;

pub type BoxTable = BTreeMap<(u32, u32), BBox>;

pub fn parse_boxes_str(text: &str) -> Result<BoxTable> {
    let mut table = BoxTable::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(MotsError::parse(line, format!("expected 6 fields, found {}", fields.len())));
        }
        let int = |i: usize, name: &str| {
            fields[i]
                .parse::<u32>()
                .map_err(|_| MotsError::parse(line, format!("{name} {:?} is not a non-negative integer", fields[i])))
        };
        let (frame, id) = (int(0, "frame")?, int(1, "id")?);
        let mut c = [0.0; 4];
        for (k, v) in c.iter_mut().enumerate() {
            *v = fields[k + 2]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| MotsError::parse(line, format!("coordinate {:?} is not a number", fields[k + 2])))?;
        }
        let bbox = BBox::new(c[0], c[1], c[2], c[3]).map_err(|e| MotsError::parse(line, e.to_string()))?;
        if bbox.area() <= 0.0 {
            return Err(MotsError::parse(line, "box has zero area"));
        }
        if table.insert((frame, id), bbox).is_some() {
            return Err(MotsError::parse(line, format!("duplicate box for object {id} in frame {frame}")));
        }
    }
    Ok(table)
}

pub fn parse_boxes_file(path: impl AsRef<Path>) -> Result<BoxTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MotsError::io(path, e))?;
    parse_boxes_str(&text).map_err(|e| match e {
        MotsError::Parse { line, reason } => MotsError::Parse {
            line,
            reason: format!("{}: {reason}", path.display()),
        },
        other => other,
    })
}

pub fn write_boxes_str(table: &BoxTable) -> String {
    let mut out = String::new();
    for ((frame, id), b) in table {
        let _ = writeln!(out, "{frame} {id} {} {} {} {}", b.x1, b.y1, b.x2, b.y2);
    }
    out
}

pub fn write_boxes_file(path: impl AsRef<Path>, table: &BoxTable) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_boxes_str(table)).map_err(|e| MotsError::io(path, e))
}
