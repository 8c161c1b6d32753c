//! KITTI-MOTS style annotation text: one instance per line,
//! `frame object_id class_id height width rle`, with
//! `object_id = class_id * 1000 + instance`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::rle::{decode_counts, rle_encode};
use crate::error::{MotsError, Result};
use crate::geometry::BinaryMask;
use crate::metrics::{AnnotatedObject, FrameAnnotations};

pub const ID_CLASS_FACTOR: u32 = 1000;

/// Composes a file object id from class and instance number.
pub fn encode_object_id(class_id: u32, instance: u32) -> Result<u32> {
    if instance >= ID_CLASS_FACTOR {
        return Err(MotsError::shape(format!(
            "instance {instance} does not fit below {ID_CLASS_FACTOR}"
        )));
    }
    Ok(class_id * ID_CLASS_FACTOR + instance)
}

fn parse_u32(field: &str, name: &str, line: usize) -> Result<u32> {
    field
        .parse::<u32>()
        .map_err(|_| MotsError::parse(line, format!("{name} {field:?} is not a non-negative integer")))
}

/// Parses annotation text into frames sorted by index, objects sorted by id.
pub fn parse_str(text: &str) -> Result<Vec<FrameAnnotations>> {
    let mut frames: BTreeMap<u32, Vec<AnnotatedObject>> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(MotsError::parse(
                line,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let frame = parse_u32(fields[0], "frame", line)?;
        let object_id = parse_u32(fields[1], "object id", line)?;
        let class_id = parse_u32(fields[2], "class id", line)?;
        let height = parse_u32(fields[3], "height", line)?;
        let width = parse_u32(fields[4], "width", line)?;
        if !(class_id == 1 || class_id == 2) {
            return Err(MotsError::parse(line, format!("unknown class id {class_id}")));
        }
        if object_id / ID_CLASS_FACTOR != class_id {
            return Err(MotsError::parse(
                line,
                format!("object id {object_id} does not encode class {class_id}"),
            ));
        }
        if height == 0 || width == 0 {
            return Err(MotsError::parse(line, "image size must be positive"));
        }
        let counts = decode_counts(fields[5]).map_err(|e| MotsError::parse(line, e))?;
        let mask = BinaryMask::from_counts(height, width, &counts)
            .map_err(|e| MotsError::parse(line, e.to_string()))?;
        let objects = frames.entry(frame).or_default();
        if objects.iter().any(|o| o.object_id == object_id) {
            return Err(MotsError::parse(
                line,
                format!("object id {object_id} repeated in frame {frame}"),
            ));
        }
        objects.push(AnnotatedObject {
            object_id,
            class_id,
            mask,
        });
    }
    Ok(frames
        .into_iter()
        .map(|(frame, mut objects)| {
            objects.sort_by_key(|o| o.object_id);
            FrameAnnotations { frame, objects }
        })
        .collect())
}

pub fn parse_file(path: impl AsRef<Path>) -> Result<Vec<FrameAnnotations>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MotsError::io(path, e))?;
    parse_str(&text).map_err(|e| match e {
        MotsError::Parse { line, reason } => MotsError::Parse {
            line,
            reason: format!("{}: {reason}", path.display()),
        },
        other => other,
    })
}

/// Serializes frames in (frame, object id) order with `\n` line endings.
pub fn write_str(frames: &[FrameAnnotations]) -> Result<String> {
    let mut rows: Vec<(u32, &AnnotatedObject)> = frames
        .iter()
        .flat_map(|f| f.objects.iter().map(move |o| (f.frame, o)))
        .collect();
    rows.sort_by_key(|(f, o)| (*f, o.object_id));
    let mut out = String::new();
    for (frame, o) in rows {
        if o.object_id / ID_CLASS_FACTOR != o.class_id {
            return Err(MotsError::shape(format!(
                "object id {} does not encode class {}",
                o.object_id, o.class_id
            )));
        }
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            frame,
            o.object_id,
            o.class_id,
            o.mask.height(),
            o.mask.width(),
            rle_encode(&o.mask)
        );
    }
    Ok(out)
}

pub fn write_file(path: impl AsRef<Path>, frames: &[FrameAnnotations]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_str(frames)?).map_err(|e| MotsError::io(path, e))
}
