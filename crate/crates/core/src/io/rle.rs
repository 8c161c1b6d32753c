//! COCO compressed RLE strings.
//!
//! Counts from index 3 onward are stored as the difference to the count two
//! places earlier. Each value is emitted in 5-bit groups, least significant
//! first, offset by ASCII `'0'`; bit `0x20` marks continuation and bit `0x10`
//! of the final group carries the sign.

use crate::error::{MotsError, Result};
use crate::geometry::BinaryMask;

pub fn encode_counts(counts: &[u32]) -> String {
    let mut s = String::new();
    for (i, &c) in counts.iter().enumerate() {
        let mut x = c as i64;
        if i > 2 {
            x -= counts[i - 2] as i64;
        }
        loop {
            let mut chunk = (x & 0x1f) as u8;
            x >>= 5;
            let more = if chunk & 0x10 != 0 { x != -1 } else { x != 0 };
            if more {
                chunk |= 0x20;
            }
            s.push((chunk + 48) as char);
            if !more {
                break;
            }
        }
    }
    s
}

pub fn decode_counts(s: &str) -> std::result::Result<Vec<u32>, String> {
    let bytes = s.as_bytes();
    let mut counts: Vec<u32> = Vec::new();
    let mut p = 0usize;
    while p < bytes.len() {
        let mut x: i64 = 0;
        let mut k = 0u32;
        loop {
            let b = bytes[p];
            if !(48..48 + 64).contains(&b) {
                return Err(format!("invalid RLE character {:?} at offset {p}", b as char));
            }
            if k >= 12 {
                return Err("RLE value too long".into());
            }
            let c = (b - 48) as i64;
            x |= (c & 0x1f) << (5 * k);
            let more = c & 0x20 != 0;
            p += 1;
            k += 1;
            if !more {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
            if p >= bytes.len() {
                return Err("RLE string ends inside a value".into());
            }
        }
        let m = counts.len();
        if m > 2 {
            x += counts[m - 2] as i64;
        }
        if x < 0 || x > u32::MAX as i64 {
            return Err(format!("RLE count {x} out of range"));
        }
        counts.push(x as u32);
    }
    Ok(counts)
}

pub fn rle_encode(mask: &BinaryMask) -> String {
    encode_counts(mask.counts())
}

/// Decodes an RLE string for an `height x width` mask.
pub fn rle_decode(s: &str, height: u32, width: u32) -> Result<BinaryMask> {
    let counts = decode_counts(s).map_err(|e| MotsError::parse(0, e))?;
    BinaryMask::from_counts(height, width, &counts).map_err(|e| MotsError::parse(0, e.to_string()))
}
