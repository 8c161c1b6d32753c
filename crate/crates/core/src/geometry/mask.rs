use crate::error::{MotsError, Result};
use crate::geometry::BBox;

/// Binary instance mask stored as column-major run lengths.
///
/// `counts[0]` is the number of leading background pixels (possibly 0); runs
/// then alternate foreground/background. Runs after the first are never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: u32,
    width: u32,
    counts: Vec<u32>,
}

impl BinaryMask {
    /// Builds a mask from run counts, merging empty interior runs.
    pub fn from_counts(height: u32, width: u32, counts: &[u32]) -> Result<Self> {
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        if total != height as u64 * width as u64 {
            return Err(MotsError::shape(format!(
                "run counts sum to {total}, expected {height}x{width}"
            )));
        }
        Ok(BinaryMask {
            height,
            width,
            counts: normalize_runs(counts),
        })
    }

    pub fn empty(height: u32, width: u32) -> Self {
        let n = height * width;
        BinaryMask {
            height,
            width,
            counts: vec![n],
        }
    }

    pub fn full(height: u32, width: u32) -> Self {
        BinaryMask {
            height,
            width,
            counts: vec![0, height * width],
        }
    }

    /// Rasterizes `f(row, col)` over the grid.
    pub fn from_fn(height: u32, width: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut counts = Vec::new();
        let mut current = false;
        let mut run = 0u32;
        for col in 0..width {
            for row in 0..height {
                let v = f(row, col);
                if v != current {
                    counts.push(run);
                    run = 0;
                    current = v;
                }
                run += 1;
            }
        }
        counts.push(run);
        BinaryMask {
            height,
            width,
            counts: normalize_runs(&counts),
        }
    }

    /// Builds a mask from a row-major raster (`row * width + col`).
    pub fn from_row_major(height: u32, width: u32, pixels: &[bool]) -> Result<Self> {
        if pixels.len() != (height as usize) * (width as usize) {
            return Err(MotsError::shape(format!(
                "raster has {} pixels, expected {height}x{width}",
                pixels.len()
            )));
        }
        Ok(Self::from_fn(height, width, |r, c| {
            pixels[r as usize * width as usize + c as usize]
        }))
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Dense row-major raster.
    pub fn to_row_major(&self) -> Vec<bool> {
        let (h, w) = (self.height as usize, self.width as usize);
        let mut out = vec![false; h * w];
        self.for_each_foreground(|r, c| out[r as usize * w + c as usize] = true);
        out
    }

    pub fn get(&self, row: u32, col: u32) -> bool {
        let idx = col as u64 * self.height as u64 + row as u64;
        let mut start = 0u64;
        for (i, &c) in self.counts.iter().enumerate() {
            let end = start + c as u64;
            if idx < end {
                return i % 2 == 1;
            }
            start = end;
        }
        false
    }

    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    fn for_each_foreground(&self, mut f: impl FnMut(u32, u32)) {
        let h = self.height as u64;
        let mut pos = 0u64;
        for (i, &c) in self.counts.iter().enumerate() {
            if i % 2 == 1 {
                for idx in pos..pos + c as u64 {
                    f((idx % h) as u32, (idx / h) as u32);
                }
            }
            pos += c as u64;
        }
    }

    /// Foreground pixels as `(row, col)`, column-major order.
    pub fn foreground(&self) -> Vec<(u32, u32)> {
        let mut v = Vec::with_capacity(self.area() as usize);
        self.for_each_foreground(|r, c| v.push((r, c)));
        v
    }

    fn check_same_shape(&self, other: &BinaryMask) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(MotsError::shape(format!(
                "mask {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    /// Number of pixels set in both masks.
    pub fn intersection_area(&self, other: &BinaryMask) -> Result<u64> {
        self.check_same_shape(other)?;
        Ok(merge_runs(&self.counts, &other.counts, |a, b| a && b)
            .iter()
            .skip(1)
            .step_by(2)
            .map(|&c| c as u64)
            .sum())
    }

    fn combine(&self, other: &BinaryMask, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(BinaryMask {
            height: self.height,
            width: self.width,
            counts: merge_runs(&self.counts, &other.counts, op),
        })
    }

    pub fn union(&self, other: &BinaryMask) -> Result<Self> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &BinaryMask) -> Result<Self> {
        self.combine(other, |a, b| a && b)
    }

    /// Pixels of `self` not in `other`.
    pub fn subtract(&self, other: &BinaryMask) -> Result<Self> {
        self.combine(other, |a, b| a && !b)
    }

    /// Erosion (`radius > 0`) or dilation (`radius < 0`) with a square
    /// structuring element of half-width `|radius|`. Pixels outside the grid
    /// count as background.
    pub fn morph(&self, radius: i32) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let (h, w) = (self.height as i64, self.width as i64);
        let dense = self.to_row_major();
        let at = |r: i64, c: i64| -> bool {
            r >= 0 && c >= 0 && r < h && c < w && dense[(r * w + c) as usize]
        };
        let k = radius.unsigned_abs() as i64;
        let erode = radius > 0;
        Self::from_fn(self.height, self.width, |r, c| {
            let (r, c) = (r as i64, c as i64);
            let mut window = (r - k..=r + k).flat_map(|rr| (c - k..=c + k).map(move |cc| (rr, cc)));
            if erode {
                window.all(|(rr, cc)| at(rr, cc))
            } else {
                window.any(|(rr, cc)| at(rr, cc))
            }
        })
    }

    /// Shifts the mask by whole pixels; pixels moved off the grid are lost.
    pub fn translate(&self, drow: i64, dcol: i64) -> Self {
        let (h, w) = (self.height as i64, self.width as i64);
        let dense = self.to_row_major();
        Self::from_fn(self.height, self.width, |r, c| {
            let (sr, sc) = (r as i64 - drow, c as i64 - dcol);
            sr >= 0 && sc >= 0 && sr < h && sc < w && dense[(sr * w + sc) as usize]
        })
    }
}

fn normalize_runs(counts: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(counts.len().max(1));
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let fg = i % 2 == 1;
        match out.len() {
            0 if fg => out.extend([0, c]),
            0 => out.push(c),
            n if ((n - 1) % 2 == 1) == fg => *out.last_mut().unwrap() += c,
            _ => out.push(c),
        }
    }
    if out.is_empty() {
        out.push(0);
    }
    out
}

/// Two-pointer walk over two run-length streams covering the same pixel count.
fn merge_runs(a: &[u32], b: &[u32], op: impl Fn(bool, bool) -> bool) -> Vec<u32> {
    let mut out: Vec<u32> = vec![0];
    let mut current = false;
    let (mut ia, mut ib) = (0usize, 0usize);
    let (mut ra, mut rb) = (a.first().copied().unwrap_or(0), b.first().copied().unwrap_or(0));
    loop {
        while ra == 0 && ia < a.len() {
            ia += 1;
            ra = a.get(ia).copied().unwrap_or(0);
        }
        while rb == 0 && ib < b.len() {
            ib += 1;
            rb = b.get(ib).copied().unwrap_or(0);
        }
        if ia >= a.len() || ib >= b.len() {
            break;
        }
        let step = ra.min(rb);
        let v = op(ia % 2 == 1, ib % 2 == 1);
        if v != current {
            out.push(0);
            current = v;
        }
        *out.last_mut().unwrap() += step;
        ra -= step;
        rb -= step;
    }
    out
}

/// Tightest half-open box around the foreground.
pub fn mask_to_bbox(mask: &BinaryMask) -> Result<BBox> {
    let h = mask.height as u64;
    let (mut rmin, mut rmax, mut cmin, mut cmax) = (u64::MAX, 0u64, u64::MAX, 0u64);
    let mut pos = 0u64;
    let mut any = false;
    for (i, &c) in mask.counts.iter().enumerate() {
        if i % 2 == 1 && c > 0 {
            any = true;
            let (first, last) = (pos, pos + c as u64 - 1);
            let (c0, c1) = (first / h, last / h);
            cmin = cmin.min(c0);
            cmax = cmax.max(c1);
            if c0 != c1 {
                rmin = 0;
                rmax = h - 1;
            } else {
                rmin = rmin.min(first % h);
                rmax = rmax.max(last % h);
            }
        }
        pos += c as u64;
    }
    if !any {
        return Err(MotsError::EmptyMask);
    }
    Ok(BBox {
        x1: cmin as f64,
        y1: rmin as f64,
        x2: (cmax + 1) as f64,
        y2: (rmax + 1) as f64,
    })
}

/// Intersection over union of two masks; 0 when both are empty.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let inter = a.intersection_area(b)?;
    let union = a.area() + b.area() - inter;
    if union == 0 {
        return Ok(0.0);
    }
    Ok(inter as f64 / union as f64)
}
