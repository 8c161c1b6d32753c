use serde::{Deserialize, Serialize};

use crate::error::{MotsError, Result};

/// Axis-aligned box in continuous pixel coordinates, half-open `[x1, x2) x [y1, y2)`.
///
/// `x` runs along columns and `y` along rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    /// Builds a box, rejecting inverted or non-finite corners.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let b = BBox { x1, y1, x2, y2 };
        if ![x1, y1, x2, y2].iter().all(|v| v.is_finite()) || x1 > x2 || y1 > y2 {
            return Err(MotsError::shape(format!(
                "invalid box ({x1}, {y1}, {x2}, {y2})"
            )));
        }
        Ok(b)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        BBox {
            x1: c[0],
            y1: c[1],
            x2: c[2],
            y2: c[3],
        }
    }

    /// Multiplies every coordinate by `s` (pixel to feature-grid conversion).
    pub fn scaled(&self, s: f64) -> Self {
        BBox {
            x1: self.x1 * s,
            y1: self.y1 * s,
            x2: self.x2 * s,
            y2: self.y2 * s,
        }
    }

    pub fn intersection(&self, other: &BBox) -> f64 {
        let w = (self.x2.min(other.x2) - self.x1.max(other.x1)).max(0.0);
        let h = (self.y2.min(other.y2) - self.y1.max(other.y1)).max(0.0);
        w * h
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x1 && x < self.x2 && y >= self.y1 && y < self.y2
    }
}

/// Intersection over union of two boxes; 0 when the union is empty.
pub fn bbox_iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Parameters of the scale-adaptive box fusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionParams {
    /// Area in px² at which detector and mask boxes are weighted equally.
    pub reference_area: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams {
            reference_area: 1024.0,
        }
    }
}

impl FusionParams {
    pub fn new(reference_area: f64) -> Result<Self> {
        if !(reference_area.is_finite() && reference_area > 0.0) {
            return Err(MotsError::Config(format!(
                "reference_area must be positive, got {reference_area}"
            )));
        }
        Ok(FusionParams { reference_area })
    }

    /// Weight of the detector box; the mask box receives `1 - alpha`.
    ///
    /// Shrinks like `1 / area` for large boxes and tends to 1 for tiny ones.
    pub fn detection_weight(&self, detection: &BBox) -> f64 {
        self.reference_area / (self.reference_area + detection.area())
    }
}

/// Convex combination `alpha * a + (1 - alpha) * b`, coordinate-wise.
pub fn blend_boxes(a: &BBox, b: &BBox, alpha: f64) -> BBox {
    let beta = 1.0 - alpha;
    let mix = |p: f64, q: f64| {
        let v = alpha * p + beta * q;
        // keep the result inside the input envelope despite rounding
        v.clamp(p.min(q), p.max(q))
    };
    BBox {
        x1: mix(a.x1, b.x1),
        y1: mix(a.y1, b.y1),
        x2: mix(a.x2, b.x2),
        y2: mix(a.y2, b.y2),
    }
}

/// Weighted box from the detector box `detection` and the mask box `from_mask`.
pub fn fuse_boxes(detection: &BBox, from_mask: &BBox, params: &FusionParams) -> BBox {
    blend_boxes(detection, from_mask, params.detection_weight(detection))
}
