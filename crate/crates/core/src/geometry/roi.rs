use crate::error::{MotsError, Result};
use crate::fusion::FeatureGrid;
use crate::geometry::BBox;

/// Bilinear crop-and-resize of `bbox` (feature-grid coordinates) to `size x size`.
///
/// Samples sit at the centres of the `size x size` sub-cells of the box; grid
/// cell `i` covers `[i, i + 1)` so its value lives at `i + 0.5`. Samples
/// outside the grid read as zero.
pub fn roi_extract(grid: &FeatureGrid, bbox: &BBox, size: usize) -> Result<FeatureGrid> {
    if size == 0 {
        return Err(MotsError::shape("ROI output size must be at least 1"));
    }
    if !(bbox.width() > 0.0 && bbox.height() > 0.0) {
        return Err(MotsError::DegenerateBox {
            x1: bbox.x1,
            y1: bbox.y1,
            x2: bbox.x2,
            y2: bbox.y2,
        });
    }
    let (channels, height, width) = grid.shape();
    if bbox.x2 <= 0.0 || bbox.y2 <= 0.0 || bbox.x1 >= width as f64 || bbox.y1 >= height as f64 {
        return Err(MotsError::shape(format!(
            "box ({}, {}, {}, {}) lies outside the {height}x{width} grid",
            bbox.x1, bbox.y1, bbox.x2, bbox.y2
        )));
    }
    let step_x = bbox.width() / size as f64;
    let step_y = bbox.height() / size as f64;
    let mut out = FeatureGrid::zeros(channels, size, size);
    for i in 0..size {
        let sy = bbox.y1 + (i as f64 + 0.5) * step_y - 0.5;
        for j in 0..size {
            let sx = bbox.x1 + (j as f64 + 0.5) * step_x - 0.5;
            for c in 0..channels {
                out.set(c, i, j, grid.sample(c, sy, sx));
            }
        }
    }
    Ok(out)
}
