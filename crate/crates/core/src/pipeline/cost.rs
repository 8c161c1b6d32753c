use serde::{Deserialize, Serialize};

use crate::error::{MotsError, Result};

/// Per-module runtime costs (arbitrary but consistent units) and fusion lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Backbone feature extractor.
    pub backbone: f64,
    /// Flow estimation plus warping and embedding, per fused frame.
    pub flow: f64,
    pub classification: f64,
    pub box_regression: f64,
    pub mask: f64,
    pub tracking: f64,
    /// 3D-convolution fusion of the baseline, per fused frame.
    pub conv3d: f64,
    /// Frames fused by flow warping.
    pub temporal_range: u32,
    /// Frames fused by the 3D-convolution baseline.
    pub baseline_range: u32,
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        let costs = [
            ("backbone", self.backbone),
            ("flow", self.flow),
            ("classification", self.classification),
            ("box_regression", self.box_regression),
            ("mask", self.mask),
            ("tracking", self.tracking),
            ("conv3d", self.conv3d),
        ];
        for (name, v) in costs {
            if !(v.is_finite() && v > 0.0) {
                return Err(MotsError::Config(format!("cost {name} must be positive, got {v}")));
            }
        }
        if self.temporal_range == 0 || self.baseline_range == 0 {
            return Err(MotsError::Config("temporal ranges must be at least 1".into()));
        }
        Ok(())
    }

    fn heads(&self) -> f64 {
        self.classification + self.box_regression + self.mask + self.tracking
    }

    /// Full per-frame cost of the flow-guided pipeline.
    pub fn flow_guided_cost(&self) -> f64 {
        self.backbone + self.temporal_range as f64 * self.flow + self.heads()
    }

    /// Full per-frame cost of the 3D-convolution baseline.
    pub fn baseline_cost(&self) -> f64 {
        self.backbone + self.baseline_range as f64 * self.conv3d + self.heads()
    }

    /// Exact ratio of the two full costs, heads included.
    pub fn exact_ratio(&self) -> f64 {
        self.flow_guided_cost() / self.baseline_cost()
    }
}

/// Runtime ratio of flow-guided fusion to 3D-convolution fusion with the
/// task heads neglected against the backbone:
/// `(backbone + n * flow) / (backbone + m * conv3d)`.
pub fn cost_ratio(model: &CostModel) -> Result<f64> {
    model.validate()?;
    Ok((model.backbone + model.temporal_range as f64 * model.flow)
        / (model.backbone + model.baseline_range as f64 * model.conv3d))
}
