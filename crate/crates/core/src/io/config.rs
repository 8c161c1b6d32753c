//! `key = value` run configuration. Blank lines and `#` comments are
//! ignored; unknown keys are rejected so typos do not pass silently.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{MotsError, Result};
use crate::pipeline::{BoxStrategy, CostModel, PipelineParams};
use crate::synth::PerturbationModel;

/// Everything a `track` or `cost` run reads from its config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineParams,
    /// Triplet margin of the tracking objective.
    pub margin: f64,
    /// Degradations applied at run time (identity noise, flow noise).
    pub perturbation: PerturbationModel,
    /// Scene description regenerating features and flows.
    pub scene: Option<PathBuf>,
    /// Detector boxes sidecar; mask boxes are used when absent.
    pub boxes: Option<PathBuf>,
    /// Where per-frame tracking results are written.
    pub output: Option<PathBuf>,
    pub cost: CostModel,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            backbone: 100.0,
            flow: 5.0,
            classification: 1.0,
            box_regression: 1.0,
            mask: 1.0,
            tracking: 1.0,
            conv3d: 20.0,
            temporal_range: 8,
            baseline_range: 8,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pipeline: PipelineParams::default(),
            margin: 0.2,
            perturbation: PerturbationModel::default(),
            scene: None,
            boxes: None,
            output: None,
            cost: CostModel::default(),
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| MotsError::parse(line, format!("invalid value {raw:?} for {key}")))
}

fn boolean(key: &str, raw: &str, line: usize) -> Result<bool> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(MotsError::parse(line, format!("invalid boolean {raw:?} for {key}"))),
    }
}

impl RunConfig {
    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut temporal_range_set = false;
        let path = |raw: &str| {
            let p = PathBuf::from(raw);
            match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        };
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, raw) = content
                .split_once('=')
                .ok_or_else(|| MotsError::parse(line, "expected key = value"))?;
            let (key, raw) = (key.trim(), raw.trim().trim_matches('"'));
            let p = &mut cfg.pipeline;
            let m = &mut cfg.perturbation;
            let c = &mut cfg.cost;
            match key {
                "temporal_range" => {
                    p.fusion.temporal_range = value(key, raw, line)?;
                    temporal_range_set = true;
                }
                "embedding_dim" => p.fusion.embedding_dim = value(key, raw, line)?,
                "projector_seed" => p.fusion.projector_seed = value(key, raw, line)?,
                "include_current" => p.fusion.include_current_in_normalization = boolean(key, raw, line)?,
                "reference_area" => p.box_fusion.reference_area = value(key, raw, line)?,
                "box_strategy" => {
                    p.box_strategy =
                        BoxStrategy::parse(raw).map_err(|e| MotsError::parse(line, e.to_string()))?
                }
                "similarity_threshold" => p.tracker.similarity_threshold = value(key, raw, line)?,
                "max_age" => p.tracker.max_age = value(key, raw, line)?,
                "roi_size" => p.roi_size = value(key, raw, line)?,
                "identity_seed" => p.identity_seed = value(key, raw, line)?,
                "noise_seed" => p.noise_seed = value(key, raw, line)?,
                "margin" => cfg.margin = value(key, raw, line)?,
                "box_jitter" => m.box_jitter = value(key, raw, line)?,
                "box_expand" => m.box_expand = value(key, raw, line)?,
                "mask_radius" => m.mask_radius = value(key, raw, line)?,
                "miss_prob" => m.miss_prob = value(key, raw, line)?,
                "false_positive_rate" => m.false_positive_rate = value(key, raw, line)?,
                "embedding_noise" => m.embedding_noise = value(key, raw, line)?,
                "flow_noise" => m.flow_noise = value(key, raw, line)?,
                "scene" => cfg.scene = Some(path(raw)),
                "boxes" => cfg.boxes = Some(path(raw)),
                "output" => cfg.output = Some(path(raw)),
                "cost_backbone" => c.backbone = value(key, raw, line)?,
                "cost_flow" => c.flow = value(key, raw, line)?,
                "cost_classification" => c.classification = value(key, raw, line)?,
                "cost_box_regression" => c.box_regression = value(key, raw, line)?,
                "cost_mask" => c.mask = value(key, raw, line)?,
                "cost_tracking" => c.tracking = value(key, raw, line)?,
                "cost_conv3d" => c.conv3d = value(key, raw, line)?,
                "baseline_range" => c.baseline_range = value(key, raw, line)?,
                _ => return Err(MotsError::parse(line, format!("unknown key {key:?}"))),
            }
        }
        if temporal_range_set {
            cfg.cost.temporal_range = cfg.pipeline.fusion.temporal_range as u32;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| MotsError::io(path, e))?;
        RunConfig::parse_str(&text, path.parent()).map_err(|e| match e {
            MotsError::Parse { line, reason } => MotsError::Parse {
                line,
                reason: format!("{}: {reason}", path.display()),
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        self.perturbation.validate()?;
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return Err(MotsError::Config(format!("margin must be >= 0, got {}", self.margin)));
        }
        Ok(())
    }

    /// Serializes every key; `parse_str` of the output reproduces `self`.
    pub fn to_config_string(&self) -> String {
        let p = &self.pipeline;
        let m = &self.perturbation;
        let c = &self.cost;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("temporal_range", p.fusion.temporal_range.to_string());
        kv("embedding_dim", p.fusion.embedding_dim.to_string());
        kv("projector_seed", p.fusion.projector_seed.to_string());
        kv("include_current", p.fusion.include_current_in_normalization.to_string());
        kv("reference_area", p.box_fusion.reference_area.to_string());
        kv("box_strategy", p.box_strategy.name());
        kv("similarity_threshold", p.tracker.similarity_threshold.to_string());
        kv("max_age", p.tracker.max_age.to_string());
        kv("roi_size", p.roi_size.to_string());
        kv("identity_seed", p.identity_seed.to_string());
        kv("noise_seed", p.noise_seed.to_string());
        kv("margin", self.margin.to_string());
        kv("box_jitter", m.box_jitter.to_string());
        kv("box_expand", m.box_expand.to_string());
        kv("mask_radius", m.mask_radius.to_string());
        kv("miss_prob", m.miss_prob.to_string());
        kv("false_positive_rate", m.false_positive_rate.to_string());
        kv("embedding_noise", m.embedding_noise.to_string());
        kv("flow_noise", m.flow_noise.to_string());
        for (k, v) in [("scene", &self.scene), ("boxes", &self.boxes), ("output", &self.output)] {
            if let Some(v) = v {
                kv(k, v.display().to_string());
            }
        }
        kv("cost_backbone", c.backbone.to_string());
        kv("cost_flow", c.flow.to_string());
        kv("cost_classification", c.classification.to_string());
        kv("cost_box_regression", c.box_regression.to_string());
        kv("cost_mask", c.mask.to_string());
        kv("cost_tracking", c.tracking.to_string());
        kv("cost_conv3d", c.conv3d.to_string());
        kv("baseline_range", c.baseline_range.to_string());
        out
    }
}
