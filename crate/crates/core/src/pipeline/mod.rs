//! Per-frame online inference: flow-guided feature aggregation, detector and
//! mask box fusion, ROI identity embedding and track association.

mod cost;

pub use cost::{cost_ratio, CostModel};

use std::collections::VecDeque;
use std::time::Instant;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::association::{IdentityEmbedder, IdentityVector, TrackerParams, TrackerState};
use crate::error::{MotsError, Result};
use crate::fusion::{aggregate, EmbeddingProjector, FeatureGrid, FlowField, FusionConfig};
use crate::geometry::{blend_boxes, fuse_boxes, mask_to_bbox, roi_extract, BBox, BinaryMask, FusionParams};
use crate::io::encode_object_id;
use crate::metrics::{evaluate, AnnotatedObject, FrameAnnotations, MotsScores};

/// One detector output: class, detector box (px) and instance mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub class_id: u32,
    pub bbox: BBox,
    pub mask: BinaryMask,
    /// Ground-truth object this detection was derived from, when known.
    pub source_id: Option<u32>,
}

/// Which box feeds the tracking ROI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoxStrategy {
    /// Scale-adaptive weighting of detector and mask boxes.
    Adaptive,
    /// Constant weight `alpha` on the detector box.
    Fixed { alpha: f64 },
    /// Detector box only.
    Detection,
    /// Mask box only.
    Mask,
}

impl BoxStrategy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(BoxStrategy::Adaptive),
            "fixed" => Ok(BoxStrategy::Fixed { alpha: 0.5 }),
            "detection" => Ok(BoxStrategy::Detection),
            "mask" => Ok(BoxStrategy::Mask),
            other => match other.strip_prefix("fixed:").map(str::parse::<f64>) {
                Some(Ok(alpha)) if (0.0..=1.0).contains(&alpha) => Ok(BoxStrategy::Fixed { alpha }),
                _ => Err(MotsError::Config(format!("unknown box strategy {other:?}"))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            BoxStrategy::Adaptive => "adaptive".into(),
            BoxStrategy::Fixed { alpha } => format!("fixed:{alpha}"),
            BoxStrategy::Detection => "detection".into(),
            BoxStrategy::Mask => "mask".into(),
        }
    }

    pub fn weighted_box(&self, detection: &BBox, from_mask: &BBox, params: &FusionParams) -> BBox {
        match *self {
            BoxStrategy::Adaptive => fuse_boxes(detection, from_mask, params),
            BoxStrategy::Fixed { alpha } => blend_boxes(detection, from_mask, alpha),
            BoxStrategy::Detection => *detection,
            BoxStrategy::Mask => *from_mask,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub tracker: TrackerParams,
    pub fusion: FusionConfig,
    pub box_fusion: FusionParams,
    pub box_strategy: BoxStrategy,
    /// Side length of the ROI grid fed to the identity embedder.
    pub roi_size: usize,
    pub identity_seed: u64,
    /// Seed for identity-vector noise, when the source asks for it.
    pub noise_seed: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            tracker: TrackerParams::default(),
            fusion: FusionConfig::default(),
            box_fusion: FusionParams::default(),
            box_strategy: BoxStrategy::Adaptive,
            roi_size: 7,
            identity_seed: 0x1d_e4_71_7e,
            noise_seed: 0,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.tracker.validate()?;
        FusionParams::new(self.box_fusion.reference_area)?;
        if self.roi_size == 0 {
            return Err(MotsError::Config("roi_size must be at least 1".into()));
        }
        if self.fusion.embedding_dim == 0 {
            return Err(MotsError::Config("embedding_dim must be at least 1".into()));
        }
        if let BoxStrategy::Fixed { alpha } = self.box_strategy {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(MotsError::Config(format!("fixed alpha {alpha} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// A tracked object of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedObject {
    pub class_id: u32,
    /// Detector box as delivered.
    pub bbox: BBox,
    /// Box the tracking ROI was pooled from.
    pub weighted_box: BBox,
    pub mask: BinaryMask,
    pub track_id: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedDetection {
    /// Position in the frame's detection list.
    pub index: usize,
    pub reason: String,
}

/// Classes, boxes, masks and track ids recognized in one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameResult {
    pub frame: u32,
    pub objects: Vec<TrackedObject>,
    pub dropped: Vec<DroppedDetection>,
}

impl FrameResult {
    /// Annotations keyed by raw track id, for evaluation.
    pub fn to_annotations(&self) -> FrameAnnotations {
        FrameAnnotations {
            frame: self.frame,
            objects: self
                .objects
                .iter()
                .map(|o| AnnotatedObject {
                    object_id: o.track_id,
                    class_id: o.class_id,
                    mask: o.mask.clone(),
                })
                .collect(),
        }
    }

    /// Annotations with `class * 1000 + track` ids, for the text format.
    pub fn to_file_annotations(&self) -> Result<FrameAnnotations> {
        let objects = self
            .objects
            .iter()
            .map(|o| {
                Ok(AnnotatedObject {
                    object_id: encode_object_id(o.class_id, o.track_id)?,
                    class_id: o.class_id,
                    mask: o.mask.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FrameAnnotations {
            frame: self.frame,
            objects,
        })
    }
}

/// Stateless-per-frame components: similarity projector and identity embedder.
#[derive(Debug, Clone)]
pub struct FrameEngine {
    params: PipelineParams,
    projector: Option<EmbeddingProjector>,
    embedder: Option<IdentityEmbedder>,
}

impl FrameEngine {
    pub fn new(params: PipelineParams) -> Result<Self> {
        params.validate()?;
        Ok(FrameEngine {
            params,
            projector: None,
            embedder: None,
        })
    }

    pub fn params(&self) -> &PipelineParams {
        &self.params
    }

    fn projector(&mut self, channels: usize) -> Result<&EmbeddingProjector> {
        if self.projector.as_ref().map(|p| p.in_dim()) != Some(channels) {
            self.projector = Some(EmbeddingProjector::seeded(
                channels,
                self.params.fusion.embedding_dim,
                self.params.fusion.projector_seed,
            )?);
        }
        Ok(self.projector.as_ref().expect("set above"))
    }

    fn embedder(&mut self, input_dim: usize) -> Result<&IdentityEmbedder> {
        if self.embedder.as_ref().map(|e| e.input_dim()) != Some(input_dim) {
            self.embedder = Some(IdentityEmbedder::new(input_dim, self.params.identity_seed)?);
        }
        Ok(self.embedder.as_ref().expect("set above"))
    }
}

/// Runs one frame of online inference.
///
/// `context[i]` is the raw feature grid of the `i`-th most recent previous
/// frame together with the flow warping it onto `current`. Detections that
/// cannot be embedded are dropped and reported in [`FrameResult::dropped`].
#[allow(clippy::too_many_arguments)]
pub fn process_frame(
    engine: &mut FrameEngine,
    tracker: &mut TrackerState,
    frame: u32,
    context: &[(&FeatureGrid, &FlowField)],
    current: &FeatureGrid,
    detections: &[Detection],
    identity_noise: f64,
) -> Result<FrameResult> {
    let params = engine.params;
    let fused = {
        let proj = engine.projector(current.channels())?;
        aggregate(current, context, proj, params.fusion.include_current_in_normalization)?
    };
    let roi_dim = current.channels() * params.roi_size * params.roi_size;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(
        params
            .noise_seed
            .wrapping_mul(0xA076_1D64_78BD_642F)
            .wrapping_add(frame as u64),
    );

    let mut kept: Vec<(usize, BBox, IdentityVector)> = Vec::with_capacity(detections.len());
    let mut dropped = Vec::new();
    for (index, det) in detections.iter().enumerate() {
        let outcome = (|| -> Result<(BBox, IdentityVector)> {
            let mask_box = mask_to_bbox(&det.mask)?;
            let weighted = params
                .box_strategy
                .weighted_box(&det.bbox, &mask_box, &params.box_fusion);
            let sx = current.width() as f64 / det.mask.width() as f64;
            let sy = current.height() as f64 / det.mask.height() as f64;
            let roi_box = BBox {
                x1: weighted.x1 * sx,
                y1: weighted.y1 * sy,
                x2: weighted.x2 * sx,
                y2: weighted.y2 * sy,
            };
            let roi = roi_extract(&fused, &roi_box, params.roi_size)?;
            let vector = engine.embedder(roi_dim)?.embed(&roi)?;
            Ok((weighted, vector))
        })();
        match outcome {
            Ok((weighted, vector)) => {
                let vector = vector.perturbed(identity_noise, &mut noise_rng);
                kept.push((index, weighted, vector));
            }
            Err(e) => {
                warn!("frame {frame}: dropping detection {index}: {e}");
                dropped.push(DroppedDetection {
                    index,
                    reason: e.to_string(),
                });
            }
        }
    }

    let inputs: Vec<(IdentityVector, u32)> = kept
        .iter()
        .map(|(i, _, v)| (v.clone(), detections[*i].class_id))
        .collect();
    let ids = tracker.step(&inputs, frame)?;
    let objects = kept
        .into_iter()
        .zip(ids)
        .map(|((i, weighted_box, _), track_id)| TrackedObject {
            class_id: detections[i].class_id,
            bbox: detections[i].bbox,
            weighted_box,
            mask: detections[i].mask.clone(),
            track_id,
        })
        .collect();
    Ok(FrameResult {
        frame,
        objects,
        dropped,
    })
}

/// One frame delivered by a [`SequenceSource`].
#[derive(Debug, Clone)]
pub struct SourceFrame {
    pub frame: u32,
    pub features: FeatureGrid,
    /// `flows[i]` warps the `i`-th most recently delivered frame onto this one.
    pub flows: Vec<FlowField>,
    pub detections: Vec<Detection>,
    pub gt: Option<FrameAnnotations>,
    /// Standard deviation of noise added to identity vectors.
    pub identity_noise: f64,
}

/// Supplies frames in order to [`run_sequence`].
pub trait SequenceSource {
    /// Next frame with flows to at most `history` previously delivered frames.
    fn next_frame(&mut self, history: usize) -> Option<Result<SourceFrame>>;
}

/// Online pipeline state: tracker plus the rolling window of raw features.
#[derive(Debug, Clone)]
pub struct Pipeline {
    engine: FrameEngine,
    tracker: TrackerState,
    window: VecDeque<FeatureGrid>,
    last_frame: Option<u32>,
}

impl Pipeline {
    pub fn new(params: PipelineParams) -> Result<Self> {
        Ok(Pipeline {
            engine: FrameEngine::new(params)?,
            tracker: TrackerState::new(params.tracker)?,
            window: VecDeque::with_capacity(params.fusion.temporal_range + 1),
            last_frame: None,
        })
    }

    pub fn params(&self) -> &PipelineParams {
        self.engine.params()
    }

    pub fn tracker(&self) -> &TrackerState {
        &self.tracker
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn temporal_range(&self) -> usize {
        self.engine.params.fusion.temporal_range
    }

    pub fn process(&mut self, input: &SourceFrame) -> Result<FrameResult> {
        if let Some(last) = self.last_frame {
            if input.frame <= last {
                return Err(MotsError::FrameOrder {
                    frame: input.frame,
                    last,
                });
            }
        }
        let n = self.temporal_range();
        let context: Vec<(&FeatureGrid, &FlowField)> = self
            .window
            .iter()
            .zip(&input.flows)
            .take(n)
            .collect();
        let result = process_frame(
            &mut self.engine,
            &mut self.tracker,
            input.frame,
            &context,
            &input.features,
            &input.detections,
            input.identity_noise,
        )?;
        self.last_frame = Some(input.frame);
        if n > 0 {
            self.window.push_front(input.features.clone());
            self.window.truncate(n);
        }
        Ok(result)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunTimings {
    pub frames: usize,
    pub total_ms: f64,
    pub mean_frame_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub results: Vec<FrameResult>,
    /// Present when the source supplied ground truth with at least one mask.
    pub scores: Option<MotsScores>,
    pub timings: RunTimings,
}

/// Processes every frame of `source` in a single online pass.
pub fn run_sequence(source: &mut dyn SequenceSource, params: PipelineParams) -> Result<RunOutput> {
    let mut pipeline = Pipeline::new(params)?;
    let start = Instant::now();
    let mut results = Vec::new();
    let mut gt_frames = Vec::new();
    while let Some(frame) = source.next_frame(pipeline.temporal_range()) {
        let frame = frame?;
        results.push(pipeline.process(&frame)?);
        if let Some(gt) = frame.gt {
            gt_frames.push(gt);
        }
    }
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    let scores = if gt_frames.is_empty() {
        None
    } else {
        let preds: Vec<FrameAnnotations> = results.iter().map(FrameResult::to_annotations).collect();
        match evaluate(&gt_frames, &preds) {
            Ok(s) => Some(s),
            Err(MotsError::UndefinedScores) => None,
            Err(e) => return Err(e),
        }
    };
    Ok(RunOutput {
        timings: RunTimings {
            frames: results.len(),
            total_ms,
            mean_frame_ms: if results.is_empty() { 0.0 } else { total_ms / results.len() as f64 },
        },
        results,
        scores,
    })
}
