//! Procedural scenes with exact ground truth, features and flows, plus
//! detector-style degradations.

mod perturb;
mod scene;

pub use perturb::{perturb, PerturbationModel};
pub use scene::{generate_sequence, Degradation, ObjectSpec, RandomSceneOptions, Scene, SceneSpec, Shape, SyntheticFrame};

use std::collections::BTreeMap;

use crate::error::{MotsError, Result};
use crate::geometry::{mask_to_bbox, BBox};
use crate::io::BoxTable;
use crate::metrics::FrameAnnotations;
use crate::pipeline::{Detection, SequenceSource, SourceFrame};

/// Named degradation levels accepted by the command line.
pub fn noise_preset(name: &str) -> Result<PerturbationModel> {
    let base = PerturbationModel::default();
    match name {
        "none" => Ok(base),
        "low" => Ok(PerturbationModel {
            box_jitter: 1.0,
            mask_radius: 0,
            miss_prob: 0.02,
            embedding_noise: 0.01,
            flow_noise: 0.25,
            ..base
        }),
        "medium" => Ok(PerturbationModel {
            box_jitter: 3.0,
            box_expand: 2.0,
            mask_radius: 1,
            miss_prob: 0.05,
            false_positive_rate: 0.1,
            embedding_noise: 0.03,
            flow_noise: 0.5,
        }),
        "high" => Ok(PerturbationModel {
            box_jitter: 6.0,
            box_expand: 4.0,
            mask_radius: 2,
            miss_prob: 0.1,
            false_positive_rate: 0.3,
            embedding_noise: 0.06,
            flow_noise: 1.0,
        }),
        other => Err(MotsError::Config(format!(
            "unknown noise preset {other:?} (expected none, low, medium or high)"
        ))),
    }
}

/// Streams a [`Scene`] through a [`PerturbationModel`].
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    scene: Scene,
    model: PerturbationModel,
    seed: u64,
    next: u32,
}

impl SyntheticSource {
    pub fn new(spec: SceneSpec, model: PerturbationModel, seed: u64) -> Result<Self> {
        model.validate()?;
        Ok(SyntheticSource {
            scene: Scene::new(spec)?,
            model,
            seed,
            next: 0,
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }
}

impl SequenceSource for SyntheticSource {
    fn next_frame(&mut self, history: usize) -> Option<Result<SourceFrame>> {
        let t = self.next;
        if t >= self.scene.spec().frames {
            return None;
        }
        self.next += 1;
        let build = || -> Result<SourceFrame> {
            let flows = (1..=history.min(t as usize))
                .map(|lag| self.scene.noisy_flow(t - lag as u32, t, self.model.flow_noise))
                .collect::<Result<Vec<_>>>()?;
            let gt = self.scene.annotations(t);
            let detections = perturb(&gt, &self.model, self.seed)?;
            Ok(SourceFrame {
                frame: t,
                features: self.scene.features(t),
                flows,
                detections,
                gt: Some(gt),
                identity_noise: self.model.embedding_noise,
            })
        };
        Some(build())
    }
}

/// Replays recorded detections against features and flows regenerated from
/// a scene, e.g. the files written by `mots synth`.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    scene: Scene,
    detections: BTreeMap<u32, FrameAnnotations>,
    boxes: BoxTable,
    gt: Option<BTreeMap<u32, FrameAnnotations>>,
    flow_noise: f64,
    identity_noise: f64,
    next: u32,
}

impl ReplaySource {
    /// Detection boxes come from `boxes` when present there and from the
    /// mask otherwise; frames without detections are processed as empty.
    pub fn new(
        spec: SceneSpec,
        detections: Vec<FrameAnnotations>,
        boxes: BoxTable,
        gt: Option<Vec<FrameAnnotations>>,
        runtime: &PerturbationModel,
    ) -> Result<Self> {
        runtime.validate()?;
        let scene = Scene::new(spec)?;
        let (w, h) = (scene.spec().width, scene.spec().height);
        let frames = scene.spec().frames;
        let index = |list: Vec<FrameAnnotations>, what: &str| -> Result<BTreeMap<u32, FrameAnnotations>> {
            let mut map = BTreeMap::new();
            for mut f in list {
                // id order, as live detections arrive, so results do not depend on line order
                f.objects.sort_by_key(|o| o.object_id);
                if f.frame >= frames {
                    return Err(MotsError::InvalidAnnotations {
                        frame: f.frame,
                        reason: format!("{what} frame beyond the scene's {frames} frames"),
                    });
                }
                if let Some(o) = f.objects.iter().find(|o| o.mask.width() != w || o.mask.height() != h) {
                    return Err(MotsError::InvalidAnnotations {
                        frame: f.frame,
                        reason: format!(
                            "{what} object {} is {}x{}, scene is {h}x{w}",
                            o.object_id,
                            o.mask.height(),
                            o.mask.width()
                        ),
                    });
                }
                map.insert(f.frame, f);
            }
            Ok(map)
        };
        Ok(ReplaySource {
            detections: index(detections, "detection")?,
            gt: gt.map(|g| index(g, "ground-truth")).transpose()?,
            scene,
            boxes,
            flow_noise: runtime.flow_noise,
            identity_noise: runtime.embedding_noise,
            next: 0,
        })
    }
}

impl SequenceSource for ReplaySource {
    fn next_frame(&mut self, history: usize) -> Option<Result<SourceFrame>> {
        let t = self.next;
        if t >= self.scene.spec().frames {
            return None;
        }
        self.next += 1;
        let build = || -> Result<SourceFrame> {
            let flows = (1..=history.min(t as usize))
                .map(|lag| self.scene.noisy_flow(t - lag as u32, t, self.flow_noise))
                .collect::<Result<Vec<_>>>()?;
            let (w, h) = (self.scene.spec().width as f64, self.scene.spec().height as f64);
            let detections = self
                .detections
                .get(&t)
                .map(|f| {
                    f.objects
                        .iter()
                        .map(|o| Detection {
                            class_id: o.class_id,
                            bbox: self
                                .boxes
                                .get(&(t, o.object_id))
                                .copied()
                                .or_else(|| mask_to_bbox(&o.mask).ok())
                                .unwrap_or(BBox { x1: 0.0, y1: 0.0, x2: w, y2: h }),
                            mask: o.mask.clone(),
                            source_id: None,
                        })
                        .collect()
                })
                .unwrap_or_default();
            let gt = self.gt.as_ref().map(|g| {
                g.get(&t).cloned().unwrap_or(FrameAnnotations { frame: t, objects: vec![] })
            });
            Ok(SourceFrame {
                frame: t,
                features: self.scene.features(t),
                flows,
                detections,
                gt,
                identity_noise: self.identity_noise,
            })
        };
        Some(build())
    }
}
