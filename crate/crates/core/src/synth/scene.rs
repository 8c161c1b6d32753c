use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{MotsError, Result};
use crate::fusion::{downsample_flow, FeatureGrid, FlowField};
use crate::geometry::BinaryMask;
use crate::io::encode_object_id;
use crate::metrics::{AnnotatedObject, FrameAnnotations};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Rectangle,
    Ellipse,
}

/// One moving object: top-left corner at frame 0, size in px, velocity in px/frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub class_id: u32,
    pub shape: Shape,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub vx: f64,
    pub vy: f64,
}

impl ObjectSpec {
    fn origin(&self, frame: u32) -> (f64, f64) {
        (self.x + self.vx * frame as f64, self.y + self.vy * frame as f64)
    }

    /// Whether the point `(px, py)` lies inside the object at `frame`.
    fn contains(&self, frame: u32, px: f64, py: f64) -> bool {
        let (ox, oy) = self.origin(frame);
        match self.shape {
            Shape::Rectangle => {
                px >= ox && px < ox + self.width && py >= oy && py < oy + self.height
            }
            Shape::Ellipse => {
                let (a, b) = (0.5 * self.width, 0.5 * self.height);
                let u = (px - ox - a) / a;
                let v = (py - oy - b) / b;
                u * u + v * v < 1.0
            }
        }
    }
}

/// Full description of a synthetic sequence; everything is derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub frames: u32,
    /// Pixels per feature cell along each axis.
    pub feature_stride: u32,
    pub channels: usize,
    pub objects: Vec<ObjectSpec>,
    pub seed: u64,
    /// Standard deviation of i.i.d. Gaussian noise added to every feature value.
    pub feature_noise: f64,
    /// Period in px of the per-object sinusoidal texture; 0 disables it.
    pub texture_period: f64,
    #[serde(default)]
    pub degradation: Degradation,
}

/// Episodes in which an object's appearance is washed out, imitating blur,
/// defocus or partial occlusion. Masks and motion are unaffected.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Degradation {
    /// Probability per object and frame that an episode starts.
    pub rate: f64,
    /// Length of each episode in frames.
    pub frames: u32,
    /// Fraction of the appearance signal removed during an episode.
    pub strength: f64,
}

impl Degradation {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) || !(0.0..=1.0).contains(&self.strength) {
            return Err(MotsError::Spec(format!(
                "degradation rate {} and strength {} must lie in [0, 1]",
                self.rate, self.strength
            )));
        }
        Ok(())
    }
}

/// Ranges used by [`SceneSpec::random`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSceneOptions {
    pub width: u32,
    pub height: u32,
    pub feature_stride: u32,
    pub channels: usize,
    pub min_size: f64,
    pub max_size: f64,
    pub max_speed: f64,
    /// Whole-pixel velocities keep frame-to-frame warps exact.
    pub integer_velocity: bool,
    /// When false, object bodies never touch during the sequence.
    pub allow_overlap: bool,
    pub feature_noise: f64,
    pub texture_period: f64,
    pub degradation: Degradation,
}

impl Default for RandomSceneOptions {
    fn default() -> Self {
        RandomSceneOptions {
            width: 160,
            height: 120,
            feature_stride: 2,
            channels: 8,
            min_size: 36.0,
            max_size: 56.0,
            max_speed: 2.0,
            integer_velocity: true,
            allow_overlap: false,
            feature_noise: 0.0,
            texture_period: 16.0,
            degradation: Degradation::default(),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(MotsError::Spec(m));
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return err("canvas size and frame count must be positive".into());
        }
        let s = self.feature_stride;
        if s == 0 || !self.width.is_multiple_of(s) || !self.height.is_multiple_of(s) {
            return err(format!(
                "feature stride {s} must divide the {}x{} canvas",
                self.width, self.height
            ));
        }
        if self.objects.len() > self.channels {
            return err(format!(
                "{} objects need at least as many feature channels, have {}",
                self.objects.len(),
                self.channels
            ));
        }
        if self.objects.len() >= 1000 {
            return err("at most 999 objects per scene".into());
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite())
            || !(self.texture_period >= 0.0 && self.texture_period.is_finite())
        {
            return err("noise and texture period must be finite and non-negative".into());
        }
        self.degradation.validate()?;
        for (k, o) in self.objects.iter().enumerate() {
            if !(o.class_id == 1 || o.class_id == 2) {
                return err(format!("object {k} has unknown class {}", o.class_id));
            }
            if ![o.x, o.y, o.width, o.height, o.vx, o.vy].iter().all(|v| v.is_finite()) {
                return err(format!("object {k} has non-finite geometry"));
            }
            if o.width <= 0.0 || o.height <= 0.0 {
                return err(format!("object {k} has non-positive size"));
            }
            if o.x < 0.0
                || o.y < 0.0
                || o.x + o.width > self.width as f64
                || o.y + o.height > self.height as f64
            {
                return err(format!("object {k} does not fit the canvas at frame 0"));
            }
        }
        Ok(())
    }

    /// Draws a scene from `seed` by rejection sampling within `opts`.
    pub fn random(seed: u64, frames: u32, objects: usize, opts: &RandomSceneOptions) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut placed: Vec<ObjectSpec> = Vec::with_capacity(objects);
        let mut attempts = 0usize;
        while placed.len() < objects {
            attempts += 1;
            if attempts > 20_000 {
                return Err(MotsError::Spec(format!(
                    "could not place {objects} objects on a {}x{} canvas",
                    opts.width, opts.height
                )));
            }
            let w = rng.random_range(opts.min_size..=opts.max_size).round();
            let h = rng.random_range(opts.min_size..=opts.max_size).round();
            if w > opts.width as f64 || h > opts.height as f64 {
                continue;
            }
            let x = rng.random_range(0.0..=(opts.width as f64 - w)).round();
            let y = rng.random_range(0.0..=(opts.height as f64 - h)).round();
            let mut speed = || {
                let v = rng.random_range(-opts.max_speed..=opts.max_speed);
                if opts.integer_velocity {
                    v.round()
                } else {
                    v
                }
            };
            let (vx, vy) = (speed(), speed());
            let candidate = ObjectSpec {
                class_id: if rng.random_bool(0.5) { 1 } else { 2 },
                shape: if rng.random_bool(0.5) {
                    Shape::Rectangle
                } else {
                    Shape::Ellipse
                },
                x,
                y,
                width: w,
                height: h,
                vx,
                vy,
            };
            if !opts.allow_overlap && placed.iter().any(|o| trajectories_touch(o, &candidate, frames)) {
                continue;
            }
            placed.push(candidate);
        }
        let spec = SceneSpec {
            width: opts.width,
            height: opts.height,
            frames,
            feature_stride: opts.feature_stride,
            channels: opts.channels,
            objects: placed,
            seed,
            feature_noise: opts.feature_noise,
            texture_period: opts.texture_period,
            degradation: opts.degradation,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn trajectories_touch(a: &ObjectSpec, b: &ObjectSpec, frames: u32) -> bool {
    // one pixel of clearance so masks never share a boundary pixel
    (0..frames).any(|t| {
        let (ax, ay) = a.origin(t);
        let (bx, by) = b.origin(t);
        ax < bx + b.width + 1.0
            && bx < ax + a.width + 1.0
            && ay < by + b.height + 1.0
            && by < ay + a.height + 1.0
    })
}

/// Renders annotations, features and flows of a validated [`SceneSpec`].
#[derive(Debug, Clone)]
pub struct Scene {
    spec: SceneSpec,
    /// `gain[k][t]`: appearance multiplier of object `k` at frame `t`.
    gain: Vec<Vec<f64>>,
}

impl Scene {
    pub fn new(spec: SceneSpec) -> Result<Self> {
        spec.validate()?;
        let d = spec.degradation;
        let gain = (0..spec.objects.len())
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    spec.seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(k as u64 + 1),
                );
                let mut left = 0u32;
                (0..spec.frames)
                    .map(|_| {
                        let starts = rng.random_bool(d.rate);
                        if left == 0 && starts {
                            left = d.frames;
                        }
                        if left > 0 {
                            left -= 1;
                            1.0 - d.strength
                        } else {
                            1.0
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Scene { spec, gain })
    }

    /// Appearance multiplier of object `index` at `frame` (1 outside episodes).
    pub fn appearance_gain(&self, index: usize, frame: u32) -> f64 {
        self.gain[index].get(frame as usize).copied().unwrap_or(1.0)
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn feature_size(&self) -> (usize, usize) {
        let s = self.spec.feature_stride;
        ((self.spec.height / s) as usize, (self.spec.width / s) as usize)
    }

    /// Index of the frontmost object covering `(px, py)`; lower index is in front.
    fn owner(&self, frame: u32, px: f64, py: f64) -> Option<usize> {
        self.spec.objects.iter().position(|o| o.contains(frame, px, py))
    }

    fn owner_map(&self, frame: u32) -> Vec<Option<usize>> {
        let (w, h) = (self.spec.width as usize, self.spec.height as usize);
        let mut map = vec![None; w * h];
        for (k, o) in self.spec.objects.iter().enumerate().rev() {
            let (ox, oy) = o.origin(frame);
            let c0 = (ox - 1.0).floor().max(0.0) as usize;
            let r0 = (oy - 1.0).floor().max(0.0) as usize;
            let c1 = ((ox + o.width + 1.0).ceil().max(0.0) as usize).min(w);
            let r1 = ((oy + o.height + 1.0).ceil().max(0.0) as usize).min(h);
            for r in r0..r1 {
                for c in c0..c1 {
                    if o.contains(frame, c as f64 + 0.5, r as f64 + 0.5) {
                        map[r * w + c] = Some(k);
                    }
                }
            }
        }
        map
    }

    /// File-style object id of object `index`.
    pub fn object_id(&self, index: usize) -> u32 {
        encode_object_id(self.spec.objects[index].class_id, index as u32 + 1)
            .expect("validated scenes have fewer than 1000 objects")
    }

    /// Visible instance masks at `frame`; fully hidden or off-canvas objects are absent.
    pub fn annotations(&self, frame: u32) -> FrameAnnotations {
        let (w, h) = (self.spec.width, self.spec.height);
        let map = self.owner_map(frame);
        let objects = (0..self.spec.objects.len())
            .filter_map(|k| {
                let mask = BinaryMask::from_fn(h, w, |r, c| map[(r * w + c) as usize] == Some(k));
                (!mask.is_empty()).then(|| AnnotatedObject {
                    object_id: self.object_id(k),
                    class_id: self.spec.objects[k].class_id,
                    mask,
                })
            })
            .collect();
        FrameAnnotations { frame, objects }
    }

    fn texture(&self, u: f64, v: f64) -> f64 {
        let p = self.spec.texture_period;
        if p == 0.0 {
            return 1.0;
        }
        let tau = std::f64::consts::TAU;
        1.0 + 0.5 * (tau * u / p).sin() * (tau * v / p).cos()
    }

    fn frame_rng(&self, frame: u32, salt: u64) -> ChaCha8Rng {
        let mix = self
            .spec
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((frame as u64) << 20)
            .wrapping_add(salt);
        ChaCha8Rng::seed_from_u64(mix)
    }

    /// Feature grid of `frame`: object `k` writes its texture into channel `k`.
    pub fn features(&self, frame: u32) -> FeatureGrid {
        let (fh, fw) = self.feature_size();
        let s = self.spec.feature_stride as f64;
        let mut grid = FeatureGrid::zeros(self.spec.channels, fh, fw);
        for i in 0..fh {
            for j in 0..fw {
                let (px, py) = ((j as f64 + 0.5) * s, (i as f64 + 0.5) * s);
                if let Some(k) = self.owner(frame, px, py) {
                    let (ox, oy) = self.spec.objects[k].origin(frame);
                    let g = self.appearance_gain(k, frame);
                    grid.set(k, i, j, g * self.texture(px - ox, py - oy));
                }
            }
        }
        if self.spec.feature_noise > 0.0 {
            let mut rng = self.frame_rng(frame, 1);
            let normal = Normal::new(0.0, self.spec.feature_noise).expect("validated noise");
            grid.as_mut_slice()
                .iter_mut()
                .for_each(|v| *v += normal.sample(&mut rng));
        }
        grid
    }

    /// Flow in feature cells that warps frame `from` onto frame `to`.
    ///
    /// Each pixel of an object visible at `to` points back to where the same
    /// object point was at `from`; background stays 0. `object_offsets[k]`
    /// (px) is added to object `k`'s displacement when given.
    pub fn flow_with_offsets(
        &self,
        from: u32,
        to: u32,
        object_offsets: Option<&[(f64, f64)]>,
    ) -> Result<FlowField> {
        let (w, h) = (self.spec.width as usize, self.spec.height as usize);
        let map = self.owner_map(to);
        let dt = to as f64 - from as f64;
        let mut flow = FlowField::zeros(h, w);
        for (p, owner) in map.iter().enumerate() {
            if let Some(k) = *owner {
                let o = &self.spec.objects[k];
                let (ex, ey) = object_offsets.map_or((0.0, 0.0), |off| off[k]);
                flow.dx_mut()[p] = -o.vx * dt + ex;
                flow.dy_mut()[p] = -o.vy * dt + ey;
            }
        }
        downsample_flow(&flow, self.spec.feature_stride as usize)
    }

    pub fn flow(&self, from: u32, to: u32) -> Result<FlowField> {
        self.flow_with_offsets(from, to, None)
    }

    /// Flow with a per-object displacement error of standard deviation
    /// `sigma_per_frame * (to - from)` px.
    pub fn noisy_flow(&self, from: u32, to: u32, sigma_per_frame: f64) -> Result<FlowField> {
        if sigma_per_frame == 0.0 {
            return self.flow(from, to);
        }
        let sigma = sigma_per_frame * (to as f64 - from as f64).abs();
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| MotsError::Config(format!("flow noise: {e}")))?;
        let mut rng = self.frame_rng(to, 2 + ((to - from) as u64) * 7919);
        let offsets: Vec<(f64, f64)> = (0..self.spec.objects.len())
            .map(|_| (normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        self.flow_with_offsets(from, to, Some(&offsets))
    }
}

/// Ground truth, features and flows for one frame of a generated sequence.
#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub gt: FrameAnnotations,
    pub features: FeatureGrid,
    /// `flows[i]` warps frame `t - 1 - i` onto `t`.
    pub flows: Vec<FlowField>,
}

/// Renders every frame with exact flows to up to `history` previous frames.
pub fn generate_sequence(spec: &SceneSpec, history: usize) -> Result<Vec<SyntheticFrame>> {
    let scene = Scene::new(spec.clone())?;
    (0..spec.frames)
        .map(|t| {
            let flows = (1..=history.min(t as usize))
                .map(|lag| scene.flow(t - lag as u32, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(SyntheticFrame {
                gt: scene.annotations(t),
                features: scene.features(t),
                flows,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::warp;
    use crate::geometry::mask_iou;

    fn one_object(vx: f64, vy: f64, stride: u32) -> SceneSpec {
        SceneSpec {
            width: 64,
            height: 48,
            frames: 5,
            feature_stride: stride,
            channels: 2,
            objects: vec![ObjectSpec {
                class_id: 1,
                shape: Shape::Rectangle,
                x: 10.0,
                y: 12.0,
                width: 16.0,
                height: 12.0,
                vx,
                vy,
            }],
            seed: 3,
            feature_noise: 0.0,
            texture_period: 8.0,
            degradation: Degradation::default(),
        }
    }

    #[test]
    fn degradation_episodes_scale_appearance() {
        let mut spec = one_object(1.0, 0.0, 1);
        spec.frames = 40;
        spec.degradation = Degradation { rate: 0.2, frames: 3, strength: 0.75 };
        let scene = Scene::new(spec.clone()).unwrap();
        let gains: Vec<f64> = (0..40).map(|t| scene.appearance_gain(0, t)).collect();
        assert!(gains.iter().all(|&g| g == 1.0 || g == 0.25));
        assert!(gains.contains(&0.25) && gains.contains(&1.0));
        // episodes that end inside the sequence last a multiple of the nominal length
        let mut run = 0;
        for &g in &gains {
            if g < 1.0 {
                run += 1;
            } else {
                assert_eq!(run % 3, 0, "{gains:?}");
                run = 0;
            }
        }
        let clean = Scene::new(SceneSpec { degradation: Degradation::default(), ..spec }).unwrap();
        for t in 0..40 {
            let a = scene.features(t);
            let b = clean.features(t);
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - gains[t as usize] * y).abs() < 1e-12);
            }
        }
        assert!(Scene::new(SceneSpec {
            degradation: Degradation { rate: 2.0, frames: 1, strength: 0.5 },
            ..one_object(1.0, 0.0, 1)
        })
        .is_err());
    }

    #[test]
    fn deterministic() {
        let spec = SceneSpec::random(7, 6, 4, &RandomSceneOptions::default()).unwrap();
        let again = SceneSpec::random(7, 6, 4, &RandomSceneOptions::default()).unwrap();
        assert_eq!(spec, again);
        let a = generate_sequence(&spec, 3).unwrap();
        let b = generate_sequence(&spec, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.gt, y.gt);
            assert_eq!(x.features, y.features);
            assert_eq!(x.flows, y.flows);
        }
    }

    #[test]
    fn static_scene() {
        let seq = generate_sequence(&one_object(0.0, 0.0, 1), 2).unwrap();
        for f in &seq[1..] {
            assert_eq!(f.gt.objects, seq[0].gt.objects);
            assert!(f.flows.iter().all(|fl| fl.dx().iter().chain(fl.dy()).all(|&v| v == 0.0)));
        }
    }

    #[test]
    fn warp_reproduces_next_frame_inside_object() {
        for stride in [1, 2] {
            let seq = generate_sequence(&one_object(2.0, 0.0, stride), 1).unwrap();
            let warped = warp(&seq[0].features, &seq[1].flows[0]).unwrap();
            let s = stride as f64;
            let cur = &seq[1].features;
            let mut checked = 0;
            for i in 0..cur.height() {
                for j in 0..cur.width() {
                    let (px, py) = ((j as f64 + 0.5) * s, (i as f64 + 0.5) * s);
                    // interior of the object at frame 1: x in [12, 28), y in [12, 24)
                    if px > 12.0 + s && px < 28.0 - s && py > 12.0 + s && py < 24.0 - s {
                        checked += 1;
                        for c in 0..cur.channels() {
                            assert!((warped.get(c, i, j) - cur.get(c, i, j)).abs() < 1e-12);
                        }
                    }
                }
            }
            assert!(checked > 0);
        }
    }

    #[test]
    fn mask_motion_matches_flow() {
        let spec = SceneSpec::random(11, 8, 4, &RandomSceneOptions::default()).unwrap();
        let scene = Scene::new(spec.clone()).unwrap();
        for t in 1..spec.frames {
            let prev = scene.annotations(t - 1);
            let cur = scene.annotations(t);
            for o in &cur.objects {
                let k = (o.object_id % 1000 - 1) as usize;
                let obj = &spec.objects[k];
                let Some(p) = prev.objects.iter().find(|p| p.object_id == o.object_id) else {
                    continue;
                };
                let moved = p.mask.translate(obj.vy as i64, obj.vx as i64);
                let (ox, oy) = obj.origin(t);
                let inside = ox >= 1.0
                    && oy >= 1.0
                    && ox + obj.width <= spec.width as f64 - 1.0
                    && oy + obj.height <= spec.height as f64 - 1.0;
                if inside {
                    assert_eq!(mask_iou(&moved, &o.mask).unwrap(), 1.0);
                }
            }
        }
    }

    #[test]
    fn masks_never_overlap() {
        let opts = RandomSceneOptions {
            allow_overlap: true,
            ..Default::default()
        };
        let spec = SceneSpec::random(5, 10, 6, &opts).unwrap();
        for f in generate_sequence(&spec, 0).unwrap() {
            f.gt.validate().unwrap();
        }
    }

    #[test]
    fn oversized_object_rejected() {
        let mut spec = one_object(0.0, 0.0, 1);
        spec.objects[0].width = 100.0;
        assert!(matches!(Scene::new(spec), Err(MotsError::Spec(_))));
        let mut spec = one_object(0.0, 0.0, 3);
        spec.feature_stride = 5;
        assert!(Scene::new(spec).is_err());
    }
}
