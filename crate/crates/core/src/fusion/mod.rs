//! Flow-guided feature aggregation.
//!
//! Previous-frame feature grids are warped into the current frame along a
//! flow field, scored per pixel against the current frame through a fixed
//! embedding projection, and summed with softmax-of-cosine weights on top of
//! the current frame's own features.

mod grid;

pub use grid::{downsample_flow, FeatureGrid, FlowField};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{MotsError, Result};

/// Per-pixel weight map for one warped frame, row-major `H x W`.
pub type WeightMap = Vec<f64>;

/// Backward warp: `out(c, p) = feat(c, p + flow(p))`, bilinear with zero padding.
pub fn warp(feat: &FeatureGrid, flow: &FlowField) -> Result<FeatureGrid> {
    let (channels, height, width) = feat.shape();
    if flow.height() != height || flow.width() != width {
        return Err(MotsError::shape(format!(
            "flow {}x{} does not match features {height}x{width}",
            flow.height(),
            flow.width()
        )));
    }
    let mut out = FeatureGrid::zeros(channels, height, width);
    for y in 0..height {
        for x in 0..width {
            let (dx, dy) = flow.at(y, x);
            let (sy, sx) = (y as f64 + dy, x as f64 + dx);
            for c in 0..channels {
                out.set(c, y, x, feat.sample(c, sy, sx));
            }
        }
    }
    Ok(out)
}

/// Fixed linear map from a `C`-dim pixel feature to an `E`-dim embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingProjector {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
}

impl EmbeddingProjector {
    /// Gaussian random projection drawn from `seed`.
    pub fn seeded(in_dim: usize, out_dim: usize, seed: u64) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(MotsError::shape("projector dimensions must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        Ok(EmbeddingProjector {
            in_dim,
            out_dim,
            weights,
        })
    }

    /// Explicit `out_dim x in_dim` row-major matrix; at least one entry must be nonzero.
    pub fn from_matrix(in_dim: usize, out_dim: usize, weights: Vec<f64>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 || weights.len() != in_dim * out_dim {
            return Err(MotsError::shape("projector matrix has wrong size"));
        }
        if weights.iter().all(|&w| w == 0.0) || weights.iter().any(|w| !w.is_finite()) {
            return Err(MotsError::shape("projector matrix must be finite and nonzero"));
        }
        Ok(EmbeddingProjector {
            in_dim,
            out_dim,
            weights,
        })
    }

    /// Identity projection (`E = C`).
    pub fn identity(dim: usize) -> Self {
        let mut weights = vec![0.0; dim * dim];
        for i in 0..dim {
            weights[i * dim + i] = 1.0;
        }
        EmbeddingProjector {
            in_dim: dim,
            out_dim: dim,
            weights,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn project_into(&self, input: &[f64], out: &mut [f64]) {
        for (row, o) in self.weights.chunks_exact(self.in_dim).zip(out.iter_mut()) {
            *o = row.iter().zip(input).map(|(w, v)| w * v).sum();
        }
    }

    pub fn project(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim];
        self.project_into(input, &mut out);
        out
    }

    /// Embeds every pixel of `grid`; result is pixel-major `H*W x E`.
    fn embed_grid(&self, grid: &FeatureGrid) -> Result<Vec<f64>> {
        let (channels, height, width) = grid.shape();
        if channels != self.in_dim {
            return Err(MotsError::shape(format!(
                "projector expects {} channels, grid has {channels}",
                self.in_dim
            )));
        }
        let n = height * width;
        let mut out = vec![0.0; n * self.out_dim];
        let mut pixel = vec![0.0; channels];
        for p in 0..n {
            for (c, v) in pixel.iter_mut().enumerate() {
                *v = grid.as_slice()[c * n + p];
            }
            self.project_into(&pixel, &mut out[p * self.out_dim..(p + 1) * self.out_dim]);
        }
        Ok(out)
    }
}

/// Cosine similarity, defined as 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Per-pixel weights `exp(cos(e_k(p), e_t(p)))`, normalized over `k` at every pixel.
pub fn fusion_weights(
    warped: &[FeatureGrid],
    current: &FeatureGrid,
    proj: &EmbeddingProjector,
) -> Result<Vec<WeightMap>> {
    if warped.is_empty() {
        return Err(MotsError::shape("fusion_weights needs at least one warped grid"));
    }
    for w in warped {
        w.check_same_shape(current)?;
    }
    let n_pix = current.height() * current.width();
    let e = proj.out_dim();
    let cur = proj.embed_grid(current)?;
    let mut maps: Vec<WeightMap> = Vec::with_capacity(warped.len());
    for w in warped {
        let emb = proj.embed_grid(w)?;
        let map = (0..n_pix)
            .map(|p| cosine(&emb[p * e..(p + 1) * e], &cur[p * e..(p + 1) * e]).exp())
            .collect();
        maps.push(map);
    }
    for p in 0..n_pix {
        let total: f64 = maps.iter().map(|m| m[p]).sum();
        for m in maps.iter_mut() {
            m[p] /= total;
        }
    }
    Ok(maps)
}

/// `out = sum_k weights_k * warped_k + current`, element-wise per pixel.
pub fn fuse(
    warped: &[FeatureGrid],
    weights: &[WeightMap],
    current: &FeatureGrid,
) -> Result<FeatureGrid> {
    if warped.len() != weights.len() {
        return Err(MotsError::shape(format!(
            "{} warped grids but {} weight maps",
            warped.len(),
            weights.len()
        )));
    }
    let (channels, height, width) = current.shape();
    let n_pix = height * width;
    let mut out = current.clone();
    for (grid, map) in warped.iter().zip(weights) {
        grid.check_same_shape(current)?;
        if map.len() != n_pix {
            return Err(MotsError::shape("weight map does not match grid"));
        }
        let src = grid.as_slice();
        let dst = out.as_mut_slice();
        for c in 0..channels {
            let base = c * n_pix;
            for p in 0..n_pix {
                dst[base + p] += map[p] * src[base + p];
            }
        }
    }
    Ok(out)
}

/// Settings of the flow-guided aggregation stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    /// Number of previous frames warped into the current one.
    pub temporal_range: usize,
    /// Embedding width of the similarity projection.
    pub embedding_dim: usize,
    pub projector_seed: u64,
    /// Treat the current frame as one more weighted term instead of adding it on top.
    pub include_current_in_normalization: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            temporal_range: 8,
            embedding_dim: 16,
            projector_seed: 0x5eed_f00d,
            include_current_in_normalization: false,
        }
    }
}

/// Warps and fuses a window of previous frames into the current one.
///
/// `previous[i]` holds the grid of frame `t - 1 - i` and the flow that maps it to `t`.
pub fn aggregate(
    current: &FeatureGrid,
    previous: &[(&FeatureGrid, &FlowField)],
    proj: &EmbeddingProjector,
    include_current: bool,
) -> Result<FeatureGrid> {
    if previous.is_empty() {
        return Ok(current.clone());
    }
    let mut warped = previous
        .iter()
        .map(|(g, f)| warp(g, f))
        .collect::<Result<Vec<_>>>()?;
    if !include_current {
        let weights = fusion_weights(&warped, current, proj)?;
        return fuse(&warped, &weights, current);
    }
    warped.push(current.clone());
    let weights = fusion_weights(&warped, current, proj)?;
    let zero = FeatureGrid::zeros(current.channels(), current.height(), current.width());
    fuse(&warped, &weights, &zero)
}
