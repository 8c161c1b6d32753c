//! Online multi-object tracking and segmentation.
//!
//! Each frame runs flow-guided feature aggregation over a window of previous
//! frames, blends detector and mask boxes with a scale-adaptive weight, pools
//! identity vectors from the fused features and associates them with live
//! tracks by maximum-similarity bipartite matching. The crate also ships
//! CLEAR-MOTS style evaluation, the training objectives as plain functions,
//! a synthetic scene generator with exact ground truth, and the mask text
//! format with its RLE codec.

pub mod association;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod pipeline;
pub mod synth;

pub use error::{MotsError, Result};
