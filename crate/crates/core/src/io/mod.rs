//! Text interchange formats: instance masks with RLE strings, detector box
//! sidecars and run configuration.

mod boxes;
mod config;
mod kitti;
mod rle;

pub use boxes::{parse_boxes_file, parse_boxes_str, write_boxes_file, write_boxes_str, BoxTable};
pub use config::RunConfig;
pub use kitti::{encode_object_id, parse_file, parse_str, write_file, write_str, ID_CLASS_FACTOR};
pub use rle::{decode_counts, encode_counts, rle_decode, rle_encode};
