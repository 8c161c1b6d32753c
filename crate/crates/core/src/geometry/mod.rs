//! Boxes, run-length masks, overlap measures and ROI sampling.

mod bbox;
mod mask;
mod roi;

pub use bbox::{bbox_iou, blend_boxes, fuse_boxes, BBox, FusionParams};
pub use mask::{mask_iou, mask_to_bbox, BinaryMask};
pub use roi::roi_extract;
