//! C ABI over `mots-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`MotsStatus`]; the message of the most recent failure on the calling
//! thread is available through [`mots_last_error`]. Panics never unwind into
//! the caller, they surface as [`MotsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mots_core::association::{IdentityVector, TrackerParams, TrackerState, IDENTITY_DIM};
use mots_core::geometry::{self, BBox, BinaryMask, FusionParams};
use mots_core::io;
use mots_core::metrics;
use mots_core::pipeline::{cost_ratio, CostModel};
use mots_core::MotsError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptyMask = 3,
    Shape = 4,
    DegenerateBox = 5,
    FrameOrder = 6,
    Undefined = 7,
    Parse = 8,
    Io = 9,
    Config = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&MotsError> for MotsStatus {
    fn from(e: &MotsError) -> Self {
        match e {
            MotsError::EmptyMask => MotsStatus::EmptyMask,
            MotsError::Shape(_) => MotsStatus::Shape,
            MotsError::DegenerateBox { .. } => MotsStatus::DegenerateBox,
            MotsError::FrameOrder { .. } => MotsStatus::FrameOrder,
            MotsError::UndefinedLoss(_) | MotsError::UndefinedScores => MotsStatus::Undefined,
            MotsError::InvalidAnnotations { .. } | MotsError::Parse { .. } => MotsStatus::Parse,
            MotsError::Io { .. } => MotsStatus::Io,
            MotsError::Spec(_) | MotsError::Config(_) => MotsStatus::Config,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(MotsStatus, String);

impl From<MotsError> for Failure {
    fn from(e: MotsError) -> Self {
        Failure(MotsStatus::from(&e), e.to_string())
    }
}

fn fail(status: MotsStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, recording failures and containing panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MotsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MotsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MotsStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(fail(MotsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MotsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Copies `s` plus a NUL terminator into `buf`; `needed` receives the full size.
unsafe fn write_c_string(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Failure> {
    if !needed.is_null() {
        *needed = s.len() + 1;
    }
    if buf.is_null() || len < s.len() + 1 {
        return Err(fail(
            MotsStatus::BufferTooSmall,
            format!("buffer of {len} bytes, need {}", s.len() + 1),
        ));
    }
    std::ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn bbox_from(c: &[f64; 4]) -> Result<BBox, Failure> {
    Ok(BBox::new(c[0], c[1], c[2], c[3])?)
}

/// Length of identity vectors passed to [`mots_tracker_step`].
pub const MOTS_IDENTITY_DIM: usize = 128;

const _: () = assert!(MOTS_IDENTITY_DIM == IDENTITY_DIM);

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn mots_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> MotsStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match write_c_string(&msg, buf, len, needed) {
        Ok(()) => MotsStatus::Ok,
        Err(Failure(s, _)) => s,
    }
}

/// Online tracker state.
pub struct MotsTracker {
    inner: TrackerState,
}

/// Creates a tracker; `out` receives the handle.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mots_tracker_new(
    similarity_threshold: f64,
    max_age: u32,
    out: *mut *mut MotsTracker,
) -> MotsStatus {
    guard(|| {
        non_null(out, "out")?;
        let inner = TrackerState::new(TrackerParams {
            similarity_threshold,
            max_age,
        })?;
        *out = Box::into_raw(Box::new(MotsTracker { inner }));
        Ok(())
    })
}

/// # Safety
/// `tracker` must be null or a handle from [`mots_tracker_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mots_tracker_free(tracker: *mut MotsTracker) {
    if !tracker.is_null() {
        drop(Box::from_raw(tracker));
    }
}

/// Associates `count` detections of `frame` with live tracks.
///
/// `vectors` holds `count * MOTS_IDENTITY_DIM` values (normalized here),
/// `classes` the class of each detection; `out_ids` receives one track id
/// per detection. On failure the tracker is unchanged.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `tracker` must be live.
#[no_mangle]
pub unsafe extern "C" fn mots_tracker_step(
    tracker: *mut MotsTracker,
    frame: u32,
    vectors: *const f64,
    classes: *const u32,
    count: usize,
    out_ids: *mut u32,
) -> MotsStatus {
    guard(|| {
        non_null(tracker, "tracker")?;
        if count > 0 {
            non_null(vectors, "vectors")?;
            non_null(classes, "classes")?;
            non_null(out_ids, "out_ids")?;
        }
        let mut detections = Vec::with_capacity(count);
        for i in 0..count {
            let raw = std::slice::from_raw_parts(vectors.add(i * IDENTITY_DIM), IDENTITY_DIM);
            detections.push((IdentityVector::from_raw(raw.to_vec())?, *classes.add(i)));
        }
        let ids = (*tracker).inner.step(&detections, frame)?;
        if count > 0 {
            std::slice::from_raw_parts_mut(out_ids, count).copy_from_slice(&ids);
        }
        Ok(())
    })
}

/// Number of live tracks.
///
/// # Safety
/// `tracker` must be live.
#[no_mangle]
pub unsafe extern "C" fn mots_tracker_len(tracker: *const MotsTracker) -> usize {
    if tracker.is_null() {
        0
    } else {
        (*tracker).inner.tracks().len()
    }
}

/// Binary instance mask.
pub struct MotsMask {
    inner: BinaryMask,
}

unsafe fn new_mask(mask: BinaryMask, out: *mut *mut MotsMask) {
    *out = Box::into_raw(Box::new(MotsMask { inner: mask }));
}

/// Builds a mask from `height * width` row-major bytes (non-zero is foreground).
///
/// # Safety
/// `pixels` must hold `height * width` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mots_mask_from_pixels(
    pixels: *const u8,
    height: u32,
    width: u32,
    out: *mut *mut MotsMask,
) -> MotsStatus {
    guard(|| {
        non_null(out, "out")?;
        let n = height as usize * width as usize;
        if n > 0 {
            non_null(pixels, "pixels")?;
        }
        let data = if n == 0 { &[][..] } else { std::slice::from_raw_parts(pixels, n) };
        let bits: Vec<bool> = data.iter().map(|&v| v != 0).collect();
        new_mask(BinaryMask::from_row_major(height, width, &bits)?, out);
        Ok(())
    })
}

/// Decodes an RLE string of a `height x width` mask.
///
/// # Safety
/// `rle` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mots_mask_from_rle(
    rle: *const c_char,
    height: u32,
    width: u32,
    out: *mut *mut MotsMask,
) -> MotsStatus {
    guard(|| {
        non_null(out, "out")?;
        let s = c_str(rle, "rle")?;
        new_mask(io::rle_decode(s, height, width)?, out);
        Ok(())
    })
}

/// # Safety
/// `mask` must be null or a live mask handle.
#[no_mangle]
pub unsafe extern "C" fn mots_mask_free(mask: *mut MotsMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// Foreground pixel count.
///
/// # Safety
/// `mask` must be live.
#[no_mangle]
pub unsafe extern "C" fn mots_mask_area(mask: *const MotsMask) -> u64 {
    if mask.is_null() {
        0
    } else {
        (*mask).inner.area()
    }
}

/// Encodes the mask as an RLE string into `buf`.
///
/// # Safety
/// `mask` must be live; `buf` null or valid for `len` bytes; `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mots_mask_to_rle(
    mask: *const MotsMask,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> MotsStatus {
    guard(|| {
        non_null(mask, "mask")?;
        write_c_string(&io::rle_encode(&(*mask).inner), buf, len, needed)
    })
}

/// Intersection over union of two masks of equal size.
///
/// # Safety
/// Both masks must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mots_mask_iou(a: *const MotsMask, b: *const MotsMask, out: *mut f64) -> MotsStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        *out = geometry::mask_iou(&(*a).inner, &(*b).inner)?;
        Ok(())
    })
}

/// Tight box `[x1, y1, x2, y2]` of the foreground.
///
/// # Safety
/// `mask` must be live; `out` must hold 4 values.
#[no_mangle]
pub unsafe extern "C" fn mots_mask_bbox(mask: *const MotsMask, out: *mut [f64; 4]) -> MotsStatus {
    guard(|| {
        non_null(mask, "mask")?;
        non_null(out, "out")?;
        *out = geometry::mask_to_bbox(&(*mask).inner)?.to_array();
        Ok(())
    })
}

/// Scale-adaptive blend of a detector box and a mask box.
///
/// # Safety
/// Each pointer must reference 4 values.
#[no_mangle]
pub unsafe extern "C" fn mots_fuse_boxes(
    detection: *const [f64; 4],
    from_mask: *const [f64; 4],
    reference_area: f64,
    out: *mut [f64; 4],
) -> MotsStatus {
    guard(|| {
        non_null(detection, "detection")?;
        non_null(from_mask, "from_mask")?;
        non_null(out, "out")?;
        let params = FusionParams::new(reference_area)?;
        let fused = geometry::fuse_boxes(&bbox_from(&*detection)?, &bbox_from(&*from_mask)?, &params);
        *out = fused.to_array();
        Ok(())
    })
}

/// Per-module costs for [`mots_cost_ratio`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MotsCostModel {
    pub backbone: f64,
    pub flow: f64,
    pub classification: f64,
    pub box_regression: f64,
    pub mask: f64,
    pub tracking: f64,
    pub conv3d: f64,
    pub temporal_range: u32,
    pub baseline_range: u32,
}

/// Runtime ratio of flow-guided to 3D-convolution fusion.
///
/// # Safety
/// `model` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mots_cost_ratio(model: *const MotsCostModel, out: *mut f64) -> MotsStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        let m = &*model;
        *out = cost_ratio(&CostModel {
            backbone: m.backbone,
            flow: m.flow,
            classification: m.classification,
            box_regression: m.box_regression,
            mask: m.mask,
            tracking: m.tracking,
            conv3d: m.conv3d,
            temporal_range: m.temporal_range,
            baseline_range: m.baseline_range,
        })?;
        Ok(())
    })
}

/// Scores and raw counts of one evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MotsScoreSummary {
    pub smotsa: f64,
    pub motsa: f64,
    pub motsp: f64,
    /// 0 when there were no true positives and `motsp` is a placeholder.
    pub motsp_defined: u8,
    pub ids: u64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub gt_masks: u64,
}

/// Evaluates a prediction file against a ground-truth file.
///
/// `class_id` selects one class; 0 combines all classes.
///
/// # Safety
/// Paths must be NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mots_evaluate_files(
    gt_path: *const c_char,
    pred_path: *const c_char,
    class_id: u32,
    out: *mut MotsScoreSummary,
) -> MotsStatus {
    guard(|| {
        non_null(out, "out")?;
        let gt = io::parse_file(c_str(gt_path, "gt_path")?)?;
        let pred = io::parse_file(c_str(pred_path, "pred_path")?)?;
        let scores = metrics::evaluate(&gt, &pred)?;
        let counts = if class_id == 0 {
            scores.combined()
        } else {
            *scores
                .class(class_id)
                .ok_or_else(|| fail(MotsStatus::Undefined, format!("no ground truth for class {class_id}")))?
        };
        let s = counts.summary()?;
        *out = MotsScoreSummary {
            smotsa: s.smotsa,
            motsa: s.motsa,
            motsp: s.motsp,
            motsp_defined: s.motsp_defined as u8,
            ids: counts.ids,
            tp: counts.tp,
            fp: counts.fp,
            fn_: counts.fn_,
            gt_masks: counts.gt_masks,
        };
        Ok(())
    })
}
