#ifndef MOTS_H
#define MOTS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Length of identity vectors passed to [`mots_tracker_step`].
 */
#define MOTS_IDENTITY_DIM 128

/**
 * Result code of every fallible call.
 */
typedef enum MotsStatus {
  MOTS_STATUS_OK = 0,
  MOTS_STATUS_NULL_POINTER = 1,
  MOTS_STATUS_INVALID_ARGUMENT = 2,
  MOTS_STATUS_EMPTY_MASK = 3,
  MOTS_STATUS_SHAPE = 4,
  MOTS_STATUS_DEGENERATE_BOX = 5,
  MOTS_STATUS_FRAME_ORDER = 6,
  MOTS_STATUS_UNDEFINED = 7,
  MOTS_STATUS_PARSE = 8,
  MOTS_STATUS_IO = 9,
  MOTS_STATUS_CONFIG = 10,
  MOTS_STATUS_BUFFER_TOO_SMALL = 11,
  MOTS_STATUS_PANIC = 12,
} MotsStatus;

/**
 * Binary instance mask.
 */
typedef struct MotsMask MotsMask;

/**
 * Online tracker state.
 */
typedef struct MotsTracker MotsTracker;

/**
 * Per-module costs for [`mots_cost_ratio`].
 */
typedef struct MotsCostModel {
  double backbone;
  double flow;
  double classification;
  double box_regression;
  double mask;
  double tracking;
  double conv3d;
  uint32_t temporal_range;
  uint32_t baseline_range;
} MotsCostModel;

/**
 * Scores and raw counts of one evaluation.
 */
typedef struct MotsScoreSummary {
  double smotsa;
  double motsa;
  double motsp;
  /**
   * 0 when there were no true positives and `motsp` is a placeholder.
   */
  uint8_t motsp_defined;
  uint64_t ids;
  uint64_t tp;
  uint64_t fp;
  uint64_t fn_;
  uint64_t gt_masks;
} MotsScoreSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf`.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes; `needed` must be null or writable.
 */
enum MotsStatus mots_last_error(char *buf, size_t len, size_t *needed);

/**
 * Creates a tracker; `out` receives the handle.
 *
 * # Safety
 * `out` must be writable.
 */
enum MotsStatus mots_tracker_new(double similarity_threshold,
                                 uint32_t max_age,
                                 struct MotsTracker **out);

/**
 * # Safety
 * `tracker` must be null or a handle from [`mots_tracker_new`] not yet freed.
 */
void mots_tracker_free(struct MotsTracker *tracker);

/**
 * Associates `count` detections of `frame` with live tracks.
 *
 * `vectors` holds `count * MOTS_IDENTITY_DIM` values (normalized here),
 * `classes` the class of each detection; `out_ids` receives one track id
 * per detection. On failure the tracker is unchanged.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `tracker` must be live.
 */
enum MotsStatus mots_tracker_step(struct MotsTracker *tracker,
                                  uint32_t frame,
                                  const double *vectors,
                                  const uint32_t *classes,
                                  size_t count,
                                  uint32_t *out_ids);

/**
 * Number of live tracks.
 *
 * # Safety
 * `tracker` must be live.
 */
size_t mots_tracker_len(const struct MotsTracker *tracker);

/**
 * Builds a mask from `height * width` row-major bytes (non-zero is foreground).
 *
 * # Safety
 * `pixels` must hold `height * width` bytes; `out` must be writable.
 */
enum MotsStatus mots_mask_from_pixels(const uint8_t *pixels,
                                      uint32_t height,
                                      uint32_t width,
                                      struct MotsMask **out);

/**
 * Decodes an RLE string of a `height x width` mask.
 *
 * # Safety
 * `rle` must be a NUL-terminated string; `out` must be writable.
 */
enum MotsStatus mots_mask_from_rle(const char *rle,
                                   uint32_t height,
                                   uint32_t width,
                                   struct MotsMask **out);

/**
 * # Safety
 * `mask` must be null or a live mask handle.
 */
void mots_mask_free(struct MotsMask *mask);

/**
 * Foreground pixel count.
 *
 * # Safety
 * `mask` must be live.
 */
uint64_t mots_mask_area(const struct MotsMask *mask);

/**
 * Encodes the mask as an RLE string into `buf`.
 *
 * # Safety
 * `mask` must be live; `buf` null or valid for `len` bytes; `needed` null or writable.
 */
enum MotsStatus mots_mask_to_rle(const struct MotsMask *mask,
                                 char *buf,
                                 size_t len,
                                 size_t *needed);

/**
 * Intersection over union of two masks of equal size.
 *
 * # Safety
 * Both masks must be live; `out` writable.
 */
enum MotsStatus mots_mask_iou(const struct MotsMask *a, const struct MotsMask *b, double *out);

/**
 * Tight box `[x1, y1, x2, y2]` of the foreground.
 *
 * # Safety
 * `mask` must be live; `out` must hold 4 values.
 */
enum MotsStatus mots_mask_bbox(const struct MotsMask *mask, double (*out)[4]);

/**
 * Scale-adaptive blend of a detector box and a mask box.
 *
 * # Safety
 * Each pointer must reference 4 values.
 */
enum MotsStatus mots_fuse_boxes(const double (*detection)[4],
                                const double (*from_mask)[4],
                                double reference_area,
                                double (*out)[4]);

/**
 * Runtime ratio of flow-guided to 3D-convolution fusion.
 *
 * # Safety
 * `model` must be readable and `out` writable.
 */
enum MotsStatus mots_cost_ratio(const struct MotsCostModel *model, double *out);

/**
 * Evaluates a prediction file against a ground-truth file.
 *
 * `class_id` selects one class; 0 combines all classes.
 *
 * # Safety
 * Paths must be NUL-terminated strings; `out` writable.
 */
enum MotsStatus mots_evaluate_files(const char *gt_path,
                                    const char *pred_path,
                                    uint32_t class_id,
                                    struct MotsScoreSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOTS_H */
