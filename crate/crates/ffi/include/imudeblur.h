#ifndef IMUDEBLUR_H
#define IMUDEBLUR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum ImdStatus {
  IMD_STATUS_OK = 0,
  IMD_STATUS_NULL_POINTER = 1,
  IMD_STATUS_INVALID_ARGUMENT = 2,
  IMD_STATUS_IO = 3,
  IMD_STATUS_FORMAT = 4,
  IMD_STATUS_OUT_OF_RANGE = 5,
  IMD_STATUS_NUMERIC = 6,
  IMD_STATUS_GEOMETRY = 7,
  IMD_STATUS_PANIC = 99,
} ImdStatus;

/**
 * Validation granularity for [`imd_field_validate`].
 */
typedef enum ImdGranularity {
  IMD_GRANULARITY_BLOCK = 0,
  IMD_GRANULARITY_IMAGE = 1,
  IMD_GRANULARITY_OFF = 2,
} ImdGranularity;

typedef struct ImdBank ImdBank;

typedef struct ImdCamera ImdCamera;

typedef struct ImdField ImdField;

typedef struct ImdImage ImdImage;

typedef struct ImdTrajectory ImdTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *imd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *imd_version(void);

/**
 * Wraps `width × height` 8-bit gray pixels, rows `stride` bytes apart.
 *
 * # Safety
 * `pixels` must point to at least `stride × (height − 1) + width` bytes.
 */
enum ImdStatus imd_image_from_gray8(const uint8_t *pixels,
                                    size_t width,
                                    size_t height,
                                    size_t stride,
                                    struct ImdImage **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ImdStatus imd_image_load(const char *path, struct ImdImage **out);

/**
 * Writes a binary PGM.
 *
 * # Safety
 * `image` must be a live handle and `path` a NUL-terminated string.
 */
enum ImdStatus imd_image_save(const struct ImdImage *image, const char *path);

/**
 * # Safety
 * `image` must be a live handle or null.
 */
size_t imd_image_width(const struct ImdImage *image);

/**
 * # Safety
 * `image` must be a live handle or null.
 */
size_t imd_image_height(const struct ImdImage *image);

/**
 * Row-major `[0, 1]` intensities, valid while the handle lives.
 *
 * # Safety
 * `image` must be a live handle or null.
 */
const float *imd_image_data(const struct ImdImage *image);

/**
 * # Safety
 * `image` must come from this library and not be used afterwards.
 */
void imd_image_free(struct ImdImage *image);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ImdStatus imd_camera_load(const char *path, struct ImdCamera **out);

/**
 * Camera with square pixels and the principal point at the image center.
 *
 * # Safety
 * `out` must be writable.
 */
enum ImdStatus imd_camera_new(size_t width,
                              size_t height,
                              double focal_px,
                              int64_t readout_ns,
                              int64_t exposure_ns,
                              int64_t frame_ts_ns,
                              struct ImdCamera **out);

/**
 * # Safety
 * `camera` must come from this library and not be used afterwards.
 */
void imd_camera_free(struct ImdCamera *camera);

/**
 * Integrates `count` gyro samples: timestamps in ns, rates as interleaved
 * `wx, wy, wz` triples in rad/s.
 *
 * # Safety
 * `t_ns` must hold `count` values and `omega` `3 × count` values.
 */
enum ImdStatus imd_trajectory_from_gyro(const int64_t *t_ns,
                                        const double *omega,
                                        size_t count,
                                        struct ImdTrajectory **out);

/**
 * Reads and integrates a `t_ns,wx,wy,wz` CSV trace.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ImdStatus imd_trajectory_load(const char *path, struct ImdTrajectory **out);

/**
 * Orientation at `t_ns` as a unit quaternion `w, x, y, z`.
 *
 * # Safety
 * `traj` must be a live handle and `wxyz` must hold 4 doubles.
 */
enum ImdStatus imd_trajectory_orientation(const struct ImdTrajectory *traj,
                                          int64_t t_ns,
                                          double *wxyz);

/**
 * # Safety
 * `traj` must come from this library and not be used afterwards.
 */
void imd_trajectory_free(struct ImdTrajectory *traj);

/**
 * Predicts the blur of every `block × block` cell.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum ImdStatus imd_field_estimate(const struct ImdCamera *camera,
                                  const struct ImdTrajectory *traj,
                                  size_t block,
                                  struct ImdField **out);

/**
 * Marks cells whose prediction the image contradicts as invalid, in place.
 *
 * # Safety
 * Handles must be live.
 */
enum ImdStatus imd_field_validate(struct ImdField *field,
                                  const struct ImdImage *image,
                                  double tau,
                                  enum ImdGranularity granularity);

/**
 * # Safety
 * `field` must be a live handle or null.
 */
size_t imd_field_cell_count(const struct ImdField *field);

/**
 * # Safety
 * `field` must be a live handle or null.
 */
size_t imd_field_valid_count(const struct ImdField *field);

/**
 * Blur of cell `index` (row-major): direction in degrees, extent in pixels,
 * validity flag.
 *
 * # Safety
 * `field` must be live; output pointers must be writable.
 */
enum ImdStatus imd_field_cell(const struct ImdField *field,
                              size_t index,
                              double *theta_deg,
                              double *extent_px,
                              bool *valid);

/**
 * # Safety
 * `field` must come from this library and not be used afterwards.
 */
void imd_field_free(struct ImdField *field);

/**
 * # Safety
 * `out` must be writable.
 */
enum ImdStatus imd_bank_build(size_t r_max, double gamma, struct ImdBank **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ImdStatus imd_bank_load(const char *path, struct ImdBank **out);

/**
 * # Safety
 * `bank` must be live and `path` a NUL-terminated string.
 */
enum ImdStatus imd_bank_save(const struct ImdBank *bank, const char *path);

/**
 * # Safety
 * `bank` must be a live handle or null.
 */
size_t imd_bank_len(const struct ImdBank *bank);

/**
 * # Safety
 * `bank` must be a live handle or null.
 */
size_t imd_bank_r_max(const struct ImdBank *bank);

/**
 * # Safety
 * `bank` must come from this library and not be used afterwards.
 */
void imd_bank_free(struct ImdBank *bank);

/**
 * Deconvolves every valid cell; invalid cells are copied through.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum ImdStatus imd_deblur(const struct ImdImage *image,
                          const struct ImdField *field,
                          const struct ImdBank *bank,
                          struct ImdImage **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMUDEBLUR_H */
