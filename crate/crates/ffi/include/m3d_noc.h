#ifndef M3D_NOC_H
#define M3D_NOC_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The non-zero values match the command-line exit codes where
 * they overlap.
 */
typedef enum M3dStatus {
  M3D_STATUS_OK = 0,
  M3D_STATUS_INTERNAL = 1,
  M3D_STATUS_VALIDATION = 2,
  M3D_STATUS_INFEASIBLE = 3,
  M3D_STATUS_NULL_ARGUMENT = 4,
  M3D_STATUS_PANIC = 5,
} M3dStatus;

/**
 * Which optimizer to run.
 */
typedef enum M3dMode {
  M3D_MODE_PROCESS_AWARE = 0,
  M3D_MODE_PROCESS_OBLIVIOUS = 1,
} M3dMode;

/**
 * A topology, core placement and tier assignment.
 */
typedef struct M3dDesign M3dDesign;

/**
 * Process and router parameters.
 */
typedef struct M3dParams M3dParams;

/**
 * Core-to-core traffic weights.
 */
typedef struct M3dTraffic M3dTraffic;

/**
 * Latency (ps), energy (pJ) and their product.
 */
typedef struct M3dEval {
  double latency_ps;
  double energy_pj;
  double edp;
} M3dEval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *m3d_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *m3d_version(void);

/**
 * Default calibration with the given variation parameters.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum M3dStatus m3d_params_new(double alpha, double beta, double gamma, struct M3dParams **out);

/**
 * Process parameters from a JSON object; missing fields take their defaults.
 *
 * # Safety
 * `json` must be NUL-terminated and `out` a valid pointer.
 */
enum M3dStatus m3d_params_from_json(const char *json, struct M3dParams **out);

/**
 * # Safety
 * `params` must come from this library or be NULL.
 */
void m3d_params_free(struct M3dParams *params);

/**
 * 3D mesh with process-oblivious tiers.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum M3dStatus m3d_design_mesh(uint32_t x,
                               uint32_t y,
                               uint32_t z,
                               double hop_pitch_mm,
                               struct M3dDesign **out);

/**
 * Small-world topology with the default link budget and process-oblivious tiers.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum M3dStatus m3d_design_smallworld(uint32_t x,
                                     uint32_t y,
                                     uint32_t z,
                                     double hop_pitch_mm,
                                     uint64_t seed,
                                     struct M3dDesign **out);

/**
 * Reads a design directory.
 *
 * # Safety
 * `dir` must be NUL-terminated and `out` a valid pointer.
 */
enum M3dStatus m3d_design_load(const char *dir, struct M3dDesign **out);

/**
 * Writes a design directory, creating it if needed.
 *
 * # Safety
 * `design` must be a live handle and `dir` NUL-terminated.
 */
enum M3dStatus m3d_design_save(const struct M3dDesign *design, const char *dir);

/**
 * `M3D_STATUS_VALIDATION` with the violations in `m3d_last_error` when the
 * design is invalid.
 *
 * # Safety
 * `design` must be a live handle.
 */
enum M3dStatus m3d_design_validate(const struct M3dDesign *design);

/**
 * Number of routers, or 0 for NULL.
 *
 * # Safety
 * `design` must be a live handle or NULL.
 */
size_t m3d_design_num_routers(const struct M3dDesign *design);

/**
 * Number of links, or 0 for NULL.
 *
 * # Safety
 * `design` must be a live handle or NULL.
 */
size_t m3d_design_num_links(const struct M3dDesign *design);

/**
 * Stage counts over all routers and stage kinds: `counts[0]` bottom-tier,
 * `counts[1]` top-tier, `counts[2]` multitier. `top_links` receives the
 * number of top-tier links.
 *
 * # Safety
 * `design` must be a live handle, `counts` must point to 3 writable values
 * and `top_links` to one.
 */
enum M3dStatus m3d_design_tier_counts(const struct M3dDesign *design,
                                      size_t *counts,
                                      size_t *top_links);

/**
 * # Safety
 * `design` must come from this library or be NULL.
 */
void m3d_design_free(struct M3dDesign *design);

/**
 * All-zero traffic over `n` cores.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum M3dStatus m3d_traffic_new(size_t n, struct M3dTraffic **out);

/**
 * Sets the weight from core `src` to core `dst`.
 *
 * # Safety
 * `traffic` must be a live handle.
 */
enum M3dStatus m3d_traffic_set(struct M3dTraffic *traffic, size_t src, size_t dst, double weight);

/**
 * Reads `src,dst,weight` CSV for `n` cores.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` a valid pointer.
 */
enum M3dStatus m3d_traffic_load_csv(const char *path, size_t n, struct M3dTraffic **out);

/**
 * Synthetic traffic whose weight decays as `distance^-exponent`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum M3dStatus m3d_traffic_distance_decay(uint32_t x,
                                          uint32_t y,
                                          uint32_t z,
                                          double exponent,
                                          struct M3dTraffic **out);

/**
 * # Safety
 * `traffic` must come from this library or be NULL.
 */
void m3d_traffic_free(struct M3dTraffic *traffic);

/**
 * Evaluates latency, energy and EDP of a design.
 *
 * # Safety
 * Handles must be live and `out` a valid pointer.
 */
enum M3dStatus m3d_evaluate(const struct M3dDesign *design,
                            const struct M3dTraffic *traffic,
                            const struct M3dParams *params,
                            struct M3dEval *out);

/**
 * Optimizes a design with the default search settings and `seed`. The
 * process-aware mode starts from the process-oblivious result. The returned
 * design must be released with `m3d_design_free`.
 *
 * # Safety
 * Handles must be live; `out_design` and `out_eval` must be valid pointers.
 */
enum M3dStatus m3d_optimize(const struct M3dDesign *design,
                            const struct M3dTraffic *traffic,
                            const struct M3dParams *params,
                            enum M3dMode mode,
                            uint64_t seed,
                            struct M3dDesign **out_design,
                            struct M3dEval *out_eval);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* M3D_NOC_H */
