#ifndef CIRCULAB_H
#define CIRCULAB_H

/* Generated by cbindgen from circulab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum ClbStatus {
  CLB_OK = 0,
  // A documented precondition was violated.
  CLB_ERR_CONTRACT = 1,
  // An iterative numeric kernel failed to converge.
  CLB_ERR_NUMERIC = 2,
  CLB_ERR_CONFIG = 3,
  CLB_ERR_IO = 4,
  // A required pointer argument was null.
  CLB_ERR_NULL_ARG = 5,
  // An enum argument was out of range.
  CLB_ERR_BAD_ENUM = 6,
} ClbStatus;

// Adversary policies for the drift walk.
typedef enum ClbWalkPolicy {
  CLB_WALK_ALWAYS_UP = 0,
  CLB_WALK_RANDOM = 1,
  CLB_WALK_STAY = 2,
} ClbWalkPolicy;

// Entry distributions for the sparse ensemble.
typedef enum ClbXi {
  CLB_XI_COMPLEX_GAUSSIAN = 0,
  CLB_XI_RADEMACHER = 1,
  CLB_XI_UNIT_CIRCLE = 2,
  CLB_XI_BERNOULLI_SCALED = 3,
} ClbXi;

// Opaque handle over one sampled sparse matrix.
typedef struct ClbSample ClbSample;

// Scalar summary of the potentials of one sampled instance.
typedef struct ClbPotential {
  double u_n;
  double t_n;
  double t1;
  double t2;
  double u_circ;
  // Nonzero when any potential hit a zero singular value.
  int32_t inf_flag;
  size_t minor_size;
  size_t top_index;
} ClbPotential;

// Scalar summary of one incremental process run.
typedef struct ClbProcessSummary {
  size_t r_final;
  // Twice the final height; zero means the walk grounded.
  uint64_t h_final_twice;
  size_t accepted;
  size_t rejected;
  double acceptance_rate;
  double finite_candidate_rate;
  double u_n;
  double t_n_initial;
  // NaN when the walk did not ground.
  double chain_slack;
  int32_t chain_holds;
  int32_t grounded;
} ClbProcessSummary;

// One certificate event verdict.
typedef struct ClbEventCheck {
  // 0 unique-expansion, 1 row-sums, 2 entry-sizes, 3 heavy-rows,
  // 4 intersection, 5 over-achievement-cap.
  int32_t event_kind;
  int32_t verdict;
  int32_t vacuous;
  size_t witness;
  size_t trials;
} ClbEventCheck;

// Empirical spectral-law summary at one (instance, z).
typedef struct ClbLawPoint {
  double disk_mass;
  double discrepancy;
  double t1_dev;
  double t2_dev;
  int32_t hs_bound_ok;
} ClbLawPoint;

// Drift-walk Monte Carlo summary.
typedef struct ClbWalk {
  double p_grounded;
  double mean_z_final;
  double se_z_final;
  double max_mean_z;
} ClbWalk;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message for this thread into `buf` (NUL-terminated,
// truncated to `cap` bytes including the terminator) and returns the full
// message length.  With a null or empty buffer, only the length is returned.
//
// # Safety
//
// `buf` must be null or valid for writes of `cap` bytes.
size_t clb_last_error(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *clb_version(void);

// Samples an `n_rows` x `n_cols` sparse matrix with entry density `p` and
// entry law `xi`, reproducibly from `seed`, and stores a handle in `out`.
//
// # Safety
//
// `out` must be valid for one pointer write.  The handle must be released
// with [`clb_sample_free`].
enum ClbStatus clb_sample_new(size_t n_rows,
                              size_t n_cols,
                              double p,
                              enum ClbXi xi,
                              uint64_t seed,
                              struct ClbSample **out);

// Releases a handle created by [`clb_sample_new`].  Null is a no-op.
//
// # Safety
//
// `s` must be null or a handle from [`clb_sample_new`] not yet freed.
void clb_sample_free(struct ClbSample *s);

// Writes the number of stored nonzero entries of `s` to `out`.
//
// # Safety
//
// `s` must be a live handle; `out` must be valid for one write.
enum ClbStatus clb_sample_nnz(const struct ClbSample *s, size_t *out);

// Samples an n x n instance at mean degree `d` and evaluates the full and
// truncated log potentials at z.
//
// # Safety
//
// `out` must be valid for one [`ClbPotential`] write.
enum ClbStatus clb_potential(size_t n,
                             double d,
                             double eps,
                             double z_re,
                             double z_im,
                             enum ClbXi xi,
                             uint64_t seed,
                             struct ClbPotential *out);

// Runs the incremental singular-value process on the top-left n x n block
// of `s` with the two-regime acceptance schedule at `c_sched`, and writes
// the run summary with the chain-inequality replay to `out`.
//
// # Safety
//
// `s` must be a live handle; `out` must be valid for one write.
enum ClbStatus clb_process_run(const struct ClbSample *s,
                               size_t n,
                               double eps,
                               double z_re,
                               double z_im,
                               double c_sched,
                               struct ClbProcessSummary *out);

// Checks the quasi-randomness certificate events on `s` at time
// `t_twice`/2 with threshold `beta`, writing up to `cap` event verdicts to
// `out` and the count written to `written`.  Six slots always suffice.
//
// # Safety
//
// `s` must be a live handle; `out` must be valid for `cap` writes;
// `written` must be valid for one write.
enum ClbStatus clb_certificates(const struct ClbSample *s,
                                uint64_t t_twice,
                                double beta,
                                uint64_t seed,
                                struct ClbEventCheck *out,
                                size_t cap,
                                size_t *written);

// Samples an instance and summarizes its empirical spectral law against
// the uniform disk on a `grid_cells` x `grid_cells` rectangle grid of
// half-width `grid_limit`.
//
// # Safety
//
// `out` must be valid for one write.
enum ClbStatus clb_law_point(size_t n,
                             double d,
                             double eps,
                             double z_re,
                             double z_im,
                             enum ClbXi xi,
                             uint64_t seed,
                             size_t grid_cells,
                             double grid_limit,
                             struct ClbLawPoint *out);

// Monte Carlo over the half-integer drift walk: `trials` runs of `steps`
// steps at adversary-move probability `q`, starting height `y0_twice`/2.
//
// # Safety
//
// `out` must be valid for one write.
enum ClbStatus clb_drift_walk(size_t steps,
                              double q,
                              uint64_t y0_twice,
                              enum ClbWalkPolicy policy,
                              size_t trials,
                              uint64_t seed,
                              size_t threshold_div,
                              struct ClbWalk *out);

// The circular law's log potential at z.
double clb_u_circ(double z_re, double z_im);

// Runs the library's full deterministic check battery and writes the
// number of failing checks to `failures` (zero on a healthy build).
//
// # Safety
//
// `failures` must be valid for one write.
enum ClbStatus clb_selftest(size_t *failures);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CIRCULAB_H */
