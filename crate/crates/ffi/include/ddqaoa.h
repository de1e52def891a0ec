#ifndef DDQAOA_H
#define DDQAOA_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DdqStatus {
  DDQ_STATUS_OK = 0,
  DDQ_STATUS_NULL_POINTER = 1,
  DDQ_STATUS_INVALID_ARGUMENT = 2,
  DDQ_STATUS_NO_FEASIBLE_INSTANCE = 3,
  DDQ_STATUS_IO = 4,
  DDQ_STATUS_PARSE = 5,
  DDQ_STATUS_RUNTIME = 6,
  DDQ_STATUS_PANIC = 7,
} DdqStatus;

// A CSPP instance.
typedef struct DdqInstance DdqInstance;

// An instance compiled to an Ising Hamiltonian with its full spectrum.
typedef struct DdqProblem DdqProblem;

// The result of one optimization run.
typedef struct DdqRun DdqRun;

// Optimizer settings. Obtain defaults from [`ddq_config_default`].
typedef struct DdqConfig {
  size_t p0;
  size_t p_max;
  double epsilon;
  double sigma;
  size_t patience_k;
  size_t n_opt_max;
  double init_gamma;
  double init_beta;
  double init_jitter;
  double learning_rate;
  double beta1;
  double beta2;
  double adam_epsilon;
} DdqConfig;

// Cheapest feasible path found by exhaustive search.
typedef struct DdqPathSummary {
  bool found;
  double cost;
  double resource;
  size_t num_edges;
} DdqPathSummary;

// One optimizer step of a run.
typedef struct DdqStep {
  size_t step;
  size_t depth;
  double energy;
  double success_prob;
} DdqStep;

// Scores of a run's best angles.
typedef struct DdqMetrics {
  double expectation;
  // `expectation / e_min`; NaN when `e_min` is zero.
  double raw_ratio;
  double norm_ratio;
  double success_prob;
  uint64_t cnots_per_layer;
  uint64_t cumulative_cnots;
  size_t final_depth;
} DdqMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ddq_version(void);

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *ddq_last_error_message(void);

// Default optimizer settings.
//
// # Safety
// `out` must be null or valid for writes.
enum DdqStatus ddq_config_default(struct DdqConfig *out);

// Generates a random instance with the default generator settings. With
// `require_sound`, candidates whose compiled ground states miss the optimum
// are redrawn.
//
// # Safety
// `out` must be null or valid for writes.
enum DdqStatus ddq_instance_generate(uint64_t seed,
                                     size_t num_edges,
                                     bool require_sound,
                                     struct DdqInstance **out);

// Parses an instance from its JSON form.
//
// # Safety
// `json` must be null or a NUL-terminated string; `out` null or writable.
enum DdqStatus ddq_instance_from_json(const char *json, struct DdqInstance **out);

// Serializes an instance. Release the string with [`ddq_string_free`].
//
// # Safety
// `instance` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_instance_to_json(const struct DdqInstance *instance, char **out);

// # Safety
// `instance` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_instance_num_edges(const struct DdqInstance *instance, size_t *out);

// # Safety
// `instance` must be null or a handle not yet freed.
void ddq_instance_free(struct DdqInstance *instance);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void ddq_string_free(char *s);

// Exact optimum by path enumeration. `found` is false when no feasible
// path exists.
//
// # Safety
// `instance` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_solve_exact(const struct DdqInstance *instance, struct DdqPathSummary *out);

// Compiles an instance with the default penalties.
//
// # Safety
// `instance` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_problem_compile(const struct DdqInstance *instance, struct DdqProblem **out);

// # Safety
// `problem` must be null or a handle not yet freed.
void ddq_problem_free(struct DdqProblem *problem);

// # Safety
// `problem` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_problem_num_qubits(const struct DdqProblem *problem, size_t *out);

// Smallest and largest energies of the compiled Hamiltonian.
//
// # Safety
// `problem` must be null or a live handle; outputs null or writable.
enum DdqStatus ddq_problem_energy_range(const struct DdqProblem *problem,
                                        double *e_min,
                                        double *e_max);

// Energy of computational basis state `index` (bit `i` is qubit `i`).
//
// # Safety
// `problem` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_problem_energy(const struct DdqProblem *problem, uint64_t index, double *out);

// # Safety
// `problem` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_problem_cnots_per_layer(const struct DdqProblem *problem, uint64_t *out);

// Dynamic-depth optimization.
//
// # Safety
// `problem` and `config` must be null or valid; `out` null or writable.
enum DdqStatus ddq_run_ddqaoa(const struct DdqProblem *problem,
                              const struct DdqConfig *config,
                              uint64_t seed,
                              struct DdqRun **out);

// Fixed-depth optimization at depth `p` for the configured step budget.
//
// # Safety
// `problem` and `config` must be null or valid; `out` null or writable.
enum DdqStatus ddq_run_fixed(const struct DdqProblem *problem,
                             size_t p,
                             const struct DdqConfig *config,
                             uint64_t seed,
                             struct DdqRun **out);

// # Safety
// `run` must be null or a handle not yet freed.
void ddq_run_free(struct DdqRun *run);

// # Safety
// `run` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_run_best_energy(const struct DdqRun *run, double *out);

// # Safety
// `run` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_run_final_depth(const struct DdqRun *run, size_t *out);

// Number of recorded optimizer steps.
//
// # Safety
// `run` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_run_num_steps(const struct DdqRun *run, size_t *out);

// Step `index` (0-based) of the trace.
//
// # Safety
// `run` must be null or a live handle; `out` null or writable.
enum DdqStatus ddq_run_step(const struct DdqRun *run, size_t index, struct DdqStep *out);

// Copies the best angles into `gammas` and `betas`, each of `capacity`
// entries, and stores the depth in `depth`. Fails with
// `DDQ_STATUS_INVALID_ARGUMENT` when `capacity` is too small; `depth` is
// still written so the caller can retry.
//
// # Safety
// `gammas` and `betas` must be valid for `capacity` writes; `depth` writable.
enum DdqStatus ddq_run_best_params(const struct DdqRun *run,
                                   double *gammas,
                                   double *betas,
                                   size_t capacity,
                                   size_t *depth);

// Scores a run of `problem`.
//
// # Safety
// `problem` and `run` must be null or live handles; `out` null or writable.
enum DdqStatus ddq_run_metrics(const struct DdqProblem *problem,
                               const struct DdqRun *run,
                               struct DdqMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DDQAOA_H */
