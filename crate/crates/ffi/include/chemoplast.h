#ifndef CHEMOPLAST_H
#define CHEMOPLAST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ChemoplastStatus {
  CHEMOPLAST_STATUS_OK = 0,
  CHEMOPLAST_STATUS_NULL_POINTER = 1,
  CHEMOPLAST_STATUS_INVALID_ARGUMENT = 2,
  CHEMOPLAST_STATUS_CONFIG = 3,
  CHEMOPLAST_STATUS_SIMULATION = 4,
  CHEMOPLAST_STATUS_IO = 5,
  CHEMOPLAST_STATUS_OUT_OF_RANGE = 6,
  CHEMOPLAST_STATUS_PANIC = 7,
} ChemoplastStatus;

/**
 * Opaque result of a completed run.
 */
typedef struct ChemoplastRun ChemoplastRun;

/**
 * Opaque scenario configuration.
 */
typedef struct ChemoplastScenario ChemoplastScenario;

typedef struct ChemoplastSummary {
  size_t accepted_steps;
  size_t rejected_steps;
  size_t newton_iterations;
  double final_soc;
  double max_soc_drift;
  double max_eps_pl;
  /**
   * True when the surface filled up before the end of the protocol.
   */
  bool saturated;
  double wall_seconds;
} ChemoplastSummary;

typedef struct ChemoplastStepRecord {
  double t;
  double tau;
  size_t order;
  size_t newton_iters;
  double soc;
  double c_surf;
  double sigma_phi_surf;
  double eps_pl_surf;
  double voltage;
} ChemoplastStepRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *chemoplast_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *chemoplast_version(void);

/**
 * New scenario with default settings. Free with [`chemoplast_scenario_free`].
 */
struct ChemoplastScenario *chemoplast_scenario_new(void);

/**
 * Reads a key = value configuration file into a new scenario.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ChemoplastStatus chemoplast_scenario_load(const char *path, struct ChemoplastScenario **out);

/**
 * Sets one configuration key, using the same names and units as the
 * configuration file. The scenario is unchanged on failure.
 *
 * # Safety
 * `scenario` must come from this library; `key` and `value` must be
 * NUL-terminated strings.
 */
enum ChemoplastStatus chemoplast_scenario_set(struct ChemoplastScenario *scenario,
                                              const char *key,
                                              const char *value);

/**
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void chemoplast_scenario_free(struct ChemoplastScenario *scenario);

/**
 * Runs the scenario. With `write_artifacts` the CSV files and summary go
 * to the configured output directory. Free the result with
 * [`chemoplast_run_free`].
 *
 * # Safety
 * `scenario` must come from this library and `out` be a valid pointer.
 */
enum ChemoplastStatus chemoplast_run(const struct ChemoplastScenario *scenario,
                                     bool write_artifacts,
                                     struct ChemoplastRun **out);

/**
 * # Safety
 * `run` must come from this library and not be used afterwards.
 */
void chemoplast_run_free(struct ChemoplastRun *run);

/**
 * # Safety
 * `run` must come from this library and `out` be a valid pointer.
 */
enum ChemoplastStatus chemoplast_run_summary(const struct ChemoplastRun *run,
                                             struct ChemoplastSummary *out);

/**
 * Number of trace records, including the initial state. Zero for NULL.
 *
 * # Safety
 * `run` must be NULL or come from this library.
 */
size_t chemoplast_run_trace_len(const struct ChemoplastRun *run);

/**
 * Copies trace record `index` into `out`.
 *
 * # Safety
 * `run` must come from this library and `out` be a valid pointer.
 */
enum ChemoplastStatus chemoplast_run_trace(const struct ChemoplastRun *run,
                                           size_t index,
                                           struct ChemoplastStepRecord *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHEMOPLAST_H */
