#ifndef CBF_SWARM_H
#define CBF_SWARM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CbfStatus {
  CBF_STATUS_OK = 0,
  CBF_STATUS_NULL_POINTER = 1,
  CBF_STATUS_INVALID_ARGUMENT = 2,
  CBF_STATUS_PARSE_ERROR = 3,
  CBF_STATUS_VALIDATION_ERROR = 4,
  CBF_STATUS_SINGULAR_PAIR = 5,
  CBF_STATUS_DEGENERATE_WEIGHT = 6,
  CBF_STATUS_DEGENERATE_CONSTRAINT = 7,
  CBF_STATUS_FATAL = 8,
  CBF_STATUS_IO_ERROR = 9,
  /**
   * The simulation has already run all of its steps.
   */
  CBF_STATUS_FINISHED = 10,
  CBF_STATUS_PANIC = 11,
} CbfStatus;

typedef enum CbfStrategy {
  CBF_STRATEGY_SYMMETRIC = 0,
  CBF_STRATEGY_PREVIOUS_ASYMMETRIC = 1,
  CBF_STRATEGY_PROPOSED_ASYMMETRIC = 2,
} CbfStrategy;

/**
 * Opaque simulation handle.
 */
typedef struct CbfSimulation CbfSimulation;

typedef struct CbfRobotState {
  double position[2];
  double velocity[2];
} CbfRobotState;

typedef struct CbfBarrierParams {
  double r_s;
  double gamma;
  double t_c;
} CbfBarrierParams;

/**
 * Half-plane `g . u + b >= 0`.
 */
typedef struct CbfConstraint {
  double g[2];
  double b;
} CbfConstraint;

/**
 * Result of a QP solve. `u` is the projection when `feasible` is true,
 * otherwise the least-violating point; `max_violation` is `0` when
 * feasible.
 */
typedef struct CbfQpResult {
  bool feasible;
  double u[2];
  double max_violation;
} CbfQpResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or null. The
 * pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *cbf_last_error_message(void);

/**
 * Braking input `-m (gamma + 1/T_c) v` of one robot.
 *
 * # Safety
 * All pointers must be valid or null.
 */
enum CbfStatus cbf_fallback_input(size_t dim,
                                  const struct CbfRobotState *me,
                                  const struct CbfBarrierParams *barrier,
                                  double mass,
                                  double (*out_u)[2]);

/**
 * Constraint robot `me` places on its own input because of `other`.
 *
 * # Safety
 * All pointers must be valid or null.
 */
enum CbfStatus cbf_build_constraint(enum CbfStrategy strategy,
                                    size_t dim,
                                    const struct CbfRobotState *me,
                                    const struct CbfRobotState *other,
                                    const struct CbfBarrierParams *barrier,
                                    double mass,
                                    struct CbfConstraint *out);

/**
 * Project `u_hat` onto `count` half-planes. A non-positive `tolerance`
 * selects the library default of `1e-6`.
 *
 * # Safety
 * `constraints` must point to `count` elements (it may be null when
 * `count` is 0); the other pointers must be valid or null.
 */
enum CbfStatus cbf_qp_solve(size_t dim,
                            const double (*u_hat)[2],
                            const struct CbfConstraint *constraints,
                            size_t count,
                            double tolerance,
                            struct CbfQpResult *out);

/**
 * Create a simulation from a JSON run configuration.
 *
 * # Safety
 * `config_json` must be a nul-terminated string; `out` must be valid.
 */
enum CbfStatus cbf_simulation_new(const char *config_json, struct CbfSimulation **out);

/**
 * Release a simulation. Null is ignored.
 *
 * # Safety
 * `sim` must come from [`cbf_simulation_new`] and not be used afterwards.
 */
void cbf_simulation_free(struct CbfSimulation *sim);

/**
 * Advance one control period.
 *
 * # Safety
 * `sim` must be a live handle or null.
 */
enum CbfStatus cbf_simulation_step(struct CbfSimulation *sim);

/**
 * Run every remaining step.
 *
 * # Safety
 * `sim` must be a live handle or null.
 */
enum CbfStatus cbf_simulation_run(struct CbfSimulation *sim);

/**
 * Number of robots, spatial dimension, configured steps and steps run.
 *
 * # Safety
 * `sim` must be a live handle or null; output pointers may be null.
 */
enum CbfStatus cbf_simulation_info(const struct CbfSimulation *sim,
                                   size_t *robots,
                                   size_t *dim,
                                   size_t *steps,
                                   size_t *steps_done);

/**
 * Current state of `robot`.
 *
 * # Safety
 * `sim` must be a live handle or null; `out` must be valid.
 */
enum CbfStatus cbf_simulation_robot_state(const struct CbfSimulation *sim,
                                          size_t robot,
                                          struct CbfRobotState *out);

/**
 * Summary over the steps run so far. `first_infeasible_time` is set to
 * NaN when every step was feasible.
 *
 * # Safety
 * `sim` must be a live handle or null; output pointers may be null.
 */
enum CbfStatus cbf_simulation_summary(const struct CbfSimulation *sim,
                                      size_t *no_solution_steps,
                                      double *first_infeasible_time,
                                      double *min_constraint_lhs,
                                      double *min_pair_distance);

/**
 * Write the trace CSV (and its scenario sidecar) of the steps run so far.
 *
 * # Safety
 * `sim` must be a live handle or null; `path` a nul-terminated string.
 */
enum CbfStatus cbf_simulation_export_trace(const struct CbfSimulation *sim, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CBF_SWARM_H */
