/*
 * stratmod C API.
 *
 * Strategic best responses to content moderators, distortion and
 * free-speech metrics, a smoothed penalized solver for linear moderators,
 * and brute-force planar oracles.
 *
 * Conventions:
 *   - Every fallible call returns smod_status; SMOD_OK is 0. On failure
 *     smod_last_error() returns a message for the calling thread.
 *   - Point sets are row-major: user i's features start at features[i * d].
 *   - Output buffers are caller-allocated; sizes are stated per function.
 *   - Handles are immutable after creation and may be shared across threads.
 */
#ifndef STRATMOD_H
#define STRATMOD_H

#include <stddef.h>
#include <stdint.h>

#if defined(STRATMOD_BUILDING)
#define STRATMOD_API __attribute__((visibility("default")))
#else
#define STRATMOD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smod_status {
  SMOD_OK = 0,
  SMOD_ERR_INVALID_ARGUMENT = 1,
  SMOD_ERR_EMPTY_BENIGN_REGION = 2,
  SMOD_ERR_NON_POSITIVE_A = 3,
  SMOD_ERR_DEGENERATE_SOLUTION = 4,
  SMOD_ERR_INFEASIBLE = 5,
  SMOD_ERR_NO_FEASIBLE_CANDIDATE = 6,
  SMOD_ERR_PARSE = 7,
  SMOD_ERR_IO = 8,
  SMOD_ERR_INTERNAL = 99
} smod_status;

STRATMOD_API const char* smod_version(void);
STRATMOD_API const char* smod_status_name(smod_status status);
/* Message of the last failed call on this thread; "" if none. */
STRATMOD_API const char* smod_last_error(void);

/* ---- populations ---------------------------------------------------- */

typedef struct smod_population smod_population;

typedef struct smod_mixture_spec {
  int d;
  long n;
  int k; /* must divide n */
  double sigma_lo, sigma_hi;
  double c_lo, c_hi;
  uint64_t seed;
} smod_mixture_spec;

/* d=5, n=500, k=5, sigma in [0.3, 0.5], c in [0.5, 1.5], seed 0. */
STRATMOD_API void smod_mixture_spec_default(smod_mixture_spec* spec);

STRATMOD_API smod_status smod_population_create(const double* features, const double* costs,
                                                const double* trend, size_t n, size_t d,
                                                smod_population** out);
STRATMOD_API smod_status smod_population_generate(const smod_mixture_spec* spec,
                                                  smod_population** out);
STRATMOD_API smod_status smod_population_load(const char* path, smod_population** out);
/* extra_metadata: NULL or newline-separated key=value lines written as
 * `# key=value` after the d/n/trend block. */
STRATMOD_API smod_status smod_population_save(const smod_population* pop, const char* path,
                                              const char* extra_metadata);
STRATMOD_API void smod_population_free(smod_population* pop);

STRATMOD_API size_t smod_population_size(const smod_population* pop);
STRATMOD_API size_t smod_population_dim(const smod_population* pop);
/* x_out: d entries. */
STRATMOD_API smod_status smod_population_user(const smod_population* pop, size_t i,
                                              double* x_out, double* c_out);
/* e_out: d entries. */
STRATMOD_API smod_status smod_population_trend(const smod_population* pop, double* e_out);

/* ---- moderators and best responses ---------------------------------- */

typedef enum smod_moderator_kind {
  SMOD_MODERATOR_TRIVIAL = 0, /* marks everything benign */
  SMOD_MODERATOR_LINEAR = 1,  /* w.x + b <= 0 is benign; m must be 1 */
  SMOD_MODERATOR_POLYTOPE = 2 /* every w_j.x + b_j <= 0; 1 <= m <= 12 */
} smod_moderator_kind;

/* Borrowed view; w holds m * d values row-major, b holds m values. */
typedef struct smod_moderator {
  smod_moderator_kind kind;
  size_t d;
  size_t m;
  const double* w;
  const double* b;
} smod_moderator;

typedef enum smod_response_case {
  SMOD_UNCONSTRAINED = 0,
  SMOD_PROJECTED = 1,
  SMOD_STAY_FILTERED = 2,
  SMOD_CROSS_TO_BOUNDARY = 3
} smod_response_case;

typedef struct smod_best_response {
  smod_response_case case_tag;
  int filtered;
  double utility;
} smod_best_response;

/* z_out: d entries. */
STRATMOD_API smod_status smod_ideal_point(const double* x, double c, const double* e, size_t d,
                                          double* z_out);
STRATMOD_API smod_status smod_utility(const double* z, const double* x, double c, const double* e,
                                      size_t d, const smod_moderator* f, double* out);
/* Nearest benign point of f (hyperplane or polytope projection). */
STRATMOD_API smod_status smod_project(const double* z, size_t d, const smod_moderator* f,
                                      double* z_out);
STRATMOD_API smod_status smod_best_response_of(const double* x, double c, const double* e,
                                               size_t d, const smod_moderator* f, double* z_out,
                                               smod_best_response* info);

/* ---- metrics -------------------------------------------------------- */

typedef struct smod_metric_report {
  double dm;
  double fos_desired;
  double fos_retained;
  long filtered_count;
  long n;
} smod_metric_report;

STRATMOD_API smod_status smod_distortion(const double* x, double c, const double* e, size_t d,
                                         const smod_moderator* f, double* out);
STRATMOD_API smod_status smod_mitigation(const double* x, double c, const double* e, size_t d,
                                         const smod_moderator* f, double* out);
STRATMOD_API smod_status smod_metrics(const smod_population* pop, const smod_moderator* f,
                                      smod_metric_report* out);
STRATMOD_API smod_status smod_dm_population(const smod_population* pop, const smod_moderator* f,
                                            double* out);
STRATMOD_API smod_status smod_dm_closed_form(const smod_population* pop, const double* w, double b,
                                             double* out);
/* g_out: n entries (may be NULL); count_out / penalty_out may be NULL. */
STRATMOD_API smod_status smod_violation_vector(const smod_population* pop, const double* w,
                                               double b, double* g_out, long* count_out,
                                               double* penalty_out);

/* ---- surrogate solver ----------------------------------------------- */

typedef struct smod_solver_config {
  double epsilon;
  double lambda;
  double learning_rate;
  int max_iters;
  int restarts;
  uint64_t seed;
  double tol_grad;
  double a_min;
} smod_solver_config;

/* epsilon 0.9, lambda 1, lr 0.1, 2000 iterations, 4 restarts, seed 0,
 * tol_grad 1e-8, a_min 1e-6. */
STRATMOD_API void smod_solver_config_default(smod_solver_config* cfg);

typedef struct smod_solve_result {
  double b;
  double objective;
  double dm;
  double penalty;  /* ||g||_2^2 of the returned moderator */
  long violations; /* ||g||_0 */
  smod_metric_report metrics;
  int iterations_used;
  int converged;
} smod_solve_result;

STRATMOD_API smod_status smod_surrogate_loss(double y, double a, const smod_solver_config* cfg,
                                             double* value, double* d_y, double* d_a);
/* grad_w_out: d entries. Any output may be NULL. */
STRATMOD_API smod_status smod_surrogate_gradient(const smod_population* pop, const double* w,
                                                 double b, const smod_solver_config* cfg,
                                                 double* grad_w_out, double* grad_b_out,
                                                 double* objective_out);
/* w_out: d entries. */
STRATMOD_API smod_status smod_pgd_solve(const smod_population* pop, const smod_solver_config* cfg,
                                        double* w_out, smod_solve_result* out);

typedef struct smod_calibration {
  double lambda;
  double lambda_max;
  int solves;
  int infeasible;
} smod_calibration;

/* Returns SMOD_ERR_INFEASIBLE with every output filled (the lambda_max
 * solution) when even lambda_max violates the budget. */
STRATMOD_API smod_status smod_calibrate_lambda(const smod_population* pop, long k, double delta,
                                               const smod_solver_config* cfg, double* w_out,
                                               smod_solve_result* out, smod_calibration* info);

typedef struct smod_tradeoff_point {
  double lambda;
  uint64_t seed;
  double dm;
  double fos_desired;
  double fos_retained;
  long filtered_count;
  double objective;
  int iterations;
  int converged;
} smod_tradeoff_point;

/* out: count entries. */
STRATMOD_API smod_status smod_sweep_lambda(const smod_population* pop, const double* lambdas,
                                           size_t count, const smod_solver_config* cfg,
                                           smod_tradeoff_point* out);
STRATMOD_API smod_status smod_generalization_gap(const smod_population* train,
                                                 const smod_population* test, const double* w,
                                                 double b, double* dm_gap, double* fos_gap);

/* ---- exact oracles -------------------------------------------------- */

typedef struct smod_oracle_config {
  int angle_steps;
  int offset_steps;
  long k;
  double eps_slack;
  int use_candidates;
} smod_oracle_config;

/* 720 angles, 200 offset steps, K 0, eps_slack 1e-9, candidates on. */
STRATMOD_API void smod_oracle_config_default(smod_oracle_config* cfg);

/* Planar populations only; w_out: 2 entries. On SMOD_ERR_NO_FEASIBLE_CANDIDATE,
 * w_out/out->b describe the least violating candidate and out->violations
 * its violation count. */
STRATMOD_API smod_status smod_oracle_2d(const smod_population* pop, const smod_oracle_config* cfg,
                                        double* w_out, smod_solve_result* out);
STRATMOD_API smod_status smod_oracle_penalized_2d(const smod_population* pop, double lambda,
                                                  const smod_oracle_config* cfg, double* w_out,
                                                  smod_solve_result* out);

typedef struct smod_toy_point {
  double theta;
  double dm;
  double fos;
} smod_toy_point;

/* out: count entries. */
STRATMOD_API smod_status smod_toy_disk(const double* thetas, size_t count, double c, long samples,
                                       uint64_t seed, smod_toy_point* out);

#ifdef __cplusplus
}
#endif

#endif /* STRATMOD_H */
