#pragma once

#include "stratmod/distortion_metrics.hpp"
#include "stratmod/types.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace stratmod {

struct SolverConfig {
  double epsilon = 0.9;  // spline smoothing parameter, in (0, 1)
  double lambda = 1.0;   // freedom-of-speech penalty strength
  double learning_rate = 0.1;
  int max_iters = 2000;
  int restarts = 4;
  std::uint64_t seed = 0;
  double tol_grad = 1e-8;  // stop once the projected-gradient norm drops below
  double a_min = 1e-6;     // floor for a = w.e / (2c) inside the surrogate

  void validate() const;
};

/// Bounds the number of users whose ideal point may be filtered.
struct CalibrationTarget {
  long k = 0;
  double delta = 1e-3;
};

struct SolveResult {
  LinearModerator moderator;
  double objective = 0.0;  // summed surrogate loss
  double dm = 0.0;
  MetricReport metrics;
  int iterations_used = 0;
  bool converged = false;
};

struct TradeoffPoint {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double dm = 0.0;
  double fos_desired = 0.0;
  double fos_retained = 0.0;
  long filtered_count = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Value and partial derivatives of the single-user surrogate.
struct SurrogateTerm {
  double value;
  double d_y;
  double d_a;
};

/// Smoothed per-user social-good loss in y = w.x + b + a with a = w.e/(2c):
///
///   (1-eps^2)^2 a^3 / (2 eps y - 4a(1-eps) + 3a(1-eps)^2)   y < (1-eps) a
///   y^2 - 2 a y                                           (1-eps) a <= y <= a
///   lambda (y - a)^2 - a^2                                y > a
///
/// C^1 in y, minimized at y = a with value -a^2, and -> 0 as y -> -inf.
/// Throws NonPositiveA when a <= 0.
double surrogate_loss(double y, double a, const SolverConfig& cfg);
SurrogateTerm surrogate_term(double y, double a, const SolverConfig& cfg);

struct SurrogateGradient {
  Vector w;
  double b = 0.0;
};

/// Summed surrogate over the population, with a floored at cfg.a_min.
double surrogate_objective(const LinearModerator& f, const Population& pop,
                           const SolverConfig& cfg);

/// Exact gradient of surrogate_objective over (w, b). Both y and a depend on
/// w; only y depends on b.
SurrogateGradient surrogate_gradient(const LinearModerator& f, const Population& pop,
                                     const SolverConfig& cfg);

/// Per-user hinge [w.(x_i + e/(2c_i)) + b]_+. Nonzero entries count the
/// violations; the squared norm is the l2 penalty.
std::vector<double> violation_vector(const Population& pop, const LinearModerator& f);
long violation_count(std::span<const double> g);
double violation_penalty(std::span<const double> g);

/// Projected gradient descent on the mean surrogate under |w_j| <= 1, keeping
/// the restart with the lowest objective. Throws DegenerateSolution when every
/// restart collapses to w = 0.
SolveResult pgd_solve(const Population& pop, const SolverConfig& cfg);

struct CalibrationResult {
  double lambda = 0.0;
  SolveResult result;
  int solves = 0;
  bool infeasible = false;
};

/// Smallest lambda found by bisection on [0, lambda_max] whose solution keeps
/// the violation count at or below target.k. When even lambda_max fails, the
/// lambda_max solution is returned with infeasible set.
CalibrationResult calibrate_lambda(const Population& pop, const CalibrationTarget& target,
                                   const SolverConfig& cfg);

/// sum_i ||e||^2 / (4 c_i^2) + 1, an upper bound on achievable mitigation.
double lambda_upper_bound(const Population& pop);

/// One independent solve per lambda; the solver seed is offset by the index.
std::vector<TradeoffPoint> sweep_lambda(const Population& pop, std::span<const double> lambdas,
                                        const SolverConfig& cfg);

TradeoffPoint to_tradeoff_point(const SolveResult& r, double lambda, std::uint64_t seed);

/// Per-user mitigation and desired-FoS differences between two samples.
std::pair<double, double> generalization_gap(const Population& train, const Population& test,
                                             const LinearModerator& f);

}  // namespace stratmod
