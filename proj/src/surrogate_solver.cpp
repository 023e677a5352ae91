#include "stratmod/surrogate_solver.hpp"

#include "stratmod/counter_rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace stratmod {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be nonnegative");
  if (!(learning_rate > 0.0)) fail("learning rate must be positive");
  if (max_iters <= 0) fail("max_iters must be positive");
  if (restarts <= 0) fail("restarts must be positive");
  if (!(tol_grad > 0.0)) fail("tol_grad must be positive");
  if (!(a_min > 0.0)) fail("a_min must be positive");
}

SurrogateTerm surrogate_term(double y, double a, const SolverConfig& cfg) {
  if (!(a > 0.0)) throw Error(ErrorCode::NonPositiveA, "surrogate needs a > 0");
  const double eps = cfg.epsilon;
  if (y < (1.0 - eps) * a) {
    const double s = 1.0 - eps * eps;
    const double num = s * s * a * a * a;
    const double den_da = -4.0 * (1.0 - eps) + 3.0 * (1.0 - eps) * (1.0 - eps);
    const double den = 2.0 * eps * y + a * den_da;
    const double den2 = den * den;
    return {num / den, -2.0 * eps * num / den2,
            (3.0 * s * s * a * a * den - num * den_da) / den2};
  }
  if (y <= a) return {y * y - 2.0 * a * y, 2.0 * y - 2.0 * a, -2.0 * y};
  const double over = y - a;
  return {cfg.lambda * over * over - a * a, 2.0 * cfg.lambda * over,
          -2.0 * cfg.lambda * over - 2.0 * a};
}

double surrogate_loss(double y, double a, const SolverConfig& cfg) {
  return surrogate_term(y, a, cfg).value;
}

namespace {

struct Evaluation {
  double objective = 0.0;
  Vector grad_w;
  double grad_b = 0.0;
};

// One pass over the population. The raw a enters y; the floored a enters the
// surrogate, and carries no derivative while the floor is active.
Evaluation evaluate(const Vector& w, double b, const Population& pop, const SolverConfig& cfg,
                    bool with_gradient) {
  const Vector& e = pop.trend().e();
  const double we = w.dot(e);
  const Vector fx = pop.features().transpose() * w;
  Evaluation out;
  Vector dy;
  if (with_gradient) dy.resize(pop.size());
  double trend_coeff = 0.0;
  for (Eigen::Index i = 0; i < pop.size(); ++i) {
    const double inv2c = 1.0 / (2.0 * pop.costs()[i]);
    const double a_raw = we * inv2c;
    const bool floored = a_raw <= cfg.a_min;
    const double a = floored ? cfg.a_min : a_raw;
    const double y = fx[i] + b + a_raw;
    const SurrogateTerm t = surrogate_term(y, a, cfg);
    out.objective += t.value;
    if (with_gradient) {
      dy[i] = t.d_y;
      out.grad_b += t.d_y;
      trend_coeff += (t.d_y + (floored ? 0.0 : t.d_a)) * inv2c;
    }
  }
  if (with_gradient) out.grad_w = pop.features() * dy + trend_coeff * e;
  return out;
}

void check_dim(const LinearModerator& f, const Population& pop) {
  if (f.w().size() != pop.dim()) fail("moderator and population dimensions differ");
}

struct RestartOutcome {
  Vector w;
  double b = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

std::pair<Vector, double> initial_moderator(const Population& pop, const SolverConfig& cfg,
                                            int restart) {
  const Vector& e = pop.trend().e();
  Vector v = e;
  if (restart > 0) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(restart));
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] += rng.normal(0.0, 0.3);
  }
  const double inf_norm = v.cwiseAbs().maxCoeff();
  if (inf_norm > 0.0) v /= inf_norm;
  else v = e / e.cwiseAbs().maxCoeff();

  std::vector<double> proj(static_cast<std::size_t>(pop.size()));
  const Vector s = pop.features().transpose() * v;
  std::copy(s.data(), s.data() + s.size(), proj.begin());
  const double q = (restart + 0.5) / cfg.restarts;
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(proj.size() - 1));
  std::nth_element(proj.begin(), proj.begin() + static_cast<std::ptrdiff_t>(idx), proj.end());
  return {v, -proj[idx]};
}

RestartOutcome run_restart(const Population& pop, const SolverConfig& cfg, int restart) {
  auto [w, b] = initial_moderator(pop, cfg, restart);
  const double inv_n = 1.0 / static_cast<double>(pop.size());
  const double eta = cfg.learning_rate;

  RestartOutcome out;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const Evaluation ev = evaluate(w, b, pop, cfg, true);
    const Vector gw = ev.grad_w * inv_n;
    const double gb = ev.grad_b * inv_n;
    const Vector stepped = (w - eta * gw).cwiseMax(-1.0).cwiseMin(1.0);
    const double pg_norm =
        std::sqrt(((w - stepped) / eta).squaredNorm() + gb * gb);
    if (!std::isfinite(pg_norm)) return out;
    if (pg_norm <= cfg.tol_grad) {
      out.converged = true;
      break;
    }
    w = stepped;
    b -= eta * gb;
  }
  out.iterations = it;
  if (w.cwiseAbs().maxCoeff() == 0.0 || !std::isfinite(b)) return out;
  out.objective = evaluate(w, b, pop, cfg, false).objective;
  out.w = std::move(w);
  out.b = b;
  return out;
}

}  // namespace

double surrogate_objective(const LinearModerator& f, const Population& pop,
                           const SolverConfig& cfg) {
  check_dim(f, pop);
  return evaluate(f.w(), f.b(), pop, cfg, false).objective;
}

SurrogateGradient surrogate_gradient(const LinearModerator& f, const Population& pop,
                                     const SolverConfig& cfg) {
  check_dim(f, pop);
  Evaluation ev = evaluate(f.w(), f.b(), pop, cfg, true);
  return {std::move(ev.grad_w), ev.grad_b};
}

std::vector<double> violation_vector(const Population& pop, const LinearModerator& f) {
  check_dim(f, pop);
  const Vector ideal_scores =
      (pop.ideal_points().transpose() * f.w()).array() + f.b();
  std::vector<double> g(static_cast<std::size_t>(pop.size()));
  for (Eigen::Index i = 0; i < pop.size(); ++i)
    g[static_cast<std::size_t>(i)] = is_benign(ideal_scores[i]) ? 0.0 : ideal_scores[i];
  return g;
}

long violation_count(std::span<const double> g) {
  return static_cast<long>(std::count_if(g.begin(), g.end(), [](double v) { return v > 0.0; }));
}

double violation_penalty(std::span<const double> g) {
  double s = 0.0;
  for (double v : g) s += v * v;
  return s;
}

SolveResult pgd_solve(const Population& pop, const SolverConfig& cfg) {
  cfg.validate();
  RestartOutcome best;
  for (int r = 0; r < cfg.restarts; ++r) {
    RestartOutcome o = run_restart(pop, cfg, r);
    if (o.w.size() == 0) continue;
    if (best.w.size() == 0 || o.objective < best.objective) best = std::move(o);
  }
  if (best.w.size() == 0)
    throw Error(ErrorCode::DegenerateSolution,
                "every restart collapsed to w = 0 or diverged; re-seed the solver");

  LinearModerator f(std::move(best.w), best.b);
  SolveResult res{f, best.objective, dm_closed_form_linear(pop, f), metrics(pop, f),
                  best.iterations, best.converged};
  return res;
}

double lambda_upper_bound(const Population& pop) {
  const double e2 = pop.trend().e().squaredNorm();
  double total = 0.0;
  for (Eigen::Index i = 0; i < pop.size(); ++i)
    total += e2 / (4.0 * pop.costs()[i] * pop.costs()[i]);
  return total + 1.0;
}

CalibrationResult calibrate_lambda(const Population& pop, const CalibrationTarget& target,
                                   const SolverConfig& cfg) {
  cfg.validate();
  if (target.k < 0) fail("K must be nonnegative");
  if (target.k > pop.size()) fail("K must not exceed the population size");
  if (!(target.delta > 0.0)) fail("delta must be positive");

  int solves = 0;
  auto solve_at = [&](double lambda) {
    SolverConfig c = cfg;
    c.lambda = lambda;
    c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(solves));
    ++solves;
    SolveResult r = pgd_solve(pop, c);
    const long v = violation_count(violation_vector(pop, r.moderator));
    return std::pair{std::move(r), v};
  };

  if (target.k == pop.size()) return {0.0, solve_at(0.0).first, solves, false};

  double hi = lambda_upper_bound(pop);
  auto [top, top_violations] = solve_at(hi);
  if (top_violations > target.k) return {hi, std::move(top), solves, true};

  double best_lambda = hi;
  SolveResult best = std::move(top);
  double lo = 0.0;
  while (hi - lo > target.delta) {
    const double mid = 0.5 * (lo + hi);
    auto [r, v] = solve_at(mid);
    if (v > target.k) {
      lo = mid;
    } else {
      hi = mid;
      best_lambda = mid;
      best = std::move(r);
    }
  }
  return {best_lambda, std::move(best), solves, false};
}

TradeoffPoint to_tradeoff_point(const SolveResult& r, double lambda, std::uint64_t seed) {
  return {lambda,
          seed,
          r.dm,
          r.metrics.fos_desired,
          r.metrics.fos_retained,
          r.metrics.filtered_count,
          r.objective,
          r.iterations_used,
          r.converged};
}

std::vector<TradeoffPoint> sweep_lambda(const Population& pop, std::span<const double> lambdas,
                                        const SolverConfig& cfg) {
  if (lambdas.empty()) fail("lambda sweep needs at least one value");
  for (double l : lambdas)
    if (!(l >= 0.0)) fail("sweep lambdas must be nonnegative");
  std::vector<TradeoffPoint> points;
  points.reserve(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    SolverConfig c = cfg;
    c.lambda = lambdas[j];
    c.seed = cfg.seed + j;
    points.push_back(to_tradeoff_point(pgd_solve(pop, c), c.lambda, c.seed));
  }
  return points;
}

std::pair<double, double> generalization_gap(const Population& train, const Population& test,
                                             const LinearModerator& f) {
  if (train.dim() != test.dim()) fail("train and test dimensions differ");
  if (train.trend().e() != test.trend().e()) fail("train and test trends differ");
  const double dm_train = dm_closed_form_linear(train, f) / static_cast<double>(train.size());
  const double dm_test = dm_closed_form_linear(test, f) / static_cast<double>(test.size());
  const double fos_train = metrics(train, f).fos_desired;
  const double fos_test = metrics(test, f).fos_desired;
  return {std::abs(dm_train - dm_test), std::abs(fos_train - fos_test)};
}

}  // namespace stratmod
