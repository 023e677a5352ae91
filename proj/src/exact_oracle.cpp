#include "stratmod/exact_oracle.hpp"

#include "stratmod/core_model.hpp"
#include "stratmod/counter_rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace stratmod {

void OracleConfig::validate() const {
  if (angle_steps < 8) fail("angle_steps must be at least 8");
  if (offset_steps < 8) fail("offset_steps must be at least 8");
  if (k < 0) fail("K must be nonnegative");
  if (!(eps_slack > 0.0)) fail("eps_slack must be positive");
}

NoFeasibleCandidateError::NoFeasibleCandidateError(LinearModerator least_violating,
                                                   long violations)
    : Error(ErrorCode::NoFeasibleCandidate,
            "no candidate hyperplane meets the violation budget; least violating has " +
                std::to_string(violations)),
      least_violating_(std::move(least_violating)),
      violations_(violations) {}

namespace {

struct CandidateValue {
  double dm = 0.0;
  double penalty = 0.0;
  long violations = 0;
};

class CandidateSearch {
 public:
  CandidateSearch(const Population& pop, const OracleConfig& cfg)
      : pop_(pop), cfg_(cfg), ideal_(pop.ideal_points()) {
    if (pop.dim() != 2) fail("the exact oracle is planar; population has d = " +
                             std::to_string(pop.dim()));
    cfg.validate();
    inv2c_ = pop.costs().cwiseInverse() / 2.0;
  }

  CandidateValue evaluate(double w0, double w1, double b) const {
    const Matrix& x = pop_.features();
    const Vector& e = pop_.trend().e();
    const double we = w0 * e[0] + w1 * e[1];
    CandidateValue v;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double fx = w0 * x(0, i) + w1 * x(1, i) + b;
      const double a = we * inv2c_[i];
      const double fz = fx + a;
      if (!is_benign(fz)) {
        ++v.violations;
        v.penalty += fz * fz;
      }
      if (is_benign(fx) && fz >= cfg_.eps_slack) v.dm += a * a - fx * fx;
    }
    v.dm /= w0 * w0 + w1 * w1;
    return v;
  }

  // Calls visit(w0, w1, b) on every candidate in a fixed order.
  template <class Visit>
  void enumerate(Visit&& visit) const {
    const Matrix& x = pop_.features();
    const Eigen::Index n = x.cols();
    for (int k = 0; k < cfg_.angle_steps; ++k) {
      const double t = 2.0 * std::numbers::pi * (static_cast<double>(k) / cfg_.angle_steps);
      const double w0 = std::cos(t), w1 = std::sin(t);
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (Eigen::Index i = 0; i < n; ++i) {
        lo = std::min(lo, w0 * x(0, i) + w1 * x(1, i));
        hi = std::max(hi, w0 * ideal_(0, i) + w1 * ideal_(1, i));
      }
      for (int j = 0; j <= cfg_.offset_steps; ++j) {
        const double s = lo + (hi - lo) * (static_cast<double>(j) / cfg_.offset_steps);
        visit(w0, w1, -s);
      }
      if (!cfg_.use_candidates) continue;
      for (Eigen::Index i = 0; i < n; ++i) {
        visit(w0, w1, -(w0 * x(0, i) + w1 * x(1, i)));
        visit(w0, w1, -(w0 * ideal_(0, i) + w1 * ideal_(1, i)));
      }
    }
    if (!cfg_.use_candidates) return;

    Matrix pts(2, 2 * n);
    pts << x, ideal_;
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      for (Eigen::Index j = i + 1; j < pts.cols(); ++j) {
        const double d0 = pts(0, j) - pts(0, i), d1 = pts(1, j) - pts(1, i);
        const double len = std::hypot(d0, d1);
        if (len < 1e-12) continue;
        const double n0 = -d1 / len, n1 = d0 / len;
        visit(n0, n1, -(n0 * pts(0, i) + n1 * pts(1, i)));
        visit(-n0, -n1, n0 * pts(0, i) + n1 * pts(1, i));
      }
    }
  }

  SolveResult finish(double w0, double w1, double b, double objective, long evaluated) const {
    LinearModerator f(Vector{{w0, w1}}, b);
    const CandidateValue v = evaluate(w0, w1, b);
    return SolveResult{f, objective, v.dm, metrics(pop_, f), static_cast<int>(evaluated), true};
  }

 private:
  const Population& pop_;
  const OracleConfig& cfg_;
  Matrix ideal_;
  Vector inv2c_;
};

struct Best {
  double w0 = 0.0, w1 = 0.0, b = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  bool found = false;
};

}  // namespace

SolveResult oracle_2d(const Population& pop, const OracleConfig& cfg) {
  const CandidateSearch search(pop, cfg);
  Best best, least;
  long least_violations = std::numeric_limits<long>::max();
  long evaluated = 0;
  search.enumerate([&](double w0, double w1, double b) {
    ++evaluated;
    const CandidateValue v = search.evaluate(w0, w1, b);
    if (v.violations < least_violations) {
      least_violations = v.violations;
      least = {w0, w1, b, 0.0, true};
    }
    if (v.violations > cfg.k) return;
    if (!best.found || -v.dm < best.objective) best = {w0, w1, b, -v.dm, true};
  });
  if (!best.found)
    throw NoFeasibleCandidateError(LinearModerator(Vector{{least.w0, least.w1}}, least.b),
                                   least_violations);
  return search.finish(best.w0, best.w1, best.b, best.objective, evaluated);
}

SolveResult oracle_penalized_2d(const Population& pop, double lambda, const OracleConfig& cfg) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be nonnegative");
  const CandidateSearch search(pop, cfg);
  Best best;
  long evaluated = 0;
  search.enumerate([&](double w0, double w1, double b) {
    ++evaluated;
    const CandidateValue v = search.evaluate(w0, w1, b);
    const double objective = -v.dm + lambda * v.penalty;
    if (!best.found || objective < best.objective) best = {w0, w1, b, objective, true};
  });
  return search.finish(best.w0, best.w1, best.b, best.objective, evaluated);
}

std::vector<ToyPoint> toy_disk(std::span<const double> thetas, double c, long samples,
                               std::uint64_t seed) {
  if (!(c > 0.0)) fail("toy cost c must be positive");
  if (samples <= 0) fail("toy sample count must be positive");
  for (double t : thetas)
    if (!(t >= -1.0 && t <= 1.0)) fail("toy thetas must lie in [-1, 1]");

  CounterRng rng(seed, 0);
  std::vector<UserProfile> users;
  users.reserve(static_cast<std::size_t>(samples));
  for (long s = 0; s < samples; ++s) {
    const double r = std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    users.emplace_back(Vector{{r * std::cos(phi), r * std::sin(phi)}}, c);
  }
  const Trend trend(Vector{{1.0, 0.0}});

  std::vector<ToyPoint> out;
  out.reserve(thetas.size());
  for (double theta : thetas) {
    const Moderator f = LinearModerator(Vector{{1.0, 0.0}}, -theta);
    double dm = 0.0;
    long desired = 0;
    for (const auto& u : users) {
      dm += mitigation(u, trend, f);
      if (is_benign(f, ideal_point(u, trend))) ++desired;
    }
    out.push_back({theta, dm / static_cast<double>(samples),
                   static_cast<double>(desired) / static_cast<double>(samples)});
  }
  return out;
}

}  // namespace stratmod
