#pragma once

#include "stratmod/surrogate_solver.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace stratmod {

struct OracleConfig {
  int angle_steps = 720;
  int offset_steps = 200;
  long k = 0;
  double eps_slack = 1e-9;
  bool use_candidates = true;

  void validate() const;
};

/// Raised when no candidate meets the violation budget. Carries the candidate
/// with the fewest violations.
class NoFeasibleCandidateError : public Error {
 public:
  NoFeasibleCandidateError(LinearModerator least_violating, long violations);

  const LinearModerator& least_violating() const noexcept { return least_violating_; }
  long violations() const noexcept { return violations_; }

 private:
  LinearModerator least_violating_;
  long violations_;
};

/// Best mitigation over every candidate hyperplane in the plane whose ideal
/// point violation count is at most cfg.k.
///
/// Candidates are unit normals (cos t, sin t) on a uniform angle grid with
/// offsets on a uniform grid over [min w.x_i, max w.z'_i]. With
/// use_candidates, every grid direction also gets the offsets through each
/// x_i and z'_i, and every line through two of those points is added with
/// both orientations. Doubling either grid produces a superset. Ties go to
/// the earliest candidate.
SolveResult oracle_2d(const Population& pop, const OracleConfig& cfg);

/// Same candidate set; minimizes -DM + lambda * ||g||_2^2 with the exact
/// mitigation and hinge penalty.
SolveResult oracle_penalized_2d(const Population& pop, double lambda, const OracleConfig& cfg);

struct ToyPoint {
  double theta = 0.0;
  double dm = 0.0;   // mean mitigation per sample
  double fos = 0.0;  // fraction with a benign ideal point
};

/// Uniform samples in the unit disk with trend (1, 0) against the boundaries
/// x_1 = theta. All thetas share one sample set.
std::vector<ToyPoint> toy_disk(std::span<const double> thetas, double c, long samples,
                               std::uint64_t seed);

}  // namespace stratmod
