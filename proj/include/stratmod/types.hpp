#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace stratmod {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tolerance under which a moderator score still counts as benign. Projections
/// land on the boundary up to rounding and must be accepted.
inline constexpr double kBenignSlack = 1e-12;

enum class ErrorCode {
  InvalidArgument = 1,
  EmptyBenignRegion,
  NonPositiveA,
  DegenerateSolution,
  Infeasible,
  NoFeasibleCandidate,
  Parse,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

/// One content creator: original content x and quadratic manipulation cost c.
class UserProfile {
 public:
  UserProfile(Vector x, double c);

  const Vector& x() const noexcept { return x_; }
  double c() const noexcept { return c_; }
  Eigen::Index dim() const noexcept { return x_.size(); }

 private:
  Vector x_;
  double c_;
};

/// Shared trend direction e; must be nonzero.
class Trend {
 public:
  explicit Trend(Vector e);

  const Vector& e() const noexcept { return e_; }
  Eigen::Index dim() const noexcept { return e_.size(); }

 private:
  Vector e_;
};

/// Users stored column-wise: features() is d x n, costs() has n entries.
class Population {
 public:
  Population(Matrix features, Vector costs, Trend trend);
  Population(const std::vector<UserProfile>& users, Trend trend);

  Eigen::Index size() const noexcept { return features_.cols(); }
  Eigen::Index dim() const noexcept { return features_.rows(); }
  const Matrix& features() const noexcept { return features_; }
  const Vector& costs() const noexcept { return costs_; }
  const Trend& trend() const noexcept { return trend_; }

  UserProfile user(Eigen::Index i) const;

  /// x_i + e / (2 c_i) for every user, d x n.
  Matrix ideal_points() const;

 private:
  Matrix features_;
  Vector costs_;
  Trend trend_;
};

/// Hyperplane moderator; content is benign iff w.x + b <= 0.
class LinearModerator {
 public:
  LinearModerator(Vector w, double b);

  const Vector& w() const noexcept { return w_; }
  double b() const noexcept { return b_; }
  double score(const Vector& z) const { return w_.dot(z) + b_; }

 private:
  Vector w_;
  double b_;
};

/// Intersection of halfspaces; benign iff every w_j.z + b_j <= 0.
class PolytopeModerator {
 public:
  static constexpr std::size_t kMaxHalfspaces = 12;

  explicit PolytopeModerator(std::vector<LinearModerator> halfspaces);

  const std::vector<LinearModerator>& halfspaces() const noexcept {
    return halfspaces_;
  }
  /// Largest constraint value; <= 0 inside the benign region.
  double score(const Vector& z) const;

 private:
  std::vector<LinearModerator> halfspaces_;
};

/// The trivial moderator that marks everything benign.
struct TrivialModerator {
  double score(const Vector&) const { return -1.0; }
};

using Moderator = std::variant<TrivialModerator, LinearModerator, PolytopeModerator>;

double score(const Moderator& f, const Vector& z);

inline bool is_benign(double score_value) { return score_value <= kBenignSlack; }
inline bool is_benign(const Moderator& f, const Vector& z) {
  return is_benign(score(f, z));
}

}  // namespace stratmod
