#include "stratmod/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace stratmod {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

UserProfile::UserProfile(Vector x, double c) : x_(std::move(x)), c_(c) {
  if (x_.size() == 0) fail("user feature vector is empty");
  if (!all_finite(x_)) fail("user feature vector has a non-finite coordinate");
  if (!(c_ > 0.0) || !std::isfinite(c_)) fail("manipulation cost c must be positive and finite");
}

Trend::Trend(Vector e) : e_(std::move(e)) {
  if (e_.size() == 0) fail("trend vector is empty");
  if (!all_finite(e_)) fail("trend vector has a non-finite coordinate");
  if (!(e_.norm() > 0.0)) fail("trend vector must be nonzero");
}

Population::Population(Matrix features, Vector costs, Trend trend)
    : features_(std::move(features)), costs_(std::move(costs)), trend_(std::move(trend)) {
  if (features_.cols() == 0) fail("population is empty");
  if (features_.rows() != trend_.dim())
    fail("population dimension " + std::to_string(features_.rows()) +
         " does not match trend dimension " + std::to_string(trend_.dim()));
  if (costs_.size() != features_.cols()) fail("cost count does not match user count");
  if (!features_.allFinite()) fail("population has a non-finite feature");
  for (Eigen::Index i = 0; i < costs_.size(); ++i)
    if (!(costs_[i] > 0.0) || !std::isfinite(costs_[i]))
      fail("user " + std::to_string(i) + " has a non-positive cost");
}

Population::Population(const std::vector<UserProfile>& users, Trend trend)
    : trend_(std::move(trend)) {
  if (users.empty()) fail("population is empty");
  const Eigen::Index d = trend_.dim();
  features_.resize(d, static_cast<Eigen::Index>(users.size()));
  costs_.resize(static_cast<Eigen::Index>(users.size()));
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (users[i].dim() != d)
      fail("user " + std::to_string(i) + " dimension does not match trend");
    features_.col(static_cast<Eigen::Index>(i)) = users[i].x();
    costs_[static_cast<Eigen::Index>(i)] = users[i].c();
  }
}

UserProfile Population::user(Eigen::Index i) const {
  return UserProfile(features_.col(i), costs_[i]);
}

Matrix Population::ideal_points() const {
  Matrix z = features_;
  for (Eigen::Index i = 0; i < z.cols(); ++i) z.col(i) += trend_.e() / (2.0 * costs_[i]);
  return z;
}

LinearModerator::LinearModerator(Vector w, double b) : w_(std::move(w)), b_(b) {
  if (w_.size() == 0) fail("moderator normal is empty");
  if (!w_.allFinite() || !std::isfinite(b_)) fail("moderator has a non-finite parameter");
  if (w_.cwiseAbs().maxCoeff() == 0.0) fail("moderator normal w must be nonzero");
}

PolytopeModerator::PolytopeModerator(std::vector<LinearModerator> halfspaces)
    : halfspaces_(std::move(halfspaces)) {
  if (halfspaces_.empty()) fail("polytope needs at least one halfspace");
  if (halfspaces_.size() > kMaxHalfspaces)
    fail("polytope has more than " + std::to_string(kMaxHalfspaces) + " halfspaces");
  for (const auto& h : halfspaces_)
    if (h.w().size() != halfspaces_.front().w().size())
      fail("polytope halfspaces disagree on dimension");
}

double PolytopeModerator::score(const Vector& z) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& h : halfspaces_) worst = std::max(worst, h.score(z));
  return worst;
}

double score(const Moderator& f, const Vector& z) {
  return std::visit([&](const auto& m) { return m.score(z); }, f);
}

}  // namespace stratmod
