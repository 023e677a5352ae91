#include "stratmod/core_model.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <type_traits>

namespace stratmod {

namespace {

void check_dims(const UserProfile& u, const Trend& e) {
  if (u.dim() != e.dim()) fail("user and trend dimensions differ");
}

Eigen::Index moderator_dim(const Moderator& f) {
  if (const auto* lin = std::get_if<LinearModerator>(&f)) return lin->w().size();
  if (const auto* poly = std::get_if<PolytopeModerator>(&f))
    return poly->halfspaces().front().w().size();
  return -1;
}

void check_dims(const Vector& z, const Moderator& f) {
  const Eigen::Index d = moderator_dim(f);
  if (d >= 0 && d != z.size()) fail("moderator and point dimensions differ");
}

// Per-constraint feasibility tolerance for an active-set candidate.
bool feasible(const PolytopeModerator& f, const Vector& p) {
  for (const auto& h : f.halfspaces()) {
    const double tol = 1e-9 * (1.0 + std::abs(h.b()) + h.w().norm() * p.norm());
    if (h.score(p) > tol) return false;
  }
  return true;
}

}  // namespace

const char* to_string(ResponseCase c) {
  switch (c) {
    case ResponseCase::Unconstrained: return "UNCONSTRAINED";
    case ResponseCase::Projected: return "PROJECTED";
    case ResponseCase::StayFiltered: return "STAY_FILTERED";
    case ResponseCase::CrossToBoundary: return "CROSS_TO_BOUNDARY";
  }
  return "UNKNOWN";
}

Vector ideal_point(const UserProfile& u, const Trend& e) {
  check_dims(u, e);
  return u.x() + e.e() / (2.0 * u.c());
}

double utility(const Vector& z, const UserProfile& u, const Trend& e, const Moderator& f) {
  check_dims(u, e);
  if (z.size() != u.dim()) fail("point and user dimensions differ");
  check_dims(z, f);
  const double gain = is_benign(f, z) ? z.dot(e.e()) : 0.0;
  return gain - u.c() * (z - u.x()).squaredNorm();
}

Vector project_hyperplane(const Vector& z, const LinearModerator& f) {
  if (z.size() != f.w().size()) fail("moderator and point dimensions differ");
  const Vector& w = f.w();
  return z - (f.score(z) / w.squaredNorm()) * w;
}

Vector project_polytope(const Vector& z, const PolytopeModerator& f) {
  check_dims(z, f);
  if (f.score(z) <= 0.0) return z;

  const auto& hs = f.halfspaces();
  const std::size_t m = hs.size();
  const Eigen::Index d = z.size();

  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    const auto k = static_cast<Eigen::Index>(std::popcount(mask));
    if (k > d) continue;  // more active normals than dimensions is always rank-deficient
    Matrix a(k, d);
    Vector offs(k);
    Eigen::Index row = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      a.row(row) = hs[j].w().transpose();
      offs[row] = hs[j].b();
      ++row;
    }
    // Nearest point of {a p + offs = 0}: p = z - a^T (a a^T)^{-1} (a z + offs).
    const Matrix gram = a * a.transpose();
    Eigen::FullPivLU<Matrix> lu(gram);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) continue;  // ill-conditioned subset
    const Vector p = z - a.transpose() * lu.solve(a * z + offs);
    if (!feasible(f, p)) continue;
    const double dist = (p - z).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  if (best.size() == 0)
    throw Error(ErrorCode::EmptyBenignRegion, "polytope benign region is empty");
  return best;
}

Vector project_benign(const Vector& z, const Moderator& f) {
  return std::visit(
      [&](const auto& m) -> Vector {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearModerator>)
          return project_hyperplane(z, m);
        else if constexpr (std::is_same_v<M, PolytopeModerator>)
          return project_polytope(z, m);
        else
          return z;
      },
      f);
}

BestResponseResult best_response(const UserProfile& u, const Trend& e, const Moderator& f) {
  const Vector ideal = ideal_point(u, e);
  check_dims(ideal, f);

  if (is_benign(f, ideal))
    return {ideal, ResponseCase::Unconstrained, false, utility(ideal, u, e, f)};

  Vector projected = project_benign(ideal, f);
  const double projected_utility = utility(projected, u, e, f);
  if (is_benign(f, u.x()))
    return {std::move(projected), ResponseCase::Projected, false, projected_utility};

  // Staying at a filtered x earns nothing and costs nothing.
  if (projected_utility > 0.0)
    return {std::move(projected), ResponseCase::CrossToBoundary, false, projected_utility};
  return {u.x(), ResponseCase::StayFiltered, true, 0.0};
}

}  // namespace stratmod
