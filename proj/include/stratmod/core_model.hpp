#pragma once

#include "stratmod/types.hpp"

namespace stratmod {

enum class ResponseCase {
  Unconstrained,
  Projected,
  StayFiltered,
  CrossToBoundary,
};

const char* to_string(ResponseCase c);

struct BestResponseResult {
  Vector z_star;
  ResponseCase case_tag;
  bool filtered;
  double utility;
};

/// Where the user would move absent moderation: x + e / (2c).
Vector ideal_point(const UserProfile& u, const Trend& e);

/// Trend gain when published minus quadratic movement cost.
double utility(const Vector& z, const UserProfile& u, const Trend& e,
               const Moderator& f);

/// Euclidean projection of z onto {w.x + b = 0}.
Vector project_hyperplane(const Vector& z, const LinearModerator& f);

/// Nearest point of the polytope's benign region, by enumerating every subset
/// of halfspaces as a candidate active set. Throws EmptyBenignRegion when no
/// subset produces a feasible point.
Vector project_polytope(const Vector& z, const PolytopeModerator& f);

/// Nearest benign point: the hyperplane projection for linear moderators, the
/// polytope projection for polytopes, identity for the trivial moderator.
Vector project_benign(const Vector& z, const Moderator& f);

/// Utility-maximizing published content for one user.
///
/// If the ideal point is benign the user goes there. Otherwise a benign-origin
/// user moves to the projection of the ideal point onto the benign region. A
/// filtered-origin user crosses to that projection only when it yields
/// strictly positive utility; on a tie the user stays at x.
BestResponseResult best_response(const UserProfile& u, const Trend& e,
                                 const Moderator& f);

}  // namespace stratmod
