#include "stratmod/core_model.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace stratmod;
using testing_support::vec;

namespace {

const Trend kE(vec({1, 0}));

bool close(const Vector& a, const Vector& b, double tol = 1e-12) {
  return (a - b).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace

TEST_CASE("type invariants are enforced at construction") {
  CHECK_THROWS_AS(Trend(vec({0, 0})), Error);
  CHECK_THROWS_AS(UserProfile(vec({0, 0}), 0.0), Error);
  CHECK_THROWS_AS(UserProfile(vec({0, 0}), -1.0), Error);
  CHECK_THROWS_AS(UserProfile(vec({NAN, 0}), 1.0), Error);
  CHECK_THROWS_AS(LinearModerator(vec({0, 0}), 1.0), Error);
  CHECK_THROWS_AS(PolytopeModerator{std::vector<LinearModerator>{}}, Error);
  std::vector<LinearModerator> many(13, LinearModerator(vec({1, 0}), 0.0));
  CHECK_THROWS_AS(PolytopeModerator{many}, Error);
  CHECK_THROWS_AS(Population(std::vector<UserProfile>{}, kE), Error);
  CHECK_THROWS_AS(Population({UserProfile(vec({0, 0, 0}), 1.0)}, kE), Error);
}

TEST_CASE("ideal point is x + e/(2c)") {
  CHECK(close(ideal_point(UserProfile(vec({0, 0}), 0.5), kE), vec({1, 0})));
  CHECK(close(ideal_point(UserProfile(vec({-0.25, 0}), 0.5), kE), vec({0.75, 0})));
}

TEST_CASE("utility examples") {
  const LinearModerator f(vec({1, 0}), 0.0);
  const UserProfile benign(vec({-0.25, 0.3}), 0.5);
  CHECK(utility(benign.x(), benign, kE, f) == doctest::Approx(-0.25));

  const UserProfile flagged(vec({0.5, 0.3}), 0.5);
  CHECK(utility(flagged.x(), flagged, kE, f) == 0.0);

  const UserProfile u(vec({-0.25, 0}), 0.5);
  CHECK(utility(vec({0, 0}), u, kE, f) == doctest::Approx(-0.03125).epsilon(1e-14));
}

TEST_CASE("hyperplane projection") {
  const LinearModerator f(vec({1, 0}), 0.0);
  CHECK(close(project_hyperplane(vec({0.75, 0}), f), vec({0, 0})));
  CHECK(close(project_hyperplane(vec({0, 4}), f), vec({0, 4})));
  CHECK(close(project_hyperplane(vec({1, 1}), LinearModerator(vec({1, 1}), 0.0)), vec({0, 0})));

  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + t % 6;
    const Vector w = testing_support::random_nonzero(rng, d);
    const Vector z = 10 * testing_support::random_nonzero(rng, d);
    const double b = std::normal_distribution<double>(0, 3)(rng);
    const LinearModerator g(w, b);
    CHECK(std::abs(g.score(project_hyperplane(z, g))) <= 1e-9 * (1 + z.norm()));
  }
}

TEST_CASE("polytope projection") {
  const PolytopeModerator quadrant(
      {LinearModerator(vec({1, 0}), 0.0), LinearModerator(vec({0, 1}), 0.0)});
  CHECK(close(project_polytope(vec({-1, -2}), quadrant), vec({-1, -2})));
  CHECK(close(project_polytope(vec({1, 1}), quadrant), vec({0, 0})));
  CHECK(close(project_polytope(vec({1, -1}), quadrant), vec({0, -1})));

  SUBCASE("single halfspace matches the hyperplane projection") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
      const LinearModerator f(testing_support::random_nonzero(rng, 3), 0.7);
      const Vector z = testing_support::random_nonzero(rng, 3);
      const Vector expected = f.score(z) <= 0 ? z : project_hyperplane(z, f);
      CHECK(close(project_polytope(z, PolytopeModerator({f})), expected, 1e-10));
    }
  }

  SUBCASE("redundant and parallel constraints") {
    // A band 0 <= x_1 <= 1 plus a duplicate of the upper face.
    const PolytopeModerator band({LinearModerator(vec({1, 0}), -1.0),
                                  LinearModerator(vec({-1, 0}), 0.0),
                                  LinearModerator(vec({2, 0}), -2.0)});
    CHECK(close(project_polytope(vec({3, 5}), band), vec({1, 5}), 1e-10));
    CHECK(close(project_polytope(vec({-2, 5}), band), vec({0, 5}), 1e-10));
  }

  SUBCASE("empty benign region") {
    const PolytopeModerator empty(
        {LinearModerator(vec({1, 0}), 1.0), LinearModerator(vec({-1, 0}), 1.0)});
    try {
      project_polytope(vec({0, 0}), empty);
      FAIL("expected EmptyBenignRegion");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyBenignRegion);
    }
  }
}

TEST_CASE("best response examples") {
  SUBCASE("moderator inactive at the ideal point") {
    const auto r = best_response(UserProfile(vec({0, 0}), 0.5), kE,
                                 LinearModerator(vec({1, 0}), -2.0));
    CHECK(r.case_tag == ResponseCase::Unconstrained);
    CHECK(close(r.z_star, vec({1, 0})));
    CHECK_FALSE(r.filtered);
  }
  SUBCASE("benign origin is projected onto the boundary") {
    const UserProfile u(vec({-0.25, 0}), 0.5);
    const LinearModerator f(vec({1, 0}), 0.0);
    const auto r = best_response(u, kE, f);
    CHECK(r.case_tag == ResponseCase::Projected);
    CHECK(close(r.z_star, vec({0, 0})));
    const double grid = testing_support::ref_grid_max(u.x(), u.c(), kE.e(), f.w(), f.b(),
                                                      vec({-2, -2}), vec({2, 2}), 401);
    CHECK(std::abs(r.utility - grid) <= 1e-3);
  }
  SUBCASE("staying beats crossing") {
    const auto r = best_response(UserProfile(vec({0.1, 0}), 0.5), kE,
                                 LinearModerator(vec({1, 0}), 0.0));
    CHECK(r.case_tag == ResponseCase::StayFiltered);
    CHECK(close(r.z_star, vec({0.1, 0})));
    CHECK(r.filtered);
    CHECK(r.utility == 0.0);
  }
  SUBCASE("crossing to the boundary pays off") {
    const UserProfile u(vec({0.5, 0.1}), 0.5);
    const auto r = best_response(u, kE, LinearModerator(vec({0, 1}), 0.0));
    CHECK(r.case_tag == ResponseCase::CrossToBoundary);
    CHECK(close(r.z_star, vec({1.5, 0})));
    CHECK(r.utility == doctest::Approx(0.995).epsilon(1e-12));
  }
  SUBCASE("zero utility at the boundary stays") {
    // Boundary point (1, 0): gain 1, cost 1 * 1^2 = 1.
    const auto r = best_response(UserProfile(vec({0, 1}), 1.0), Trend(vec({2, 0})),
                                 LinearModerator(vec({0, 1}), 0.0));
    CHECK(r.case_tag == ResponseCase::StayFiltered);
  }
  SUBCASE("trivial moderator") {
    const auto r = best_response(UserProfile(vec({3, 3}), 2.0), kE, TrivialModerator{});
    CHECK(r.case_tag == ResponseCase::Unconstrained);
    CHECK(close(r.z_star, vec({3.25, 3})));
  }
}

TEST_CASE("case names") {
  CHECK(std::string(to_string(ResponseCase::Unconstrained)) == "UNCONSTRAINED");
  CHECK(std::string(to_string(ResponseCase::Projected)) == "PROJECTED");
  CHECK(std::string(to_string(ResponseCase::StayFiltered)) == "STAY_FILTERED");
  CHECK(std::string(to_string(ResponseCase::CrossToBoundary)) == "CROSS_TO_BOUNDARY");
}

TEST_CASE("best response beats a dense grid and respects its invariants") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uc(0.3, 2.0);
  std::normal_distribution<double> g(0.0, 1.0);
  int negative_published = 0;
  for (int t = 0; t < 60; ++t) {
    const int d = 1 + t % 3;
    const UserProfile u(testing_support::random_nonzero(rng, d), uc(rng));
    const Trend e(testing_support::random_nonzero(rng, d));
    const LinearModerator f(testing_support::random_nonzero(rng, d), g(rng));
    const auto r = best_response(u, e, f);
    const Vector zp = ideal_point(u, e);

    CHECK(r.utility == doctest::Approx(testing_support::ref_utility(r.z_star, u.x(), u.c(),
                                                                    e.e(), f.w(), f.b()))
                           .epsilon(1e-12));
    CHECK(r.filtered == (r.case_tag == ResponseCase::StayFiltered));
    if (f.score(zp) <= 0) CHECK(r.z_star == zp);
    if (f.score(u.x()) <= 0) CHECK((r.z_star - u.x()).norm() <= (zp - u.x()).norm() + 1e-12);

    const Vector lo = u.x().cwiseMin(zp).array() - 1.0;
    const Vector hi = u.x().cwiseMax(zp).array() + 1.0;
    const int steps = d == 1 ? 4001 : d == 2 ? 401 : 61;
    const double grid = testing_support::ref_grid_max(u.x(), u.c(), e.e(), f.w(), f.b(), lo, hi,
                                                      steps);
    if (r.utility >= 0) {
      CHECK(r.utility >= grid - 1e-6);
    } else {
      // Publishing at a loss: being filtered is worth 0, either by staying at a
      // flagged x or by stepping just across the boundary. The closed-form
      // response follows the case rules and does not take that option.
      CHECK(grid <= 1e-12);
      ++negative_published;
    }
  }
  CHECK(negative_published < 20);
}

TEST_CASE("polytope best response") {
  const PolytopeModerator quadrant(
      {LinearModerator(vec({1, 0}), 0.0), LinearModerator(vec({0, 1}), 0.0)});
  const Trend e(vec({1, 1}));
  const auto r = best_response(UserProfile(vec({-0.2, -0.2}), 0.5), e, quadrant);
  CHECK(r.case_tag == ResponseCase::Projected);
  CHECK(close(r.z_star, vec({0, 0}), 1e-12));
  const auto s = best_response(UserProfile(vec({-0.2, -3}), 0.5), e, quadrant);
  CHECK(s.case_tag == ResponseCase::Projected);
  CHECK(close(s.z_star, vec({0, -2}), 1e-12));
}
