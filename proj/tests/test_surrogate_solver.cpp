#include "stratmod/distortion_metrics.hpp"
#include "stratmod/exact_oracle.hpp"
#include "stratmod/surrogate_solver.hpp"
#include "stratmod/synth_data.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <array>

using namespace stratmod;
using testing_support::Branches;
using testing_support::vec;

namespace {

SolverConfig with_lambda(double lambda) {
  SolverConfig cfg;
  cfg.lambda = lambda;
  return cfg;
}

Population vertical_triple() {
  const Trend e(vec({1, 0}));
  return Population({UserProfile(vec({0.3, 0}), 1.0), UserProfile(vec({0.3, 0.1}), 1.0),
                     UserProfile(vec({0.3, -0.1}), 1.0)},
                    e);
}

}  // namespace

TEST_CASE("surrogate loss examples") {
  CHECK(surrogate_loss(0.5, 0.5, with_lambda(1)) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(surrogate_loss(0.5, 0.5, with_lambda(10)) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(surrogate_loss(0.05, 0.5, with_lambda(1)) == doctest::Approx(-0.0475).epsilon(1e-14));
  CHECK(surrogate_loss(1.5, 0.5, with_lambda(10)) == doctest::Approx(9.75).epsilon(1e-15));
  const double far = surrogate_loss(-10, 0.5, with_lambda(1));
  CHECK(far < 0);
  CHECK(far == doctest::Approx(-2.481e-4).epsilon(1e-3));
  CHECK(std::abs(surrogate_loss(-1e6, 0.5, with_lambda(1))) < 1e-8);
}

TEST_CASE("surrogate rejects nonpositive a") {
  try {
    surrogate_loss(0.1, 0.0, SolverConfig{});
    FAIL("expected NonPositiveA");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveA);
  }
}

TEST_CASE("surrogate matches its branches and joins them smoothly") {
  for (double a : {0.1, 0.5, 2.0})
    for (double eps : {0.5, 0.9})
      for (double lambda : {0.1, 10.0}) {
        SolverConfig cfg;
        cfg.epsilon = eps;
        cfg.lambda = lambda;
        const Branches br{a, eps, lambda};
        const double y1 = (1 - eps) * a;
        const double y2 = a;

        CHECK(std::abs(br.left(y1) - br.middle(y1)) <= 1e-9);
        CHECK(std::abs(br.middle(y2) - br.right(y2)) <= 1e-9);
        CHECK(std::abs(br.left_dy(y1) - br.middle_dy(y1)) <= 1e-9);
        CHECK(std::abs(br.middle_dy(y2) - br.right_dy(y2)) <= 1e-9);
        CHECK(br.left(y1) == doctest::Approx(-(1 - eps * eps) * a * a));
        CHECK(br.middle_dy(y1) == doctest::Approx(-2 * eps * a));

        // The library agrees with each branch on its own side of the breakpoints.
        for (double y : {y1 - 1.0, y1 - 1e-7, y1, (y1 + y2) / 2, y2, y2 + 1e-7, y2 + 3.0}) {
          const auto t = surrogate_term(y, a, cfg);
          const double v = y < y1 ? br.left(y) : y <= y2 ? br.middle(y) : br.right(y);
          const double dv = y < y1 ? br.left_dy(y) : y <= y2 ? br.middle_dy(y) : br.right_dy(y);
          CHECK(t.value == doctest::Approx(v).epsilon(1e-13));
          CHECK(t.d_y == doctest::Approx(dv).epsilon(1e-12).scale(1e-12));
        }

        // The minimum sits at y = a with value -a^2.
        CHECK(surrogate_loss(a, a, cfg) == doctest::Approx(-a * a));
        for (double dy : {-0.3, -0.01, 0.01, 0.3})
          CHECK(surrogate_loss(a + dy * a, a, cfg) > -a * a);
      }
}

TEST_CASE("surrogate derivative in a matches finite differences") {
  SolverConfig cfg;
  cfg.lambda = 3.0;
  for (double a : {0.2, 0.5, 1.7})
    for (double y : {-4.0, -0.1, 0.3 * a, 0.6 * a, 1.4 * a, 5.0}) {
      const double h = 1e-6;
      const double fd = (surrogate_loss(y, a + h, cfg) - surrogate_loss(y, a - h, cfg)) / (2 * h);
      CHECK(surrogate_term(y, a, cfg).d_a == doctest::Approx(fd).epsilon(1e-6).scale(1e-6));
    }
}

TEST_CASE("objective gradient matches central differences") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> lam(0.05, 20.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + t % 4;
    const auto pop = testing_support::random_population(rng, d, 25);
    Vector w = testing_support::random_nonzero(rng, d);
    w(0) = std::abs(w(0)) + 0.3;  // keep a = w.e/(2c) clear of the floor
    const double b = std::normal_distribution<double>(0, 1)(rng);
    SolverConfig cfg;
    cfg.lambda = lam(rng);

    const auto g = surrogate_gradient(LinearModerator(w, b), pop, cfg);
    Vector fd(d + 1);
    const double h = 1e-6;
    for (int j = 0; j < d; ++j) {
      Vector wp = w, wm = w;
      wp(j) += h;
      wm(j) -= h;
      fd(j) = (surrogate_objective(LinearModerator(wp, b), pop, cfg) -
               surrogate_objective(LinearModerator(wm, b), pop, cfg)) /
              (2 * h);
    }
    fd(d) = (surrogate_objective(LinearModerator(w, b + h), pop, cfg) -
             surrogate_objective(LinearModerator(w, b - h), pop, cfg)) /
            (2 * h);
    Vector an(d + 1);
    an << g.w, g.b;
    worst = std::max(worst, (an - fd).norm() / an.norm());
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("gradient special cases") {
  const Trend e(vec({1, 0}));
  SolverConfig cfg;
  SUBCASE("far-left user barely pulls") {
    const Population pop({UserProfile(vec({-40, 0}), 1.0)}, e);
    const auto g = surrogate_gradient(LinearModerator(vec({1, 0}), 0.0), pop, cfg);
    CHECK(std::hypot(g.w.norm(), g.b) <= 1e-3);
  }
  SUBCASE("middle branch b-derivative") {
    // a = 0.5 and y = 0.3 lies on the middle branch.
    const Population pop({UserProfile(vec({-0.2, 0}), 1.0)}, e);
    const LinearModerator f(vec({1, 0}), 0.0);
    const double a = 0.5, y = -0.2 + a;
    const auto g = surrogate_gradient(f, pop, cfg);
    CHECK(g.b == doctest::Approx(2 * y - 2 * a).epsilon(1e-14));
  }
  SUBCASE("floored a carries no derivative") {
    const Population pop({UserProfile(vec({0.3, 0.2}), 1.0)}, e);
    const LinearModerator f(vec({-1, 1}), 0.0);
    const auto g = surrogate_gradient(f, pop, cfg);
    CHECK(std::isfinite(g.b));
    CHECK(g.w.allFinite());
  }
}

TEST_CASE("violation vector") {
  const Trend e(vec({1, 0}));
  const Population pop(
      {UserProfile(vec({-3, 0}), 1.0), UserProfile(vec({0, 0}), 1.0), UserProfile(vec({-1, 0}), 0.5)},
      e);
  const LinearModerator f(vec({1, 0}), 0.0);
  const auto g = violation_vector(pop, f);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(0.5));
  CHECK(g[2] == 0.0);
  CHECK(violation_count(g) == 1);
  CHECK(violation_penalty(g) == doctest::Approx(0.25));
  CHECK(violation_count(violation_vector(pop, LinearModerator(vec({1, 0}), -10.0))) == 0);
}

TEST_CASE("pgd on three collinear users") {
  SolverConfig cfg;
  cfg.lambda = 0.01;
  const auto pop = vertical_triple();
  const auto r = pgd_solve(pop, cfg);
  const Vector w = r.moderator.w();
  // Boundary crossing the x_1 axis near 0.3 and nearly vertical.
  CHECK(std::abs(w(1)) <= 0.05 * std::abs(w(0)));
  CHECK(std::abs(-r.moderator.b() / w(0) - 0.3) <= 0.05);

  OracleConfig oc;
  oc.k = 3;
  const auto oracle = oracle_2d(pop, oc);
  CHECK(r.dm >= 0.95 * oracle.dm);
}

TEST_CASE("pgd invariants") {
  const auto pop = generate(MixtureSpec{.d = 3, .n = 60, .k = 3, .seed = 4});
  for (double lambda : {0.0, 0.1, 1.0, 100.0}) {
    SolverConfig cfg;
    cfg.lambda = lambda;
    cfg.seed = 9;
    const auto r = pgd_solve(pop, cfg);
    CHECK(r.moderator.w().lpNorm<Eigen::Infinity>() <= 1 + 1e-12);
    CHECK(r.moderator.w().lpNorm<Eigen::Infinity>() > 0);
    CHECK(r.dm == doctest::Approx(dm_closed_form_linear(pop, r.moderator)));
    CHECK(r.objective == doctest::Approx(surrogate_objective(r.moderator, pop, cfg)));
    CHECK(r.iterations_used <= cfg.max_iters);

    const auto again = pgd_solve(pop, cfg);
    CHECK(again.moderator.w() == r.moderator.w());
    CHECK(again.moderator.b() == r.moderator.b());
    CHECK(again.objective == r.objective);
  }
}

TEST_CASE("huge penalty removes every violation") {
  SolverConfig cfg;
  cfg.lambda = 1e6;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto pop = generate(MixtureSpec{.d = 2, .n = 100, .k = 4, .seed = seed});
    const auto r = pgd_solve(pop, cfg);
    CHECK(r.metrics.fos_desired == 1.0);
  }
}

TEST_CASE("no penalty on a benign population keeps the objective nonpositive") {
  SolverConfig cfg;
  cfg.lambda = 0.0;
  const Trend e(vec({1, 0}));
  const Population pop({UserProfile(vec({-5, 0}), 1.0), UserProfile(vec({-6, 1}), 1.0)}, e);
  CHECK(pgd_solve(pop, cfg).objective <= 0.0);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.epsilon = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.lambda = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.restarts = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("calibration") {
  const auto pop = generate(MixtureSpec{.d = 2, .n = 60, .k = 3, .seed = 12});
  SolverConfig cfg;
  cfg.restarts = 2;
  const double lmax = lambda_upper_bound(pop);
  double expect_max = 1.0;
  for (Eigen::Index i = 0; i < pop.size(); ++i)
    expect_max += 1.0 / (4 * pop.costs()(i) * pop.costs()(i));
  CHECK(lmax == doctest::Approx(expect_max));

  SUBCASE("vacuous budget") {
    const auto c = calibrate_lambda(pop, {.k = 60}, cfg);
    CHECK(c.lambda == 0.0);
    CHECK(c.solves == 1);
    CHECK_FALSE(c.infeasible);
  }
  for (long k : {0L, 6L, 20L}) {
    CAPTURE(k);
    const auto c = calibrate_lambda(pop, {.k = k, .delta = 1e-3}, cfg);
    const int bound = static_cast<int>(std::ceil(std::log2(lmax / 1e-3))) + 1;
    CHECK(c.solves <= bound);
    const long v = violation_count(violation_vector(pop, c.result.moderator));
    if (c.infeasible)
      CHECK(c.lambda == lmax);
    else
      CHECK(v <= k);
  }
  CHECK_THROWS_AS(calibrate_lambda(pop, {.k = 61}, cfg), Error);
  CHECK_THROWS_AS(calibrate_lambda(pop, {.k = 3, .delta = 0}, cfg), Error);
}

TEST_CASE("sweep") {
  const auto pop = generate(MixtureSpec{.d = 2, .n = 50, .k = 5, .seed = 2});
  SolverConfig cfg;
  cfg.seed = 7;
  const std::array<double, 1> one{0.5};
  const auto pts = sweep_lambda(pop, one, cfg);
  REQUIRE(pts.size() == 1);
  cfg.lambda = 0.5;
  const auto direct = pgd_solve(pop, cfg);
  CHECK(pts[0].dm == direct.dm);
  CHECK(pts[0].objective == direct.objective);
  CHECK(pts[0].fos_retained == direct.metrics.fos_retained);
  CHECK(pts[0].lambda == 0.5);

  const std::array<double, 3> grid{0.1, 1.0, 10.0};
  const auto many = sweep_lambda(pop, grid, cfg);
  CHECK(many.size() == 3);
  const std::array<double, 1> bad{-1.0};
  CHECK_THROWS_AS(sweep_lambda(pop, bad, cfg), Error);
  CHECK_THROWS_AS(sweep_lambda(pop, std::span<const double>{}, cfg), Error);
}

TEST_CASE("generalization gap") {
  const auto train = generate(MixtureSpec{.d = 2, .n = 200, .k = 4, .seed = 1});
  const LinearModerator f(vec({1, 0.2}), -0.1);
  const auto same = generalization_gap(train, train, f);
  CHECK(same.first == 0.0);
  CHECK(same.second == 0.0);

  // Train and test are the even and odd users of one mixture draw.
  std::vector<double> dm_gaps, fos_gaps;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto all = generate(MixtureSpec{.d = 5, .n = 1000, .k = 5, .seed = 100 + s});
    Matrix xa(5, 500), xb(5, 500);
    Vector ca(500), cb(500);
    for (int i = 0; i < 500; ++i) {
      xa.col(i) = all.features().col(2 * i), ca(i) = all.costs()(2 * i);
      xb.col(i) = all.features().col(2 * i + 1), cb(i) = all.costs()(2 * i + 1);
    }
    const Population a(xa, ca, all.trend()), b(xb, cb, all.trend());
    SolverConfig cfg;
    cfg.restarts = 1;
    const auto g = generalization_gap(a, b, pgd_solve(a, cfg).moderator);
    CHECK(std::isfinite(g.first));
    CHECK(std::isfinite(g.second));
    dm_gaps.push_back(g.first);
    fos_gaps.push_back(g.second);
  }
  std::sort(dm_gaps.begin(), dm_gaps.end());
  std::sort(fos_gaps.begin(), fos_gaps.end());
  MESSAGE("per-user DM gap median " << dm_gaps[10] << ", max " << dm_gaps.back()
                                    << "; fos gap median " << fos_gaps[10] << ", max "
                                    << fos_gaps.back());
  CHECK(dm_gaps[10] <= 0.1);
  CHECK(fos_gaps[10] <= 0.1);

  Matrix far = train.features().array() + 50.0;
  const Population shifted(far, train.costs(), train.trend());
  const auto g = generalization_gap(train, shifted, f);
  CHECK(std::isfinite(g.first));
  // Every shifted ideal point is flagged, so the gap is the whole train fraction.
  CHECK(g.second == doctest::Approx(metrics(train, f).fos_desired));
}
