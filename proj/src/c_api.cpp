#include "stratmod/stratmod.h"

#include "stratmod/core_model.hpp"
#include "stratmod/distortion_metrics.hpp"
#include "stratmod/exact_oracle.hpp"
#include "stratmod/surrogate_solver.hpp"
#include "stratmod/synth_data.hpp"

#include <exception>
#include <new>
#include <sstream>
#include <string>

struct smod_population {
  stratmod::Population pop;
};

namespace {

using namespace stratmod;

thread_local std::string last_error;

smod_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return SMOD_ERR_INVALID_ARGUMENT;
    case ErrorCode::EmptyBenignRegion: return SMOD_ERR_EMPTY_BENIGN_REGION;
    case ErrorCode::NonPositiveA: return SMOD_ERR_NON_POSITIVE_A;
    case ErrorCode::DegenerateSolution: return SMOD_ERR_DEGENERATE_SOLUTION;
    case ErrorCode::Infeasible: return SMOD_ERR_INFEASIBLE;
    case ErrorCode::NoFeasibleCandidate: return SMOD_ERR_NO_FEASIBLE_CANDIDATE;
    case ErrorCode::Parse: return SMOD_ERR_PARSE;
    case ErrorCode::Io: return SMOD_ERR_IO;
  }
  return SMOD_ERR_INTERNAL;
}

template <class Body>
smod_status guarded(Body&& body) noexcept {
  try {
    last_error.clear();
    return body();
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return SMOD_ERR_INTERNAL;
}

template <class... P>
void require(const P*... ptrs) {
  if (((ptrs == nullptr) || ...)) fail("required pointer argument is NULL");
}

Vector vec(const double* p, std::size_t d) {
  require(p);
  if (d == 0) fail("dimension must be positive");
  return Eigen::Map<const Vector>(p, static_cast<Eigen::Index>(d));
}

void store(const Vector& v, double* out) {
  Eigen::Map<Vector>(out, v.size()) = v;
}

Moderator moderator(const smod_moderator* f) {
  require(f);
  switch (f->kind) {
    case SMOD_MODERATOR_TRIVIAL:
      return TrivialModerator{};
    case SMOD_MODERATOR_LINEAR:
      if (f->m != 1) fail("a linear moderator has exactly one halfspace");
      require(f->b);
      return LinearModerator(vec(f->w, f->d), f->b[0]);
    case SMOD_MODERATOR_POLYTOPE: {
      require(f->w, f->b);
      std::vector<LinearModerator> hs;
      for (std::size_t j = 0; j < f->m; ++j) hs.emplace_back(vec(f->w + j * f->d, f->d), f->b[j]);
      return PolytopeModerator(std::move(hs));
    }
  }
  fail("unknown moderator kind");
}

void check_moderator_dim(const smod_moderator* f, std::size_t d) {
  if (f->kind != SMOD_MODERATOR_TRIVIAL && f->d != d) fail("moderator and point dimensions differ");
}

smod_metric_report to_c(const MetricReport& r) {
  return {r.dm, r.fos_desired, r.fos_retained, r.filtered_count, r.n};
}

SolverConfig to_cpp(const smod_solver_config* c) {
  require(c);
  SolverConfig s;
  s.epsilon = c->epsilon;
  s.lambda = c->lambda;
  s.learning_rate = c->learning_rate;
  s.max_iters = c->max_iters;
  s.restarts = c->restarts;
  s.seed = c->seed;
  s.tol_grad = c->tol_grad;
  s.a_min = c->a_min;
  return s;
}

OracleConfig to_cpp(const smod_oracle_config* c) {
  require(c);
  OracleConfig o;
  o.angle_steps = c->angle_steps;
  o.offset_steps = c->offset_steps;
  o.k = c->k;
  o.eps_slack = c->eps_slack;
  o.use_candidates = c->use_candidates != 0;
  return o;
}

void fill(const Population& pop, const SolveResult& r, double* w_out, smod_solve_result* out) {
  store(r.moderator.w(), w_out);
  const auto g = violation_vector(pop, r.moderator);
  *out = {r.moderator.b(),
          r.objective,
          r.dm,
          violation_penalty(g),
          violation_count(g),
          to_c(r.metrics),
          r.iterations_used,
          r.converged ? 1 : 0};
}

const Population& deref(const smod_population* p) {
  require(p);
  return p->pop;
}

}  // namespace

extern "C" {

const char* smod_version(void) { return "0.1.0"; }

const char* smod_status_name(smod_status status) {
  switch (status) {
    case SMOD_OK: return "ok";
    case SMOD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SMOD_ERR_EMPTY_BENIGN_REGION: return "empty benign region";
    case SMOD_ERR_NON_POSITIVE_A: return "non-positive a";
    case SMOD_ERR_DEGENERATE_SOLUTION: return "degenerate solution";
    case SMOD_ERR_INFEASIBLE: return "infeasible";
    case SMOD_ERR_NO_FEASIBLE_CANDIDATE: return "no feasible candidate";
    case SMOD_ERR_PARSE: return "parse error";
    case SMOD_ERR_IO: return "i/o error";
    case SMOD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* smod_last_error(void) { return last_error.c_str(); }

void smod_mixture_spec_default(smod_mixture_spec* spec) {
  if (!spec) return;
  const MixtureSpec m;
  *spec = {m.d, m.n, m.k, m.sigma_lo, m.sigma_hi, m.c_lo, m.c_hi, m.seed};
}

smod_status smod_population_create(const double* features, const double* costs,
                                   const double* trend, size_t n, size_t d,
                                   smod_population** out) {
  return guarded([&] {
    require(features, costs, trend, out);
    if (n == 0) fail("population is empty");
    const auto rows = static_cast<Eigen::Index>(d), cols = static_cast<Eigen::Index>(n);
    Matrix x = Eigen::Map<const Matrix>(features, rows, cols);
    *out = new smod_population{Population(std::move(x), vec(costs, n), Trend(vec(trend, d)))};
    return SMOD_OK;
  });
}

smod_status smod_population_generate(const smod_mixture_spec* spec, smod_population** out) {
  return guarded([&] {
    require(spec, out);
    MixtureSpec m{spec->d,        spec->n,    spec->k,    spec->sigma_lo,
                  spec->sigma_hi, spec->c_lo, spec->c_hi, spec->seed};
    *out = new smod_population{generate(m)};
    return SMOD_OK;
  });
}

smod_status smod_population_load(const char* path, smod_population** out) {
  return guarded([&] {
    require(path, out);
    *out = new smod_population{load(path)};
    return SMOD_OK;
  });
}

smod_status smod_population_save(const smod_population* pop, const char* path,
                                 const char* extra_metadata) {
  return guarded([&] {
    require(path);
    Metadata extra;
    if (extra_metadata) {
      std::istringstream lines(extra_metadata);
      std::string line;
      while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("metadata line without '=': " + line);
        extra.emplace_back(line.substr(0, eq), line.substr(eq + 1));
      }
    }
    save(deref(pop), path, extra);
    return SMOD_OK;
  });
}

void smod_population_free(smod_population* pop) { delete pop; }

size_t smod_population_size(const smod_population* pop) {
  return pop ? static_cast<size_t>(pop->pop.size()) : 0;
}

size_t smod_population_dim(const smod_population* pop) {
  return pop ? static_cast<size_t>(pop->pop.dim()) : 0;
}

smod_status smod_population_user(const smod_population* pop, size_t i, double* x_out,
                                 double* c_out) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(x_out, c_out);
    if (i >= static_cast<size_t>(p.size())) fail("user index out of range");
    store(p.features().col(static_cast<Eigen::Index>(i)), x_out);
    *c_out = p.costs()[static_cast<Eigen::Index>(i)];
    return SMOD_OK;
  });
}

smod_status smod_population_trend(const smod_population* pop, double* e_out) {
  return guarded([&] {
    require(e_out);
    store(deref(pop).trend().e(), e_out);
    return SMOD_OK;
  });
}

smod_status smod_ideal_point(const double* x, double c, const double* e, size_t d,
                             double* z_out) {
  return guarded([&] {
    require(z_out);
    store(ideal_point(UserProfile(vec(x, d), c), Trend(vec(e, d))), z_out);
    return SMOD_OK;
  });
}

smod_status smod_utility(const double* z, const double* x, double c, const double* e, size_t d,
                         const smod_moderator* f, double* out) {
  return guarded([&] {
    require(out, f);
    check_moderator_dim(f, d);
    *out = utility(vec(z, d), UserProfile(vec(x, d), c), Trend(vec(e, d)), moderator(f));
    return SMOD_OK;
  });
}

smod_status smod_project(const double* z, size_t d, const smod_moderator* f, double* z_out) {
  return guarded([&] {
    require(z_out, f);
    check_moderator_dim(f, d);
    store(project_benign(vec(z, d), moderator(f)), z_out);
    return SMOD_OK;
  });
}

smod_status smod_best_response_of(const double* x, double c, const double* e, size_t d,
                                  const smod_moderator* f, double* z_out,
                                  smod_best_response* info) {
  return guarded([&] {
    require(z_out, info, f);
    check_moderator_dim(f, d);
    const auto br = best_response(UserProfile(vec(x, d), c), Trend(vec(e, d)), moderator(f));
    store(br.z_star, z_out);
    info->case_tag = static_cast<smod_response_case>(br.case_tag);
    info->filtered = br.filtered ? 1 : 0;
    info->utility = br.utility;
    return SMOD_OK;
  });
}

smod_status smod_distortion(const double* x, double c, const double* e, size_t d,
                            const smod_moderator* f, double* out) {
  return guarded([&] {
    require(out, f);
    check_moderator_dim(f, d);
    *out = distortion(UserProfile(vec(x, d), c), Trend(vec(e, d)), moderator(f));
    return SMOD_OK;
  });
}

smod_status smod_mitigation(const double* x, double c, const double* e, size_t d,
                            const smod_moderator* f, double* out) {
  return guarded([&] {
    require(out, f);
    check_moderator_dim(f, d);
    *out = mitigation(UserProfile(vec(x, d), c), Trend(vec(e, d)), moderator(f));
    return SMOD_OK;
  });
}

smod_status smod_metrics(const smod_population* pop, const smod_moderator* f,
                         smod_metric_report* out) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(out, f);
    check_moderator_dim(f, static_cast<size_t>(p.dim()));
    *out = to_c(metrics(p, moderator(f)));
    return SMOD_OK;
  });
}

smod_status smod_dm_population(const smod_population* pop, const smod_moderator* f,
                               double* out) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(out, f);
    check_moderator_dim(f, static_cast<size_t>(p.dim()));
    *out = dm_population(p, moderator(f));
    return SMOD_OK;
  });
}

smod_status smod_dm_closed_form(const smod_population* pop, const double* w, double b,
                                double* out) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(out);
    *out = dm_closed_form_linear(p, LinearModerator(vec(w, static_cast<size_t>(p.dim())), b));
    return SMOD_OK;
  });
}

smod_status smod_violation_vector(const smod_population* pop, const double* w, double b,
                                  double* g_out, long* count_out, double* penalty_out) {
  return guarded([&] {
    const Population& p = deref(pop);
    const auto g =
        violation_vector(p, LinearModerator(vec(w, static_cast<size_t>(p.dim())), b));
    if (g_out) std::copy(g.begin(), g.end(), g_out);
    if (count_out) *count_out = violation_count(g);
    if (penalty_out) *penalty_out = violation_penalty(g);
    return SMOD_OK;
  });
}

void smod_solver_config_default(smod_solver_config* cfg) {
  if (!cfg) return;
  const SolverConfig s;
  *cfg = {s.epsilon,  s.lambda, s.learning_rate, s.max_iters,
          s.restarts, s.seed,   s.tol_grad,      s.a_min};
}

smod_status smod_surrogate_loss(double y, double a, const smod_solver_config* cfg, double* value,
                                double* d_y, double* d_a) {
  return guarded([&] {
    const SurrogateTerm t = surrogate_term(y, a, to_cpp(cfg));
    if (value) *value = t.value;
    if (d_y) *d_y = t.d_y;
    if (d_a) *d_a = t.d_a;
    return SMOD_OK;
  });
}

smod_status smod_surrogate_gradient(const smod_population* pop, const double* w, double b,
                                    const smod_solver_config* cfg, double* grad_w_out,
                                    double* grad_b_out, double* objective_out) {
  return guarded([&] {
    const Population& p = deref(pop);
    const SolverConfig c = to_cpp(cfg);
    const LinearModerator f(vec(w, static_cast<size_t>(p.dim())), b);
    if (grad_w_out || grad_b_out) {
      const auto g = surrogate_gradient(f, p, c);
      if (grad_w_out) store(g.w, grad_w_out);
      if (grad_b_out) *grad_b_out = g.b;
    }
    if (objective_out) *objective_out = surrogate_objective(f, p, c);
    return SMOD_OK;
  });
}

smod_status smod_pgd_solve(const smod_population* pop, const smod_solver_config* cfg,
                           double* w_out, smod_solve_result* out) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(w_out, out);
    fill(p, pgd_solve(p, to_cpp(cfg)), w_out, out);
    return SMOD_OK;
  });
}

smod_status smod_calibrate_lambda(const smod_population* pop, long k, double delta,
                                  const smod_solver_config* cfg, double* w_out,
                                  smod_solve_result* out, smod_calibration* info) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(w_out, out, info);
    const CalibrationResult r = calibrate_lambda(p, CalibrationTarget{k, delta}, to_cpp(cfg));
    fill(p, r.result, w_out, out);
    *info = {r.lambda, lambda_upper_bound(p), r.solves, r.infeasible ? 1 : 0};
    if (r.infeasible) {
      last_error = "even lambda_max leaves more than K violations";
      return SMOD_ERR_INFEASIBLE;
    }
    return SMOD_OK;
  });
}

smod_status smod_sweep_lambda(const smod_population* pop, const double* lambdas, size_t count,
                              const smod_solver_config* cfg, smod_tradeoff_point* out) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(lambdas, out);
    const auto points = sweep_lambda(p, std::span<const double>(lambdas, count), to_cpp(cfg));
    for (std::size_t j = 0; j < points.size(); ++j) {
      const TradeoffPoint& t = points[j];
      out[j] = {t.lambda,       t.seed,           t.dm,        t.fos_desired,
                t.fos_retained, t.filtered_count, t.objective, t.iterations,
                t.converged ? 1 : 0};
    }
    return SMOD_OK;
  });
}

smod_status smod_generalization_gap(const smod_population* train, const smod_population* test,
                                    const double* w, double b, double* dm_gap,
                                    double* fos_gap) {
  return guarded([&] {
    const Population& tr = deref(train);
    require(dm_gap, fos_gap);
    const auto [dg, fg] = generalization_gap(
        tr, deref(test), LinearModerator(vec(w, static_cast<size_t>(tr.dim())), b));
    *dm_gap = dg;
    *fos_gap = fg;
    return SMOD_OK;
  });
}

void smod_oracle_config_default(smod_oracle_config* cfg) {
  if (!cfg) return;
  const OracleConfig o;
  *cfg = {o.angle_steps, o.offset_steps, o.k, o.eps_slack, o.use_candidates ? 1 : 0};
}

smod_status smod_oracle_2d(const smod_population* pop, const smod_oracle_config* cfg,
                           double* w_out, smod_solve_result* out) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(w_out, out);
    try {
      fill(p, oracle_2d(p, to_cpp(cfg)), w_out, out);
    } catch (const NoFeasibleCandidateError& e) {
      store(e.least_violating().w(), w_out);
      *out = smod_solve_result{};
      out->b = e.least_violating().b();
      out->violations = e.violations();
      throw;
    }
    return SMOD_OK;
  });
}

smod_status smod_oracle_penalized_2d(const smod_population* pop, double lambda,
                                     const smod_oracle_config* cfg, double* w_out,
                                     smod_solve_result* out) {
  return guarded([&] {
    const Population& p = deref(pop);
    require(w_out, out);
    fill(p, oracle_penalized_2d(p, lambda, to_cpp(cfg)), w_out, out);
    return SMOD_OK;
  });
}

smod_status smod_toy_disk(const double* thetas, size_t count, double c, long samples,
                          uint64_t seed, smod_toy_point* out) {
  return guarded([&] {
    require(thetas, out);
    const auto points = toy_disk(std::span<const double>(thetas, count), c, samples, seed);
    for (std::size_t j = 0; j < points.size(); ++j)
      out[j] = {points[j].theta, points[j].dm, points[j].fos};
    return SMOD_OK;
  });
}

}  // extern "C"
