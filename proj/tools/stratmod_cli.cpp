// stratmod: command-line front end over the stratmod C API.

#include "stratmod/stratmod.h"

#include "run_config.hpp"
#include "svg_plot.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using smodcli::KeyValues;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string to_text(const T& v) {
  if constexpr (std::is_same_v<T, double>) return fmt_double(v);
  else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
  else if constexpr (std::is_same_v<T, std::string>) return v;
  else return std::to_string(v);
}

/// Failure carrying the exit code it maps to.
struct RunError {
  int exit_code;
  std::string message;
};

int exit_code_for(smod_status s) {
  switch (s) {
    case SMOD_OK: return kExitOk;
    case SMOD_ERR_INVALID_ARGUMENT: return kExitUsage;
    case SMOD_ERR_INFEASIBLE:
    case SMOD_ERR_NO_FEASIBLE_CANDIDATE: return kExitInfeasible;
    default: return kExitFailure;
  }
}

void check(smod_status s, const std::string& context = {}) {
  if (s == SMOD_OK) return;
  std::string msg = smod_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw RunError{exit_code_for(s), msg};
}

struct PopulationDeleter {
  void operator()(smod_population* p) const { smod_population_free(p); }
};
using PopulationPtr = std::unique_ptr<smod_population, PopulationDeleter>;

PopulationPtr load_population(const std::string& path) {
  smod_population* p = nullptr;
  check(smod_population_load(path.c_str(), &p), "loading " + path);
  return PopulationPtr(p);
}

PopulationPtr generate_population(const smod_mixture_spec& spec) {
  smod_population* p = nullptr;
  check(smod_population_generate(&spec, &p), "generating mixture");
  return PopulationPtr(p);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError{kExitFailure, "cannot open " + path + " for writing"};
  out << content;
  if (!out) throw RunError{kExitFailure, "failed writing " + path};
}

void append_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw RunError{kExitFailure, "cannot open " + path + " for appending"};
  out << content;
}

/// Options of one subcommand; remembers which ones belong in the footer.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& value, const std::string& help) {
    entries_.push_back({name, [&value] { return to_text(value); }});
    return app_->add_option("--" + name, value, help)->capture_default_str();
  }

  /// Output paths are left out of the footer so a replay may write elsewhere.
  CLI::Option* add_output(const std::string& name, std::string& value, const std::string& help) {
    return app_->add_option("--" + name, value, help);
  }

  KeyValues resolved() const {
    KeyValues kv;
    for (const auto& e : entries_) kv.emplace_back(e.name, e.text());
    return kv;
  }

  CLI::App* app() const { return app_; }

 private:
  struct Entry {
    std::string name;
    std::function<std::string()> text;
  };
  CLI::App* app_;
  std::vector<Entry> entries_;
};

void add_mixture_options(Params& p, smod_mixture_spec& m) {
  p.add("d", m.d, "feature dimension");
  p.add("n", m.n, "number of users");
  p.add("k", m.k, "mixture centers (must divide n)");
  p.add("sigma-lo", m.sigma_lo, "lower bound of per-center std-dev");
  p.add("sigma-hi", m.sigma_hi, "upper bound of per-center std-dev");
  p.add("c-lo", m.c_lo, "lower bound of manipulation cost");
  p.add("c-hi", m.c_hi, "upper bound of manipulation cost");
}

void add_solver_options(Params& p, smod_solver_config& c, bool with_lambda) {
  p.add("epsilon", c.epsilon, "surrogate smoothing parameter in (0,1)");
  if (with_lambda) p.add("lambda", c.lambda, "penalty strength");
  p.add("lr", c.learning_rate, "PGD learning rate");
  p.add("iters", c.max_iters, "PGD iteration cap");
  p.add("restarts", c.restarts, "PGD restarts");
  p.add("tol-grad", c.tol_grad, "projected-gradient stopping threshold");
  p.add("a-min", c.a_min, "floor for w.e/(2c) inside the surrogate");
}

std::string moderator_csv(const std::vector<double>& w, double b) {
  std::ostringstream out;
  for (std::size_t j = 0; j < w.size(); ++j) out << "w_" << j << ',';
  out << "b\n";
  for (double v : w) out << fmt_double(v) << ',';
  out << fmt_double(b) << '\n';
  return out.str();
}

std::string default_moderator_path(const std::string& out) {
  const auto dot = out.rfind(".csv");
  return (dot != std::string::npos && dot + 4 == out.size() ? out.substr(0, dot) : out) +
         ".moderator.csv";
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && hi >= lo) || points < 1)
    throw RunError{kExitUsage, "lambda grid needs 0 < lambda-min <= lambda-max and points >= 1"};
  std::vector<double> g;
  for (int j = 0; j < points; ++j)
    g.push_back(points == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(j) / (points - 1)));
  return g;
}

// ---- generate -------------------------------------------------------------

struct GenerateCmd {
  smod_mixture_spec spec{};
  std::string out;
  std::unique_ptr<Params> params;

  void add(CLI::App& root, std::function<void(std::function<int()>)> bind) {
    smod_mixture_spec_default(&spec);
    auto* app = root.add_subcommand("generate", "Write a seeded Gaussian-mixture population");
    app->footer(
        "Output: `# d=`, `# n=`, `# trend=` metadata lines, header x_0,...,x_{d-1},c,\n"
        "one row per user (17 significant digits), then the run footer.");
    params = std::make_unique<Params>(app);
    add_mixture_options(*params, spec);
    params->add("seed", spec.seed, "dataset seed");
    params->add_output("out", out, "output dataset CSV")->required();
    app->callback([this, bind] { bind([this] { return run(); }); });
  }

  int run() {
    auto pop = generate_population(spec);
    check(smod_population_save(pop.get(), out.c_str(), nullptr), "writing " + out);
    append_file(out, smodcli::footer("generate", params->resolved()));
    return kExitOk;
  }
};

// ---- solve ------------------------------------------------------------------

struct SolveCmd {
  smod_solver_config cfg{};
  std::string data, out, moderator_out;
  std::unique_ptr<Params> params;

  void add(CLI::App& root, std::function<void(std::function<int()>)> bind) {
    smod_solver_config_default(&cfg);
    auto* app = root.add_subcommand("solve", "Fit a linear moderator by projected gradient descent");
    app->footer(
        "Output: header lambda,dm,fos_desired,fos_retained,filtered_count,n,violations,penalty,"
        "objective,iterations,converged\n"
        "Moderator file: header w_0,...,w_{d-1},b (default <out>.moderator.csv).");
    params = std::make_unique<Params>(app);
    params->add("data", data, "population CSV")->required();
    add_solver_options(*params, cfg, true);
    params->add("seed", cfg.seed, "solver seed");
    params->add_output("out", out, "result CSV")->required();
    params->add_output("moderator-out", moderator_out, "moderator CSV");
    app->callback([this, bind] { bind([this] { return run(); }); });
  }

  int run() {
    auto pop = load_population(data);
    std::vector<double> w(smod_population_dim(pop.get()));
    smod_solve_result r{};
    check(smod_pgd_solve(pop.get(), &cfg, w.data(), &r), "solve");
    std::ostringstream csv;
    csv << "lambda,dm,fos_desired,fos_retained,filtered_count,n,violations,penalty,objective,"
           "iterations,converged\n"
        << fmt_double(cfg.lambda) << ',' << fmt_double(r.dm) << ','
        << fmt_double(r.metrics.fos_desired) << ',' << fmt_double(r.metrics.fos_retained) << ','
        << r.metrics.filtered_count << ',' << r.metrics.n << ',' << r.violations << ','
        << fmt_double(r.penalty) << ',' << fmt_double(r.objective) << ',' << r.iterations_used
        << ',' << r.converged << '\n'
        << smodcli::footer("solve", params->resolved());
    write_file(out, csv.str());
    write_file(moderator_out.empty() ? default_moderator_path(out) : moderator_out,
               moderator_csv(w, r.b) + smodcli::footer("solve", params->resolved()));
    return kExitOk;
  }
};

// ---- calibrate ----------------------------------------------------------------

struct CalibrateCmd {
  smod_solver_config cfg{};
  long k = 0;
  double delta = 1e-3;
  std::string data, out, moderator_out;
  std::unique_ptr<Params> params;

  void add(CLI::App& root, std::function<void(std::function<int()>)> bind) {
    smod_solver_config_default(&cfg);
    auto* app = root.add_subcommand(
        "calibrate", "Bisect the penalty strength to meet a violation budget K");
    app->footer(
        "Output: header lambda,lambda_max,K,violations,solves,infeasible,dm,fos_desired,"
        "fos_retained,filtered_count,objective,iterations,converged\n"
        "Exit code 3 when even lambda_max exceeds the budget (outputs are still written).");
    params = std::make_unique<Params>(app);
    params->add("data", data, "population CSV")->required();
    params->add("K", k, "maximum number of users whose ideal point is filtered")->required();
    params->add("delta", delta, "lambda precision");
    add_solver_options(*params, cfg, false);
    params->add("seed", cfg.seed, "base solver seed");
    params->add_output("out", out, "result CSV")->required();
    params->add_output("moderator-out", moderator_out, "moderator CSV");
    app->callback([this, bind] { bind([this] { return run(); }); });
  }

  int run() {
    auto pop = load_population(data);
    std::vector<double> w(smod_population_dim(pop.get()));
    smod_solve_result r{};
    smod_calibration info{};
    const smod_status s = smod_calibrate_lambda(pop.get(), k, delta, &cfg, w.data(), &r, &info);
    if (s != SMOD_OK && s != SMOD_ERR_INFEASIBLE) check(s, "calibrate");
    std::ostringstream csv;
    csv << "lambda,lambda_max,K,violations,solves,infeasible,dm,fos_desired,fos_retained,"
           "filtered_count,objective,iterations,converged\n"
        << fmt_double(info.lambda) << ',' << fmt_double(info.lambda_max) << ',' << k << ','
        << r.violations << ',' << info.solves << ',' << info.infeasible << ','
        << fmt_double(r.dm) << ',' << fmt_double(r.metrics.fos_desired) << ','
        << fmt_double(r.metrics.fos_retained) << ',' << r.metrics.filtered_count << ','
        << fmt_double(r.objective) << ',' << r.iterations_used << ',' << r.converged << '\n'
        << smodcli::footer("calibrate", params->resolved());
    write_file(out, csv.str());
    write_file(moderator_out.empty() ? default_moderator_path(out) : moderator_out,
               moderator_csv(w, r.b) + smodcli::footer("calibrate", params->resolved()));
    if (s == SMOD_ERR_INFEASIBLE) {
      std::cerr << "calibrate: infeasible: " << smod_last_error() << '\n';
      return kExitInfeasible;
    }
    return kExitOk;
  }
};

// ---- sweep ----------------------------------------------------------------------

struct SweepCmd {
  smod_mixture_spec spec{};
  smod_solver_config cfg{};
  std::string data, out, plot;
  int seeds = 20;
  std::uint64_t seed_base = 0;
  double lambda_min = 0.1, lambda_max = 100.0;
  int lambda_points = 10;
  int threads = 0;
  std::unique_ptr<Params> params;

  void add(CLI::App& root, std::function<void(std::function<int()>)> bind) {
    smod_mixture_spec_default(&spec);
    smod_solver_config_default(&cfg);
    auto* app = root.add_subcommand(
        "sweep", "Solve over a log-spaced lambda grid for many independently seeded datasets");
    app->footer(
        "Output: header lambda,seed,dm,fos_desired,fos_retained,filtered_count,objective,"
        "iterations,converged\n"
        "One row per (seed, lambda). Seed s generates the mixture with seed seed-base+s and\n"
        "solves with base seed seed-base+s; with --data the dataset is fixed and only the\n"
        "solver seed varies. --plot writes an SVG of mean DM and fos_retained vs lambda with\n"
        "1-sigma bands.");
    params = std::make_unique<Params>(app);
    params->add("data", data, "fixed population CSV (default: generate per seed)");
    add_mixture_options(*params, spec);
    add_solver_options(*params, cfg, false);
    params->add("seeds", seeds, "number of seeds");
    params->add("seed-base", seed_base, "first seed");
    params->add("lambda-min", lambda_min, "smallest lambda");
    params->add("lambda-max", lambda_max, "largest lambda");
    params->add("lambda-points", lambda_points, "grid size");
    params->add_output("out", out, "sweep CSV")->required();
    params->add_output("plot", plot, "SVG plot path");
    app->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
    app->callback([this, bind] { bind([this] { return run(); }); });
  }

  int run() {
    if (seeds < 1) throw RunError{kExitUsage, "--seeds must be at least 1"};
    const auto lambdas = log_grid(lambda_min, lambda_max, lambda_points);
    PopulationPtr fixed;
    if (!data.empty()) fixed = load_population(data);

    const auto n_seeds = static_cast<std::size_t>(seeds);
    std::vector<std::vector<smod_tradeoff_point>> rows(n_seeds);
    std::vector<RunError> errors(n_seeds, RunError{kExitOk, {}});
    auto work = [&](std::size_t s) {
      try {
        const std::uint64_t seed = seed_base + s;
        PopulationPtr own;
        const smod_population* pop = fixed.get();
        if (!pop) {
          smod_mixture_spec m = spec;
          m.seed = seed;
          own = generate_population(m);
          pop = own.get();
        }
        smod_solver_config c = cfg;
        c.seed = seed;
        rows[s].resize(lambdas.size());
        check(smod_sweep_lambda(pop, lambdas.data(), lambdas.size(), &c, rows[s].data()),
              "sweep seed " + std::to_string(seed));
      } catch (const RunError& e) {
        errors[s] = e;
      }
    };
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n_seeds));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t s = t; s < n_seeds; s += workers) work(s);
      });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e.exit_code != kExitOk) throw e;

    std::ostringstream csv;
    csv << "lambda,seed,dm,fos_desired,fos_retained,filtered_count,objective,iterations,"
           "converged\n";
    for (std::size_t s = 0; s < n_seeds; ++s)
      for (const auto& p : rows[s])
        csv << fmt_double(p.lambda) << ',' << seed_base + s << ',' << fmt_double(p.dm) << ','
            << fmt_double(p.fos_desired) << ',' << fmt_double(p.fos_retained) << ','
            << p.filtered_count << ',' << fmt_double(p.objective) << ',' << p.iterations << ','
            << p.converged << '\n';
    csv << smodcli::footer("sweep", params->resolved());
    write_file(out, csv.str());
    if (!plot.empty()) write_file(plot, render_plot(lambdas, rows));
    return kExitOk;
  }

  static std::string render_plot(const std::vector<double>& lambdas,
                                 const std::vector<std::vector<smod_tradeoff_point>>& rows) {
    smodcli::LinePlot p;
    p.title = "Distortion mitigation and retained content vs penalty strength";
    p.x_label = "lambda (log scale)";
    p.left_label = "distortion mitigation (DM)";
    p.right_label = "fraction of content retained";
    p.x = lambdas;
    smodcli::Series dm{"DM (mean, 1 sigma band)", "#1f77b4", smodcli::YAxis::Left, {}, {}, {}};
    smodcli::Series fos{"fos_retained (mean, 1 sigma band)", "#ff7f0e", smodcli::YAxis::Right,
                        {}, {}, {}};
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      double sd = 0, sd2 = 0, sf = 0, sf2 = 0;
      for (const auto& r : rows) {
        sd += r[j].dm, sd2 += r[j].dm * r[j].dm;
        sf += r[j].fos_retained, sf2 += r[j].fos_retained * r[j].fos_retained;
      }
      const double n = static_cast<double>(rows.size());
      const double md = sd / n, mf = sf / n;
      const double vd = std::sqrt(std::max(0.0, sd2 / n - md * md));
      const double vf = std::sqrt(std::max(0.0, sf2 / n - mf * mf));
      dm.y.push_back(md), dm.band_lo.push_back(md - vd), dm.band_hi.push_back(md + vd);
      fos.y.push_back(mf), fos.band_lo.push_back(mf - vf), fos.band_hi.push_back(mf + vf);
    }
    p.series = {dm, fos};
    return p.render();
  }
};

// ---- oracle -----------------------------------------------------------------------

struct OracleCmd {
  smod_oracle_config cfg{};
  std::string data, out, mode = "constrained";
  double lambda = 0.0;
  bool use_candidates = true;
  std::unique_ptr<Params> params;

  void add(CLI::App& root, std::function<void(std::function<int()>)> bind) {
    smod_oracle_config_default(&cfg);
    auto* app = root.add_subcommand(
        "oracle", "Brute-force the best planar linear moderator over a candidate grid");
    app->footer(
        "Output: header mode,lambda,K,dm,penalty,violations,fos_desired,fos_retained,w_0,w_1,b\n"
        "constrained: maximize DM subject to at most K violations (exit 3 if none qualifies).\n"
        "penalized: minimize -DM + lambda * ||g||_2^2.");
    params = std::make_unique<Params>(app);
    params->add("data", data, "planar population CSV")->required();
    params->add("mode", mode, "constrained | penalized")
        ->check(CLI::IsMember({"constrained", "penalized"}));
    params->add("K", cfg.k, "violation budget (constrained mode)");
    params->add("lambda", lambda, "penalty strength (penalized mode)");
    params->add("angle-steps", cfg.angle_steps, "direction grid size");
    params->add("offset-steps", cfg.offset_steps, "offset grid intervals");
    params->add("eps-slack", cfg.eps_slack, "relaxation of the strict index-set bound");
    params->add("use-candidates", use_candidates, "add point-incident hyperplanes");
    params->add_output("out", out, "result CSV")->required();
    app->callback([this, bind] { bind([this] { return run(); }); });
  }

  int run() {
    auto pop = load_population(data);
    cfg.use_candidates = use_candidates ? 1 : 0;
    double w[2] = {0.0, 0.0};
    smod_solve_result r{};
    const smod_status s = mode == "penalized"
                              ? smod_oracle_penalized_2d(pop.get(), lambda, &cfg, w, &r)
                              : smod_oracle_2d(pop.get(), &cfg, w, &r);
    if (s == SMOD_ERR_NO_FEASIBLE_CANDIDATE) {
      std::cerr << "oracle: " << smod_last_error() << " (least violating: w=(" << w[0] << ", "
                << w[1] << "), b=" << r.b << ")\n";
      return kExitInfeasible;
    }
    check(s, "oracle");
    std::ostringstream csv;
    csv << "mode,lambda,K,dm,penalty,violations,fos_desired,fos_retained,w_0,w_1,b\n"
        << mode << ',' << fmt_double(lambda) << ',' << cfg.k << ',' << fmt_double(r.dm) << ','
        << fmt_double(r.penalty) << ',' << r.violations << ','
        << fmt_double(r.metrics.fos_desired) << ',' << fmt_double(r.metrics.fos_retained) << ','
        << fmt_double(w[0]) << ',' << fmt_double(w[1]) << ',' << fmt_double(r.b) << '\n'
        << smodcli::footer("oracle", params->resolved());
    write_file(out, csv.str());
    return kExitOk;
  }
};

// ---- toy --------------------------------------------------------------------------

struct ToyCmd {
  int theta_points = 41;
  double c = 0.5;
  long samples = 100000;
  std::uint64_t seed = 0;
  std::string out;
  std::unique_ptr<Params> params;

  void add(CLI::App& root, std::function<void(std::function<int()>)> bind) {
    auto* app = root.add_subcommand(
        "toy", "Unit-disk toy model: vertical boundaries x_1 = theta with trend (1, 0)");
    app->footer("Output: header theta,dm,fos (dm is mean mitigation per sample).");
    params = std::make_unique<Params>(app);
    params->add("theta-points", theta_points, "evenly spaced thetas over [-1, 1]");
    params->add("c", c, "manipulation cost of every sample");
    params->add("samples", samples, "Monte Carlo samples");
    params->add("seed", seed, "sampling seed");
    params->add_output("out", out, "result CSV")->required();
    app->callback([this, bind] { bind([this] { return run(); }); });
  }

  int run() {
    if (theta_points < 2) throw RunError{kExitUsage, "--theta-points must be at least 2"};
    std::vector<double> thetas;
    for (int j = 0; j < theta_points; ++j) thetas.push_back(-1.0 + 2.0 * j / (theta_points - 1));
    std::vector<smod_toy_point> pts(thetas.size());
    check(smod_toy_disk(thetas.data(), thetas.size(), c, samples, seed, pts.data()), "toy");
    std::ostringstream csv;
    csv << "theta,dm,fos\n";
    for (const auto& p : pts)
      csv << fmt_double(p.theta) << ',' << fmt_double(p.dm) << ',' << fmt_double(p.fos) << '\n';
    csv << smodcli::footer("toy", params->resolved());
    write_file(out, csv.str());
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args;
  try {
    args = smodcli::expand_config_args(argc, argv);
  } catch (const smodcli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"stratmod: strategic content moderation toolkit (library " +
               std::string(smod_version()) + ")"};
  app.name("stratmod");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer("Every subcommand accepts --config FILE with `key = value` lines (flags win).\n"
             "An output CSV can be passed as FILE to replay the run from its footer.");

  std::function<int()> selected;
  auto bind = [&selected](std::function<int()> run) { selected = std::move(run); };

  GenerateCmd generate;
  SolveCmd solve;
  CalibrateCmd calibrate;
  SweepCmd sweep;
  OracleCmd oracle;
  ToyCmd toy;
  generate.add(app, bind);
  solve.add(app, bind);
  calibrate.add(app, bind);
  sweep.add(app, bind);
  oracle.add(app, bind);
  toy.add(app, bind);
  for (auto* sub : app.get_subcommands({})) sub->add_option("--config", "key = value file");

  std::vector<char*> cargv;
  for (auto& a : args) cargv.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << '\n' << app.help();
    return kExitUsage;
  }

  if (!selected) return kExitUsage;
  try {
    return selected();
  } catch (const RunError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.exit_code;
  }
}
