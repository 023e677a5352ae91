#include "stratmod/distortion_metrics.hpp"

#include "stratmod/core_model.hpp"

namespace stratmod {

namespace {

// Same arithmetic as an unconstrained best response, so unaffected users cancel exactly.
double unmoderated_distortion(const UserProfile& u, const Trend& e) {
  return (ideal_point(u, e) - u.x()).squaredNorm();
}

template <class Accept>
double closed_form(const Population& pop, const LinearModerator& f, Accept upper_side) {
  if (f.w().size() != pop.dim()) fail("moderator and population dimensions differ");
  const Vector& w = f.w();
  const double we = w.dot(pop.trend().e());
  const Vector fx = (pop.features().transpose() * w).array() + f.b();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pop.size(); ++i) {
    const double a = we / (2.0 * pop.costs()[i]);
    if (!is_benign(fx[i]) || !upper_side(fx[i] + a)) continue;
    sum += a * a - fx[i] * fx[i];
  }
  return sum / w.squaredNorm();
}

}  // namespace

double distortion(const UserProfile& u, const Trend& e, const Moderator& f) {
  if (!is_benign(f, u.x())) return 0.0;
  return (u.x() - best_response(u, e, f).z_star).squaredNorm();
}

double mitigation(const UserProfile& u, const Trend& e, const Moderator& f) {
  if (!is_benign(f, u.x())) return 0.0;
  return unmoderated_distortion(u, e) - distortion(u, e, f);
}

double dm_population(const Population& pop, const Moderator& f) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pop.size(); ++i) sum += mitigation(pop.user(i), pop.trend(), f);
  return sum;
}

double dm_closed_form_linear(const Population& pop, const LinearModerator& f) {
  return closed_form(pop, f, [](double ideal_score) { return !is_benign(ideal_score); });
}

double dm_closed_form_linear(const Population& pop, const LinearModerator& f,
                             double lower_slack) {
  return closed_form(pop, f, [lower_slack](double ideal_score) {
    return ideal_score >= lower_slack;
  });
}

MetricReport metrics(const Population& pop, const Moderator& f) {
  MetricReport r;
  r.n = static_cast<long>(pop.size());
  long desired = 0;
  for (Eigen::Index i = 0; i < pop.size(); ++i) {
    const UserProfile u = pop.user(i);
    const auto br = best_response(u, pop.trend(), f);
    if (is_benign(f, ideal_point(u, pop.trend()))) ++desired;
    if (br.filtered) ++r.filtered_count;
    if (is_benign(f, u.x()))
      r.dm += unmoderated_distortion(u, pop.trend()) - (u.x() - br.z_star).squaredNorm();
  }
  r.fos_desired = static_cast<double>(desired) / static_cast<double>(r.n);
  r.fos_retained = static_cast<double>(r.n - r.filtered_count) / static_cast<double>(r.n);
  return r;
}

}  // namespace stratmod
