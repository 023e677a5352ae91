#pragma once

#include "stratmod/types.hpp"

namespace stratmod {

/// Population-level summary of one moderator.
///
/// fos_desired counts users whose ideal point is benign (the constraint the
/// optimization problem bounds). fos_retained counts users whose best
/// response is published; it is never smaller than fos_desired.
struct MetricReport {
  double dm = 0.0;
  double fos_desired = 1.0;
  double fos_retained = 1.0;
  long filtered_count = 0;
  long n = 0;
};

/// Squared displacement ||x - z*||^2 for benign-origin users, 0 otherwise.
double distortion(const UserProfile& u, const Trend& e, const Moderator& f);

/// Distortion the moderator removes relative to the trivial moderator.
double mitigation(const UserProfile& u, const Trend& e, const Moderator& f);

/// Sum of per-user mitigation, simulated through best responses.
double dm_population(const Population& pop, const Moderator& f);

/// Mitigation of a linear moderator without simulating best responses:
///
///   sum over {f(x_i) <= 0 < f(x_i + e/(2c_i))} of
///     [ (w.e / (2 c_i))^2 - (w.x_i + b)^2 ] / (w.w)
///
/// Invariant under positive rescaling of (w, b).
double dm_closed_form_linear(const Population& pop, const LinearModerator& f);

/// Closed form with the strict lower side of the index set relaxed to
/// f(x_i + e/(2c_i)) >= lower_slack.
double dm_closed_form_linear(const Population& pop, const LinearModerator& f,
                             double lower_slack);

MetricReport metrics(const Population& pop, const Moderator& f);

}  // namespace stratmod
