#include <algorithm>
#include <string>

#include "aging/error.hpp"
#include "aging/estimators.hpp"

namespace aging {

DeltaResult delta_curve(const PerformancePanel& panel) {
  const std::size_t ages = panel.n_ages();
  const AgeGrid& grid = panel.grid();
  DeltaDiagnostics diag;
  diag.deltas.resize(ages - 1);
  diag.pair_counts.resize(ages - 1);
  diag.observed_means.resize(ages);

  for (std::size_t k = 0; k + 1 < ages; ++k) {
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < panel.n_players(); ++i) {
      const auto now = panel.observed(i, k);
      const auto next = panel.observed(i, k + 1);
      if (now && next) {
        sum += *next - *now;
        ++pairs;
      }
    }
    if (pairs == 0) {
      throw Error(ErrorCode::InsufficientData, "no players observed at both ages " +
                                                   std::to_string(grid.age_at(k)) + " and " +
                                                   std::to_string(grid.age_at(k + 1)));
    }
    diag.deltas[k] = sum / pairs;
    diag.pair_counts[k] = pairs;
  }
  for (std::size_t k = 0; k < ages; ++k) {
    const auto obs = panel.observed_at_age(k);
    diag.observed_means[k] = sample_mean(obs);
  }

  std::vector<double> level(ages, 0.0);
  for (std::size_t k = 1; k < ages; ++k) level[k] = level[k - 1] + diag.deltas[k - 1];
  const double peak = *std::max_element(level.begin(), level.end());
  for (double& v : level) v -= peak;

  std::vector<int> support(ages);
  for (std::size_t k = 0; k < ages; ++k) support[k] = static_cast<int>(panel.observed_count(k));
  return {AgeCurve(grid, std::move(level), std::move(support)), std::move(diag)};
}

DeltaResult delta_plus_curve(const PerformancePanel& panel) {
  DeltaResult out = delta_curve(panel);
  const auto& means = out.diagnostics.observed_means;
  const double anchor = *std::max_element(means.begin(), means.end());
  for (double& v : out.curve.g) v += anchor;
  return out;
}

}  // namespace aging
