#pragma once

#include <vector>

#include "aging/panel.hpp"

namespace aging {

struct DeltaDiagnostics {
  std::vector<double> deltas;     // K-1 year-over-year changes
  std::vector<int> pair_counts;   // players observed at both t_k and t_k+1
  std::vector<double> observed_means;
};

struct DeltaResult {
  AgeCurve curve;
  DeltaDiagnostics diagnostics;
};

/// Level curve from accumulated year-over-year deltas, shifted so its maximum
/// is exactly zero. Throws InsufficientData naming the first age pair with no
/// co-observed players.
DeltaResult delta_curve(const PerformancePanel& panel);

/// delta_curve shifted up by the largest per-age observed mean.
DeltaResult delta_plus_curve(const PerformancePanel& panel);

struct QuantileDiagnostics {
  std::vector<double> nu;
  std::vector<double> big_g;
  std::vector<double> theta;
  std::vector<double> s_obs;
  std::vector<double> sigma_hat;
  std::vector<double> zeta;
  std::size_t pool_size = 0;
};

struct QuantileResult {
  AgeCurve curve;
  QuantileDiagnostics diagnostics;
};

/// Population percentile matched by the q-quantile of n_t observed values out
/// of a pool of N_t: 1 - (n_t / N_t)(1 - q).
double population_percentile(std::size_t observed, std::size_t pool, double q);

/// Per-age population mean recovered from the observed upper tail under a
/// Normal model.
QuantileResult quantile_curve(const PerformancePanel& panel, std::size_t pool_size, double q);

/// spline or quad mean curve with none / fixed / random-quad / random-spline
/// player terms, fitted to the observed cells of `panel`.
FitResult fit_regression_curve(const PerformancePanel& panel, const EstimatorSpec& spec);

/// Per-player ordinary least squares of the player terms that `spec.effects`
/// would shrink, on residuals from the fixed-effects curve. Players with too
/// few cells are left at zero. This is the pilot used to set random-effect
/// penalties.
PlayerEffects unpenalized_player_effects(const PerformancePanel& panel, const EstimatorSpec& spec);

}  // namespace aging
