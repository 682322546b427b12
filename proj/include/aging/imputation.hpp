#pragma once

#include <optional>
#include <vector>

#include "aging/panel.hpp"
#include "aging/random.hpp"

namespace aging {

enum class MeanSource { Regression, Quantile };

struct ImputationConfig {
  double boundary_quantile = 0.75;
  bool truncate = true;
  int passes = 2;
  MeanSource mean_source = MeanSource::Regression;
  /// Pool N_t for the quantile mean source; defaults to the panel's players.
  std::optional<std::size_t> pool_size;
};

struct MissingCell {
  std::size_t player;
  std::size_t age_index;
};

struct ImputationTrace {
  std::vector<double> boundary;  // per age; +inf without truncation
  std::vector<MissingCell> cells;
  std::vector<double> first_pass_means;
  std::vector<double> second_pass_means;
  std::vector<double> imputed;
  std::vector<std::uint8_t> original_mask;
  double sigma0 = 0.0;
};

struct ImputationResult {
  PerformancePanel completed;
  ImputationTrace trace;
};

/// Per-age q-quantile of observed values smoothed by a natural spline with
/// `df` columns, evaluated on the grid.
std::vector<double> smoothed_boundary(const PerformancePanel& panel, double q, int df);

/// Two-pass imputation of every unobserved cell. The mean model is a natural
/// spline (spec.spline_df) with fixed player intercepts; with the quantile
/// mean source the spline curve is replaced by the quantile estimates.
ImputationResult impute_panel(const PerformancePanel& panel, const EstimatorSpec& spec,
                              const ImputationConfig& config, Rng& rng);

}  // namespace aging
