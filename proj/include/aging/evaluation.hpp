#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aging/panel.hpp"
#include "aging/random.hpp"

namespace aging {

/// sqrt of the mean squared error at each age across `estimates`.
std::vector<double> rmse_by_age(const std::vector<AgeCurve>& estimates, const AgeCurve& truth);

/// 1 - max over shifts of the zero-padded cross-correlation divided by the
/// product of the two norms. In [0, 2]; 0 for positively proportional curves.
/// With z_normalize each curve is first centered and scaled to unit sd.
double shape_based_distance(const AgeCurve& x, const AgeCurve& y, bool z_normalize = false);
double shape_based_distance(const std::vector<double>& x, const std::vector<double>& y, bool z_normalize = false);

struct SweepCell {
  std::size_t n_players = 0;
  double omega = 0.0;
  double sigma_gamma = 0.0;
};

struct SpecOutcome {
  std::string spec;
  std::vector<double> rmse_by_age;  // over successful replications
  std::vector<double> sbd_values;   // one per successful replication
  int failure_count = 0;
};

struct CellReport {
  SweepCell cell;
  std::vector<SpecOutcome> outcomes;  // in spec order
};

struct EvaluationReport {
  AgeGrid grid;
  int replications = 0;
  std::vector<CellReport> cells;
};

double mean_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

struct BootstrapOptions {
  std::optional<std::size_t> pool_size;
  /// Row indices for one resample of n players; defaults to n uniform draws
  /// with replacement.
  std::function<std::vector<std::size_t>(std::size_t n, Rng& rng)> resample;
  int max_retries = 3;
};

struct BootstrapResult {
  std::vector<AgeCurve> curves;
  std::vector<int> failed_draws;
};

/// B player-level bootstrap refits of `spec`. Draw b, attempt j uses the seed
/// derive_seed(root_seed, b, j); a draw that still fails after max_retries
/// retries is listed in failed_draws.
BootstrapResult bootstrap_curves(const PerformancePanel& panel, const EstimatorSpec& spec, int draws,
                                 std::uint64_t root_seed, const BootstrapOptions& options = {});

}  // namespace aging
