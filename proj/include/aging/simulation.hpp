#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aging/evaluation.hpp"
#include "aging/panel.hpp"
#include "aging/random.hpp"

namespace aging {

/// Generating curve, player effects, noise and missingness for simulated
/// careers. Defaults reproduce the reference simulation design.
struct SimulationConfig {
  std::size_t n_players = 600;
  double omega = 0.0;
  double a = -1.0 / 9.0;
  double b = -6.0 / 1000.0;
  double c = 45.0 / 10000.0;
  int t_peak = 25;
  double sigma_gamma = 0.8;
  double sigma_b = 0.02;
  double sigma_eps = 1.0;
  AgeGrid grid{18, 40};
  /// Observed fraction per age; default_pi_schedule(grid) when empty.
  std::vector<double> pi_schedule;
  std::uint64_t seed = 0;
  int replications = 200;

  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;
  std::vector<double> resolved_pi() const;
};

struct TruthBundle {
  AgeCurve true_curve;
  std::vector<double> player_intercepts;
  std::vector<double> player_quads;
  std::vector<double> noiseless_values;  // N x K, row-major
};

struct SimulatedPanel {
  PerformancePanel panel;  // fully observed
  TruthBundle truth;
};

struct MaskDiagnostics {
  std::vector<int> target_counts;
  /// log rho_it (cumulative performance), N x K row-major.
  std::vector<double> log_weights;
  /// K rows of N selection probabilities, each row summing to 1.
  std::vector<std::vector<double>> selection_probs;
};

struct MaskResult {
  std::vector<std::uint8_t> mask;  // N x K row-major
  MaskDiagnostics diagnostics;
};

AgeCurve true_mean_curve(const SimulationConfig& config);

SimulatedPanel simulate_panel(const SimulationConfig& config, Rng& rng);

/// Unimodal observed-fraction schedule interpolating the league anchors at
/// ages 18, 23, 24 and 36. Grid must cover 18..36.
std::vector<double> default_pi_schedule(const AgeGrid& grid);

/// Cumulative-performance missingness: at each age, round(N pi_t) players
/// drawn without replacement with probability proportional to
/// exp(sum of their values from the first age through t).
MaskResult generate_mask(const PerformancePanel& full_panel, const std::vector<double>& pi_schedule, Rng& rng);

struct SweepSets {
  std::vector<std::size_t> n_players{300, 600, 1000};
  std::vector<double> omega{0.0, 1.0};
  std::vector<double> sigma_gamma{0.4, 0.8, 1.5};
};

/// Full factorial over the sweep sets; each replication simulates, masks and
/// scores every spec. Replication r of cell c uses seeds derived from
/// (root_seed, c, r), so reports are reproducible.
EvaluationReport run_factorial(const SimulationConfig& base, const SweepSets& sweep,
                               const std::vector<EstimatorSpec>& specs, int replications, std::uint64_t root_seed,
                               bool sbd_z_normalize = false);

/// One simulate + mask draw under the seeds the factorial runner uses.
struct MaskedSimulation {
  SimulatedPanel simulated;
  PerformancePanel masked;
  MaskResult mask;
};
MaskedSimulation simulate_masked(const SimulationConfig& config, std::uint64_t seed);

}  // namespace aging
