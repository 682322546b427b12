#include "aging/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aging/error.hpp"
#include "aging/estimate.hpp"
#include "aging/spline.hpp"

namespace aging {

void SimulationConfig::validate() const {
  if (n_players == 0) throw Error(ErrorCode::InvalidArgument, "simulation needs at least one player");
  if (!(t_peak > grid.t_min() && t_peak < grid.t_max())) {
    throw Error(ErrorCode::InvalidArgument, "t_peak must lie strictly inside the age grid");
  }
  if (sigma_gamma < 0 || sigma_b < 0 || sigma_eps < 0) {
    throw Error(ErrorCode::InvalidArgument, "standard deviations must be nonnegative");
  }
  if (!pi_schedule.empty()) {
    if (pi_schedule.size() != grid.size()) {
      throw Error(ErrorCode::InvalidArgument, "pi schedule needs one entry per age");
    }
    for (double p : pi_schedule) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "pi schedule entries must lie in [0, 1]");
    }
  }
  if (replications < 1) throw Error(ErrorCode::InvalidArgument, "replications must be positive");
}

std::vector<double> SimulationConfig::resolved_pi() const {
  return pi_schedule.empty() ? default_pi_schedule(grid) : pi_schedule;
}

namespace {

double curve_value(const SimulationConfig& cfg, int age) {
  const double d = age - cfg.t_peak;
  double g = cfg.omega + cfg.a * d * d;
  if (age > cfg.t_peak) g += cfg.b * d * d + cfg.c * d * d * d;
  return g;
}

}  // namespace

AgeCurve true_mean_curve(const SimulationConfig& config) {
  std::vector<double> g(config.grid.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = curve_value(config, config.grid.age_at(k));
  return AgeCurve(config.grid, std::move(g));
}

SimulatedPanel simulate_panel(const SimulationConfig& config, Rng& rng) {
  config.validate();
  const std::size_t n = config.n_players;
  const std::size_t ages = config.grid.size();
  TruthBundle truth;
  truth.true_curve = true_mean_curve(config);
  truth.player_intercepts.resize(n);
  truth.player_quads.resize(n);
  truth.noiseless_values.resize(n * ages);
  std::vector<double> values(n * ages);
  std::vector<std::string> ids(n);

  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = "p" + std::to_string(i + 1);
    const double gamma = rng.normal(0.0, config.sigma_gamma);
    const double bi = rng.normal(0.0, config.sigma_b);
    truth.player_intercepts[i] = gamma;
    truth.player_quads[i] = bi;
    for (std::size_t k = 0; k < ages; ++k) {
      const int age = config.grid.age_at(k);
      const double d = age - config.t_peak;
      const double effect = gamma + (age > config.t_peak ? bi * d * d : 0.0);
      const double noiseless = truth.true_curve.g[k] + effect;
      truth.noiseless_values[i * ages + k] = noiseless;
      values[i * ages + k] = noiseless + rng.normal(0.0, config.sigma_eps);
    }
  }
  return {PerformancePanel::complete(config.grid, std::move(ids), std::move(values)), std::move(truth)};
}

std::vector<double> default_pi_schedule(const AgeGrid& grid) {
  if (grid.t_min() > 18 || grid.t_max() < 36) {
    throw Error(ErrorCode::InvalidArgument, "default observed-fraction schedule needs a grid covering ages 18..36");
  }
  const std::vector<double> anchor_ages{18.0, 23.0, 24.0, 36.0};
  Eigen::Vector4d anchor_values(0.09, 0.63, 0.63, 0.09);
  const NaturalSpline spline(anchor_ages);
  const Eigen::MatrixXd basis = spline.evaluate(anchor_ages);
  const Eigen::VectorXd coef = basis.fullPivLu().solve(anchor_values);

  std::vector<double> pi(grid.size());
  for (std::size_t k = 0; k < pi.size(); ++k) {
    pi[k] = std::clamp(spline.evaluate(static_cast<double>(grid.age_at(k))).dot(coef), 0.01, 1.0);
  }
  // Unimodal: nondecreasing through 23, nonincreasing from 24.
  const std::size_t rise_end = grid.index_of(23);
  const std::size_t fall_start = grid.index_of(24);
  for (std::size_t k = rise_end; k-- > 0;) pi[k] = std::min(pi[k], pi[k + 1]);
  for (std::size_t k = fall_start + 1; k < pi.size(); ++k) pi[k] = std::min(pi[k], pi[k - 1]);
  return pi;
}

MaskResult generate_mask(const PerformancePanel& full_panel, const std::vector<double>& pi_schedule, Rng& rng) {
  const std::size_t n = full_panel.n_players();
  const std::size_t ages = full_panel.n_ages();
  if (!full_panel.fully_observed()) throw Error(ErrorCode::InvalidArgument, "missingness needs a fully observed panel");
  if (pi_schedule.size() != ages) throw Error(ErrorCode::InvalidArgument, "pi schedule needs one entry per age");

  MaskResult out;
  out.mask.assign(n * ages, 0);
  MaskDiagnostics& d = out.diagnostics;
  d.target_counts.resize(ages);
  d.log_weights.resize(n * ages);
  d.selection_probs.assign(ages, std::vector<double>(n));

  for (std::size_t i = 0; i < n; ++i) {
    double cumulative = 0.0;
    for (std::size_t k = 0; k < ages; ++k) {
      cumulative += *full_panel.observed(i, k);
      d.log_weights[i * ages + k] = cumulative;
    }
  }

  std::vector<std::pair<double, std::size_t>> keys(n);
  for (std::size_t k = 0; k < ages; ++k) {
    const long target = std::lround(static_cast<double>(n) * pi_schedule[k]);
    if (target < 0 || static_cast<std::size_t>(target) > n) {
      throw Error(ErrorCode::InvalidArgument, "schedule asks for " + std::to_string(target) + " of " +
                                                  std::to_string(n) + " players at age " +
                                                  std::to_string(full_panel.grid().age_at(k)));
    }
    d.target_counts[k] = static_cast<int>(target);

    double peak = -kInf;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, d.log_weights[i * ages + k]);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::exp(d.log_weights[i * ages + k] - peak);
    for (std::size_t i = 0; i < n; ++i) d.selection_probs[k][i] = std::exp(d.log_weights[i * ages + k] - peak) / total;

    // Gumbel-perturbed log weights: the top `target` keys are distributed as
    // successive draws without replacement proportional to the weights.
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = {d.log_weights[i * ages + k] - std::log(-std::log(rng.uniform())), i};
    }
    std::partial_sort(keys.begin(), keys.begin() + target, keys.end(),
                      [](const auto& l, const auto& r) { return l.first > r.first || (l.first == r.first && l.second < r.second); });
    for (long j = 0; j < target; ++j) out.mask[keys[static_cast<std::size_t>(j)].second * ages + k] = 1;
  }
  return out;
}

MaskedSimulation simulate_masked(const SimulationConfig& config, std::uint64_t seed) {
  Rng sim_rng(derive_seed(seed, 1));
  Rng mask_rng(derive_seed(seed, 2));
  SimulatedPanel sim = simulate_panel(config, sim_rng);
  MaskResult mask = generate_mask(sim.panel, config.resolved_pi(), mask_rng);
  PerformancePanel masked = sim.panel.with_mask(mask.mask);
  return {std::move(sim), std::move(masked), std::move(mask)};
}

EvaluationReport run_factorial(const SimulationConfig& base, const SweepSets& sweep,
                               const std::vector<EstimatorSpec>& specs, int replications, std::uint64_t root_seed,
                               bool sbd_z_normalize) {
  if (sweep.n_players.empty() || sweep.omega.empty() || sweep.sigma_gamma.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sweep sets must be nonempty");
  }
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one estimator spec");
  if (replications < 1) throw Error(ErrorCode::InvalidArgument, "replications must be positive");

  EvaluationReport report;
  report.grid = base.grid;
  report.replications = replications;
  std::uint64_t cell_index = 0;
  for (std::size_t n : sweep.n_players) {
    for (double omega : sweep.omega) {
      for (double sg : sweep.sigma_gamma) {
        SimulationConfig cfg = base;
        cfg.n_players = n;
        cfg.omega = omega;
        cfg.sigma_gamma = sg;
        cfg.validate();
        const AgeCurve truth = true_mean_curve(cfg);

        std::vector<std::vector<AgeCurve>> curves(specs.size());
        CellReport cell;
        cell.cell = {n, omega, sg};
        cell.outcomes.resize(specs.size());
        for (std::size_t s = 0; s < specs.size(); ++s) cell.outcomes[s].spec = specs[s].name();

        for (int r = 0; r < replications; ++r) {
          const std::uint64_t rep_seed = derive_seed(root_seed, cell_index, static_cast<std::uint64_t>(r));
          const MaskedSimulation run = simulate_masked(cfg, rep_seed);
          for (std::size_t s = 0; s < specs.size(); ++s) {
            Rng rng(derive_seed(rep_seed, 3, hash_label(specs[s].name())));
            try {
              AgeCurve est = estimate(run.masked, specs[s], n, rng).curve;
              const double sbd = shape_based_distance(est, truth, sbd_z_normalize);
              cell.outcomes[s].sbd_values.push_back(sbd);
              curves[s].push_back(std::move(est));
            } catch (const Error&) {
              ++cell.outcomes[s].failure_count;
            }
          }
        }
        for (std::size_t s = 0; s < specs.size(); ++s) {
          cell.outcomes[s].rmse_by_age = curves[s].empty()
                                             ? std::vector<double>(cfg.grid.size(), std::nan(""))
                                             : rmse_by_age(curves[s], truth);
        }
        report.cells.push_back(std::move(cell));
        ++cell_index;
      }
    }
  }
  return report;
}

}  // namespace aging
