#include "aging/imputation.hpp"

#include <cmath>
#include <string>

#include "aging/error.hpp"
#include "aging/estimators.hpp"
#include "aging/spline.hpp"

namespace aging {

std::vector<double> smoothed_boundary(const PerformancePanel& panel, double q, int df) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "boundary quantile must lie in (0, 1), got " + std::to_string(q));
  }
  const std::size_t ages = panel.n_ages();
  Eigen::VectorXd per_age(static_cast<Eigen::Index>(ages));
  for (std::size_t k = 0; k < ages; ++k) {
    const auto obs = panel.observed_at_age(k);
    if (obs.empty()) {
      throw Error(ErrorCode::InsufficientData,
                  "boundary undefined: no observed values at age " + std::to_string(panel.grid().age_at(k)));
    }
    per_age(static_cast<Eigen::Index>(k)) = sample_quantile(obs, q);
  }
  const std::vector<double> grid_ages = panel.grid().ages_real();
  const NaturalSpline spline = NaturalSpline::from_ages(grid_ages, df, panel.grid());
  const BasisMatrix basis = spline.evaluate(grid_ages);
  const LeastSquaresResult ls = least_squares_fit(basis, per_age);
  const Eigen::VectorXd fitted = basis * ls.coefficients;
  return {fitted.data(), fitted.data() + fitted.size()};
}

namespace {

class MeanModel {
 public:
  MeanModel(const PerformancePanel& observed, const EstimatorSpec& spec, const ImputationConfig& config)
      : config_(config) {
    fit_spec_.method = Method::Spline;
    fit_spec_.data = DataSource::Obs;
    fit_spec_.effects = Effects::Fixed;
    fit_spec_.spline_df = spec.spline_df;
    if (config.mean_source == MeanSource::Quantile) {
      const std::size_t pool = config.pool_size.value_or(observed.n_players());
      zeta_ = quantile_curve(observed, pool, config.boundary_quantile).curve.g;
    }
  }

  // Fitted means for `cells` from a fixed-effects fit to `panel`; also
  // reports the fit's residual sd.
  std::vector<double> means(const PerformancePanel& panel, const std::vector<MissingCell>& cells,
                            double& residual_sd) const {
    const FitResult fit = fit_regression_curve(panel, fit_spec_);
    residual_sd = fit.residual_sd;
    const std::vector<double>& level = config_.mean_source == MeanSource::Quantile ? zeta_ : fit.curve.g;
    std::vector<double> out(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out[c] = level[cells[c].age_index] + fit.effects.intercepts[cells[c].player];
    }
    return out;
  }

 private:
  ImputationConfig config_;
  EstimatorSpec fit_spec_;
  std::vector<double> zeta_;
};

double draw(double mean, double sigma0, double upper, Rng& rng) {
  if (sigma0 > 0.0) return truncated_normal_sample(mean, sigma0, upper, rng);
  return mean < upper ? mean : std::nextafter(upper, -kInf);
}

PerformancePanel fill(const PerformancePanel& panel, const std::vector<MissingCell>& cells,
                      const std::vector<double>& values) {
  const std::size_t ages = panel.n_ages();
  std::vector<double> full(panel.n_players() * ages);
  for (std::size_t i = 0; i < panel.n_players(); ++i) {
    for (std::size_t k = 0; k < ages; ++k) full[i * ages + k] = panel.value(i, k);
  }
  for (std::size_t c = 0; c < cells.size(); ++c) full[cells[c].player * ages + cells[c].age_index] = values[c];
  return PerformancePanel::complete(panel.grid(), panel.player_ids(), std::move(full));
}

}  // namespace

ImputationResult impute_panel(const PerformancePanel& panel, const EstimatorSpec& spec,
                              const ImputationConfig& config, Rng& rng) {
  if (config.passes != 2) {
    throw Error(ErrorCode::InvalidArgument, "imputation runs exactly 2 passes, got " + std::to_string(config.passes));
  }
  if (!(config.boundary_quantile > 0.0 && config.boundary_quantile < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "boundary quantile must lie in (0, 1)");
  }

  ImputationTrace trace;
  trace.original_mask = panel.mask();
  for (std::size_t i = 0; i < panel.n_players(); ++i) {
    for (std::size_t k = 0; k < panel.n_ages(); ++k) {
      if (!panel.is_observed(i, k)) trace.cells.push_back({i, k});
    }
  }
  if (trace.cells.empty()) return {panel, std::move(trace)};

  const MeanModel model(panel, spec, config);

  // 1: mean model on observed cells, sigma0 fixed from here on.
  trace.first_pass_means = model.means(panel, trace.cells, trace.sigma0);

  // 2: boundary, computed once.
  trace.boundary = config.truncate ? smoothed_boundary(panel, config.boundary_quantile, spec.spline_df)
                                   : std::vector<double>(panel.n_ages(), kInf);

  // 3: first draws.
  std::vector<double> first(trace.cells.size());
  for (std::size_t c = 0; c < trace.cells.size(); ++c) {
    first[c] = draw(trace.first_pass_means[c], trace.sigma0, trace.boundary[trace.cells[c].age_index], rng);
  }

  // 4: refit on observed + imputed.
  const PerformancePanel provisional = fill(panel, trace.cells, first);
  double unused_sd = 0.0;
  trace.second_pass_means = model.means(provisional, trace.cells, unused_sd);

  // 5: redraw every originally missing cell.
  trace.imputed.resize(trace.cells.size());
  for (std::size_t c = 0; c < trace.cells.size(); ++c) {
    trace.imputed[c] = draw(trace.second_pass_means[c], trace.sigma0, trace.boundary[trace.cells[c].age_index], rng);
  }

  // 6: completed panel; the caller refits its own model on it.
  PerformancePanel completed = fill(panel, trace.cells, trace.imputed);
  return {std::move(completed), std::move(trace)};
}

}  // namespace aging
