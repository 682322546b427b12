#include "aging/estimate.hpp"

#include "aging/error.hpp"
#include "aging/estimators.hpp"

namespace aging {

ImputationConfig imputation_config_for(const EstimatorSpec& spec, std::optional<std::size_t> pool_size) {
  if (spec.data == DataSource::Obs || spec.method == Method::DeltaPlus) {
    throw Error(ErrorCode::Spec, "spec " + spec.name() + " does not impute");
  }
  ImputationConfig config;
  config.boundary_quantile = spec.boundary_quantile;
  config.truncate = spec.data == DataSource::Trunc;
  config.mean_source = spec.method == Method::Quant ? MeanSource::Quantile : MeanSource::Regression;
  config.pool_size = pool_size;
  return config;
}

FitResult estimate(const PerformancePanel& panel, const EstimatorSpec& spec, std::optional<std::size_t> pool_size,
                   Rng& rng) {
  return estimate(panel, spec, pool_size, rng, nullptr);
}

FitResult estimate(const PerformancePanel& panel, const EstimatorSpec& spec, std::optional<std::size_t> pool_size,
                   Rng& rng, std::optional<ImputationResult>* imputation) {
  if (spec.method == Method::DeltaPlus) {
    FitResult fit;
    fit.spec = spec;
    fit.curve = delta_plus_curve(panel).curve;
    return fit;
  }

  if (spec.data == DataSource::Obs) {
    if (spec.method == Method::Quant) {
      if (spec.effects != Effects::None) throw Error(ErrorCode::Spec, "quant on observed data has no player terms");
      FitResult fit;
      fit.spec = spec;
      fit.curve = quantile_curve(panel, pool_size.value_or(panel.n_players()), spec.boundary_quantile).curve;
      return fit;
    }
    return fit_regression_curve(panel, spec);
  }

  ImputationResult imputed = impute_panel(panel, spec, imputation_config_for(spec, pool_size), rng);

  EstimatorSpec final_spec = spec;
  final_spec.data = DataSource::Obs;
  if (spec.method == Method::Quant) final_spec.method = Method::Spline;
  FitResult fit = fit_regression_curve(imputed.completed, final_spec);
  fit.spec = spec;
  // Support counts describe the original observations, not imputed cells.
  std::vector<int> support(panel.n_ages());
  for (std::size_t k = 0; k < support.size(); ++k) support[k] = static_cast<int>(panel.observed_count(k));
  fit.curve.support_counts = std::move(support);
  if (imputation) *imputation = std::move(imputed);
  return fit;
}

}  // namespace aging
