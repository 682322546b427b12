#pragma once

#include <optional>

#include "aging/imputation.hpp"
#include "aging/panel.hpp"
#include "aging/random.hpp"

namespace aging {

/// Imputation settings implied by a trunc / notrunc spec.
ImputationConfig imputation_config_for(const EstimatorSpec& spec, std::optional<std::size_t> pool_size);

/// Runs one method:data:effects estimator end to end. obs fits the observed
/// cells; trunc / notrunc impute first and fit the completed panel.
/// delta-plus ignores data and effects. quant:trunc:fixed imputes around the
/// quantile means and reports a spline + fixed-effects fit.
FitResult estimate(const PerformancePanel& panel, const EstimatorSpec& spec, std::optional<std::size_t> pool_size,
                   Rng& rng);

/// As above, also handing back the imputation trace when one ran.
FitResult estimate(const PerformancePanel& panel, const EstimatorSpec& spec, std::optional<std::size_t> pool_size,
                   Rng& rng, std::optional<ImputationResult>* imputation);

}  // namespace aging
