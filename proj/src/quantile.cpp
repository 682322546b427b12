#include <string>

#include "aging/error.hpp"
#include "aging/estimators.hpp"

namespace aging {

double population_percentile(std::size_t observed, std::size_t pool, double q) {
  if (pool == 0 || observed > pool) {
    throw Error(ErrorCode::InvalidArgument, "observed count " + std::to_string(observed) + " exceeds pool size " +
                                                std::to_string(pool));
  }
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
  return 1.0 - (static_cast<double>(observed) / static_cast<double>(pool)) * (1.0 - q);
}

QuantileResult quantile_curve(const PerformancePanel& panel, std::size_t pool_size, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1), got " + std::to_string(q));
  }
  if (pool_size == 0) throw Error(ErrorCode::InvalidArgument, "pool size must be positive");

  const std::size_t ages = panel.n_ages();
  QuantileDiagnostics d;
  d.pool_size = pool_size;
  d.nu.resize(ages);
  d.big_g.resize(ages);
  d.theta.resize(ages);
  d.s_obs.resize(ages);
  d.sigma_hat.resize(ages);
  d.zeta.resize(ages);
  std::vector<int> support(ages);

  for (std::size_t k = 0; k < ages; ++k) {
    const auto obs = panel.observed_at_age(k);
    const std::size_t n = obs.size();
    const int age = panel.grid().age_at(k);
    if (n > pool_size) {
      throw Error(ErrorCode::InvalidArgument, "inconsistent pool at age " + std::to_string(age) + ": " +
                                                  std::to_string(n) + " observed out of a pool of " +
                                                  std::to_string(pool_size));
    }
    if (n < 2) {
      throw Error(ErrorCode::InsufficientData,
                  "quantile estimator needs at least 2 observations at age " + std::to_string(age));
    }
    const double fraction = static_cast<double>(n) / static_cast<double>(pool_size);
    // Observed players are read as the top n of the pool: truncation below at z.
    const double z = n == pool_size ? -kInf : std_normal_quantile(1.0 - fraction);

    d.nu[k] = sample_quantile(obs, q);
    d.big_g[k] = population_percentile(n, pool_size, q);
    d.theta[k] = truncated_sd_ratio(z);
    d.s_obs[k] = sample_sd(obs);
    d.sigma_hat[k] = d.s_obs[k] / d.theta[k];
    d.zeta[k] = d.nu[k] - std_normal_quantile(d.big_g[k]) * d.sigma_hat[k];
    support[k] = static_cast<int>(n);
  }
  AgeCurve curve(panel.grid(), d.zeta, std::move(support));
  return {std::move(curve), std::move(d)};
}

}  // namespace aging
