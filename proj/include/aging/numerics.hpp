#pragma once

#include <Eigen/Dense>

#include <limits>
#include <span>
#include <vector>

#include "aging/random.hpp"

namespace aging {

/// Contiguous integer ages t_min..t_max.
class AgeGrid {
 public:
  AgeGrid() = default;
  AgeGrid(int t_min, int t_max);

  int t_min() const { return t_min_; }
  int t_max() const { return t_max_; }
  std::size_t size() const { return static_cast<std::size_t>(t_max_ - t_min_ + 1); }

  bool contains(int age) const { return age >= t_min_ && age <= t_max_; }
  std::size_t index_of(int age) const;
  int age_at(std::size_t k) const { return t_min_ + static_cast<int>(k); }
  std::vector<int> ages() const;
  std::vector<double> ages_real() const;

  bool operator==(const AgeGrid&) const = default;

 private:
  int t_min_ = 18;
  int t_max_ = 40;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double std_normal_pdf(double z);
double std_normal_cdf(double z);
/// Inverse of std_normal_cdf on (0, 1); throws Domain outside.
double std_normal_quantile(double p);

/// One draw from Normal(mean, sd^2) restricted to (-inf, upper], by inverse CDF.
double truncated_normal_sample(double mean, double sd, double upper, Rng& rng);

/// Mean and sd of a Normal(mean, sd^2) truncated above at `upper`.
double truncated_normal_mean(double mean, double sd, double upper);
double truncated_normal_sd(double mean, double sd, double upper);

/// SD of a standard Normal truncated below at lower_z (1 when lower_z = -inf).
double truncated_sd_ratio(double lower_z);

/// Linear-interpolation quantile, h = q (n - 1) over the sorted values.
double sample_quantile(std::span<const double> values, double q);

double sample_mean(std::span<const double> values);
/// Sample standard deviation (denominator n - 1).
double sample_sd(std::span<const double> values);

struct LeastSquaresOptions {
  bool ridge_fallback = false;
  double ridge = 1e-8;
};

struct LeastSquaresResult {
  Eigen::VectorXd coefficients;
  double residual_sd = 0.0;
  bool ridge_used = false;
};

/// Ordinary least squares by column-pivoted QR. A rank-deficient design throws
/// SingularDesign unless the ridge fallback is enabled.
LeastSquaresResult least_squares_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                     const LeastSquaresOptions& options = {});

}  // namespace aging
