#include "aging/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "aging/error.hpp"

namespace aging {

AgeGrid::AgeGrid(int t_min, int t_max) : t_min_(t_min), t_max_(t_max) {
  if (t_min >= t_max) {
    throw Error(ErrorCode::InvalidArgument,
                "age grid needs t_min < t_max, got " + std::to_string(t_min) + ".." + std::to_string(t_max));
  }
}

std::size_t AgeGrid::index_of(int age) const {
  if (!contains(age)) {
    throw Error(ErrorCode::OutOfRange, "age " + std::to_string(age) + " outside grid " + std::to_string(t_min_) +
                                           ".." + std::to_string(t_max_));
  }
  return static_cast<std::size_t>(age - t_min_);
}

std::vector<int> AgeGrid::ages() const {
  std::vector<int> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = age_at(k);
  return out;
}

std::vector<double> AgeGrid::ages_real() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = age_at(k);
  return out;
}

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation for the lower half, polished by one Halley
// step against erfc. Accurate to roughly machine precision.
double lower_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int iter = 0; iter < 2; ++iter) {
    const double e = std_normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::Domain, "normal quantile needs 0 < p < 1, got " + std::to_string(p));
  }
  if (p > 0.5) return -lower_quantile(1.0 - p);
  return lower_quantile(p);
}

double truncated_normal_sample(double mean, double sd, double upper, Rng& rng) {
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "truncated normal needs sd > 0, got " + std::to_string(sd));
  }
  const double u = rng.uniform();
  if (upper == kInf) return mean + sd * std_normal_quantile(u);

  const double b = (upper - mean) / sd;
  const double pb = std_normal_cdf(b);
  double z;
  if (pb > 1e-290) {
    z = std_normal_quantile(u * pb);
  } else {
    // Far lower tail: the density below b is exponential with rate |b|.
    z = b + std::log(u) / std::abs(b);
  }
  if (z >= b) z = std::nextafter(b, -kInf);
  double x = mean + sd * z;
  if (x >= upper) x = std::nextafter(upper, -kInf);
  return x;
}

double truncated_normal_mean(double mean, double sd, double upper) {
  if (upper == kInf) return mean;
  const double b = (upper - mean) / sd;
  return mean - sd * std_normal_pdf(b) / std_normal_cdf(b);
}

double truncated_normal_sd(double mean, double sd, double upper) {
  if (upper == kInf) return sd;
  const double b = (upper - mean) / sd;
  const double lambda = std_normal_pdf(b) / std_normal_cdf(b);
  return sd * std::sqrt(1.0 - b * lambda - lambda * lambda);
}

double truncated_sd_ratio(double lower_z) {
  if (lower_z == -kInf) return 1.0;
  // Survival function via the symmetric cdf keeps precision for large lower_z.
  const double lambda = std_normal_pdf(lower_z) / std_normal_cdf(-lower_z);
  const double var = 1.0 + lower_z * lambda - lambda * lambda;
  return std::sqrt(std::max(var, 0.0));
}

double sample_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InsufficientData, "quantile of empty input");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile probability must lie in [0, 1], got " + std::to_string(q));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InsufficientData, "mean of empty input");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::InsufficientData, "sample sd needs at least 2 values");
  const double m = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

LeastSquaresResult least_squares_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                     const LeastSquaresOptions& options) {
  const auto rows = design.rows();
  const auto cols = design.cols();
  if (response.size() != rows) {
    throw Error(ErrorCode::InvalidArgument, "design has " + std::to_string(rows) + " rows but response has " +
                                                std::to_string(response.size()));
  }
  if (rows < cols) {
    throw Error(ErrorCode::InsufficientData,
                "least squares needs rows >= cols (" + std::to_string(rows) + " < " + std::to_string(cols) + ")");
  }

  LeastSquaresResult out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() == cols) {
    out.coefficients = qr.solve(response);
  } else if (options.ridge_fallback) {
    Eigen::MatrixXd gram = design.transpose() * design;
    const double scale = std::max(1.0, gram.diagonal().maxCoeff());
    gram.diagonal().array() += options.ridge * scale;
    out.coefficients = gram.ldlt().solve(design.transpose() * response);
    out.ridge_used = true;
  } else {
    throw Error(ErrorCode::SingularDesign, "design is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                                               std::to_string(cols) + " columns)");
  }

  const Eigen::VectorXd residuals = response - design * out.coefficients;
  const auto dof = rows - cols;
  out.residual_sd = dof > 0 ? std::sqrt(residuals.squaredNorm() / static_cast<double>(dof)) : 0.0;
  return out;
}

}  // namespace aging
