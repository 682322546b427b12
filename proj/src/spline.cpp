#include "aging/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aging/error.hpp"

namespace aging {

NaturalSpline::NaturalSpline(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw Error(ErrorCode::InvalidArgument, "natural spline needs at least 2 knots");
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "natural spline knots must be strictly increasing");
    }
  }
  origin_ = knots_.front();
  width_ = knots_.back() - knots_.front();
  scaled_.reserve(knots_.size());
  for (double k : knots_) scaled_.push_back((k - origin_) / width_);
}

NaturalSpline NaturalSpline::from_ages(std::span<const double> ages, int df, const AgeGrid& boundary) {
  if (df < 2) throw Error(ErrorCode::InvalidArgument, "invalid degrees of freedom: " + std::to_string(df));
  const double lo = boundary.t_min();
  const double hi = boundary.t_max();
  for (double a : ages) {
    if (!(a >= lo && a <= hi)) {
      throw Error(ErrorCode::OutOfRange, "age " + std::to_string(a) + " outside spline boundary [" +
                                             std::to_string(boundary.t_min()) + ", " +
                                             std::to_string(boundary.t_max()) + "]");
    }
  }

  const int interior = df - 2;
  std::vector<double> knots{lo};
  bool usable = !ages.empty();
  if (usable) {
    for (int j = 1; j <= interior; ++j) {
      const double k = sample_quantile(ages, static_cast<double>(j) / static_cast<double>(interior + 1));
      if (!(k > knots.back()) || !(k < hi)) {
        usable = false;
        break;
      }
      knots.push_back(k);
    }
  }
  if (!usable) {
    // Quantiles collapsed onto repeated ages; spread the knots evenly instead.
    knots.assign(1, lo);
    for (int j = 1; j <= interior; ++j) knots.push_back(lo + (hi - lo) * j / (interior + 1));
  }
  knots.push_back(hi);
  return NaturalSpline(std::move(knots));
}

double NaturalSpline::truncated_cube(double s, std::size_t k, int derivative) const {
  const double d = s - scaled_[k];
  if (d <= 0.0) return 0.0;
  switch (derivative) {
    case 0: return d * d * d;
    case 1: return 3.0 * d * d;
    default: return 6.0 * d;
  }
}

Eigen::RowVectorXd NaturalSpline::evaluate(double x, int derivative) const {
  if (derivative < 0 || derivative > 2) {
    throw Error(ErrorCode::InvalidArgument, "spline derivative order must be 0, 1 or 2");
  }
  const std::size_t n = knots_.size();
  const double s = (x - origin_) / width_;
  const double chain = std::pow(1.0 / width_, derivative);

  Eigen::RowVectorXd row(static_cast<Eigen::Index>(n));
  row(0) = derivative == 0 ? 1.0 : 0.0;
  row(1) = derivative == 0 ? s : (derivative == 1 ? chain : 0.0);
  if (n == 2) return row;

  const std::size_t last = n - 1;
  auto d = [&](std::size_t k) {
    return (truncated_cube(s, k, derivative) - truncated_cube(s, last, derivative)) / (scaled_[last] - scaled_[k]);
  };
  const double d_penultimate = d(last - 1);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    row(static_cast<Eigen::Index>(k + 2)) = (d(k) - d_penultimate) * chain;
  }
  return row;
}

BasisMatrix NaturalSpline::evaluate(std::span<const double> xs, int derivative) const {
  BasisMatrix out(static_cast<Eigen::Index>(xs.size()), df());
  for (std::size_t i = 0; i < xs.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = evaluate(xs[i], derivative);
  return out;
}

BasisMatrix natural_spline_basis(std::span<const double> ages, int df, const AgeGrid& boundary) {
  return NaturalSpline::from_ages(ages, df, boundary).evaluate(ages);
}

}  // namespace aging
