#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "aging/numerics.hpp"

namespace aging {

using BasisMatrix = Eigen::MatrixXd;

/// Natural cubic spline basis on a fixed knot sequence (truncated-power form,
/// ages rescaled to [0, 1] between the boundary knots). Column 0 is the
/// constant and column 1 is linear in age, so every basis spans the linear
/// functions. Beyond the boundary knots each column is linear.
class NaturalSpline {
 public:
  explicit NaturalSpline(std::vector<double> knots);

  /// Interior knots at equally spaced quantiles of `ages`, boundary knots at
  /// the grid ends; df columns in total.
  static NaturalSpline from_ages(std::span<const double> ages, int df, const AgeGrid& boundary);

  int df() const { return static_cast<int>(knots_.size()); }
  const std::vector<double>& knots() const { return knots_; }

  /// Row of basis values (or their derivative of order 1..2) at `x`.
  /// Extrapolates linearly outside the boundary knots.
  Eigen::RowVectorXd evaluate(double x, int derivative = 0) const;
  BasisMatrix evaluate(std::span<const double> xs, int derivative = 0) const;

 private:
  double truncated_cube(double s, std::size_t k, int derivative) const;

  std::vector<double> knots_;
  std::vector<double> scaled_;
  double origin_ = 0.0;
  double width_ = 1.0;
};

/// Natural cubic spline basis with `df` columns evaluated at `ages`.
/// Throws InvalidArgument for df < 2 and OutOfRange for ages off the grid.
BasisMatrix natural_spline_basis(std::span<const double> ages, int df, const AgeGrid& boundary);

}  // namespace aging
