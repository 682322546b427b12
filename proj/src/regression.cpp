#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "aging/error.hpp"
#include "aging/estimators.hpp"
#include "aging/spline.hpp"

namespace aging {

namespace {

// Age design for the population curve or the per-player terms. Column 0 is
// always the constant.
class AgeDesign {
 public:
  static AgeDesign spline(NaturalSpline s) {
    AgeDesign d;
    d.spline_ = std::move(s);
    return d;
  }

  static AgeDesign quadratic(const AgeGrid& grid) {
    AgeDesign d;
    d.center_ = 0.5 * (grid.t_min() + grid.t_max());
    d.scale_ = 0.5 * (grid.t_max() - grid.t_min());
    return d;
  }

  Eigen::Index cols() const { return spline_ ? spline_->df() : 3; }

  Eigen::RowVectorXd row(double age) const {
    if (spline_) return spline_->evaluate(age);
    const double u = scaled(age);
    Eigen::RowVectorXd r(3);
    r << 1.0, u, u * u;
    return r;
  }

  bool is_quadratic() const { return !spline_; }
  double center() const { return center_; }
  double scale() const { return scale_; }

  // c0 + c1 u + c2 u^2 with u = (t - center) / scale, re-expressed in t.
  std::array<double, 3> to_raw_age(double c0, double c1, double c2) const {
    const double c = center_, s = scale_;
    return {c0 - c1 * c / s + c2 * c * c / (s * s), c1 / s - 2.0 * c2 * c / (s * s), c2 / (s * s)};
  }

 private:
  double scaled(double age) const { return (age - center_) / scale_; }

  std::optional<NaturalSpline> spline_;
  double center_ = 0.0;
  double scale_ = 1.0;
};

struct PlayerBlock {
  std::size_t player;
  std::vector<std::size_t> rows;  // indices into the cell list
};

struct Problem {
  std::vector<Cell> cells;
  std::vector<PlayerBlock> players;  // players with at least one cell
  Eigen::VectorXd y;
  std::vector<double> ages;
};

Problem collect(const PerformancePanel& panel) {
  Problem p;
  p.cells = panel.observed_cells();
  p.y.resize(static_cast<Eigen::Index>(p.cells.size()));
  p.ages.resize(p.cells.size());
  for (std::size_t r = 0; r < p.cells.size(); ++r) {
    const Cell& c = p.cells[r];
    p.y(static_cast<Eigen::Index>(r)) = c.value;
    p.ages[r] = panel.grid().age_at(c.age_index);
    if (p.players.empty() || p.players.back().player != c.player) p.players.push_back({c.player, {}});
    p.players.back().rows.push_back(r);
  }
  return p;
}

Eigen::MatrixXd design_matrix(const AgeDesign& d, const std::vector<double>& ages) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ages.size()), d.cols());
  for (std::size_t r = 0; r < ages.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = d.row(ages[r]);
  return x;
}

std::vector<int> support_counts(const PerformancePanel& panel) {
  std::vector<int> s(panel.n_ages());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = static_cast<int>(panel.observed_count(k));
  return s;
}

AgeDesign population_design(const PerformancePanel& panel, const EstimatorSpec& spec, const Problem& p) {
  if (spec.method == Method::Quad) return AgeDesign::quadratic(panel.grid());
  return AgeDesign::spline(NaturalSpline::from_ages(p.ages, spec.spline_df, panel.grid()));
}

AgeDesign player_design(const PerformancePanel& panel, const EstimatorSpec& spec, const AgeDesign& population,
                        const Problem& p) {
  if (spec.effects == Effects::RandomQuad) return AgeDesign::quadratic(panel.grid());
  if (!population.is_quadratic()) return population;
  return AgeDesign::spline(NaturalSpline::from_ages(p.ages, spec.spline_df, panel.grid()));
}

struct FixedFit {
  Eigen::VectorXd beta;         // coefficients on columns 1.. of the design
  double alpha = 0.0;           // population intercept under sum-to-zero coding
  std::vector<double> gamma;    // per panel player, zero for unobserved players
  double residual_sd = 0.0;
  bool ridge_used = false;
};

// Player intercepts removed by within-player centering; intercepts recovered
// afterwards and centered to sum to zero over players with data.
FixedFit fit_fixed(const PerformancePanel& panel, const Problem& p, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols() - 1;
  Eigen::MatrixXd w = x.rightCols(q);
  Eigen::VectorXd yw = p.y;
  std::vector<Eigen::RowVectorXd> xbar(p.players.size());
  std::vector<double> ybar(p.players.size());
  for (std::size_t b = 0; b < p.players.size(); ++b) {
    const auto& rows = p.players[b].rows;
    Eigen::RowVectorXd mx = Eigen::RowVectorXd::Zero(q);
    double my = 0.0;
    for (auto r : rows) {
      mx += w.row(static_cast<Eigen::Index>(r));
      my += p.y(static_cast<Eigen::Index>(r));
    }
    mx /= static_cast<double>(rows.size());
    my /= static_cast<double>(rows.size());
    for (auto r : rows) {
      w.row(static_cast<Eigen::Index>(r)) -= mx;
      yw(static_cast<Eigen::Index>(r)) -= my;
    }
    xbar[b] = mx;
    ybar[b] = my;
  }

  const auto players = static_cast<Eigen::Index>(p.players.size());
  if (n - q - players < 0 || n < q) {
    throw Error(ErrorCode::InsufficientData, "too few observed cells for a fixed-effects fit");
  }
  LeastSquaresOptions opts;
  opts.ridge_fallback = true;
  const LeastSquaresResult ls = least_squares_fit(w, yw, opts);

  FixedFit out;
  out.beta = ls.coefficients;
  out.ridge_used = ls.ridge_used;
  const Eigen::VectorXd resid = yw - w * out.beta;
  const auto dof = n - q - players;
  out.residual_sd = dof > 0 ? std::sqrt(resid.squaredNorm() / static_cast<double>(dof)) : 0.0;

  std::vector<double> raw(p.players.size());
  double mean_raw = 0.0;
  for (std::size_t b = 0; b < p.players.size(); ++b) {
    raw[b] = ybar[b] - xbar[b].dot(out.beta);
    mean_raw += raw[b];
  }
  mean_raw /= static_cast<double>(p.players.size());
  out.alpha = mean_raw;
  out.gamma.assign(panel.n_players(), 0.0);
  for (std::size_t b = 0; b < p.players.size(); ++b) out.gamma[p.players[b].player] = raw[b] - mean_raw;
  return out;
}

std::vector<double> fixed_curve_values(const AgeDesign& design, const FixedFit& fit, const std::vector<double>& ages) {
  std::vector<double> g(ages.size());
  for (std::size_t k = 0; k < ages.size(); ++k) {
    const Eigen::RowVectorXd r = design.row(ages[k]);
    g[k] = fit.alpha + r.tail(r.size() - 1).dot(fit.beta);
  }
  return g;
}

struct Pilot {
  std::vector<Eigen::VectorXd> effects;  // per block; empty when too few cells
  std::vector<Eigen::VectorXd> inverse_gram_diag;
  double sigma2 = 0.0;
  std::size_t usable = 0;
};

// Per-player OLS of the player design on residuals from the fixed-effects curve.
Pilot pilot_effects(const PerformancePanel& panel, const EstimatorSpec& spec, const Problem& p) {
  const AgeDesign pop = population_design(panel, spec, p);
  const Eigen::MatrixXd x = design_matrix(pop, p.ages);
  const FixedFit fe = fit_fixed(panel, p, x);
  const AgeDesign zd = player_design(panel, spec, pop, p);
  const Eigen::Index m = zd.cols();

  Pilot out;
  out.effects.resize(p.players.size());
  out.inverse_gram_diag.resize(p.players.size());
  double rss = 0.0;
  double dof = 0.0;
  for (std::size_t b = 0; b < p.players.size(); ++b) {
    const auto& rows = p.players[b].rows;
    if (static_cast<Eigen::Index>(rows.size()) <= m) continue;
    Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), m);
    Eigen::VectorXd r(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto row = static_cast<Eigen::Index>(rows[j]);
      const Eigen::RowVectorXd xr = x.row(row);
      z.row(static_cast<Eigen::Index>(j)) = zd.row(p.ages[rows[j]]);
      r(static_cast<Eigen::Index>(j)) = p.y(row) - fe.alpha - xr.tail(xr.size() - 1).dot(fe.beta);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    if (qr.rank() < m) continue;
    out.effects[b] = qr.solve(r);
    const Eigen::MatrixXd gram = z.transpose() * z;
    out.inverse_gram_diag[b] = gram.inverse().diagonal();
    rss += (r - z * out.effects[b]).squaredNorm();
    dof += static_cast<double>(rows.size() - static_cast<std::size_t>(m));
    ++out.usable;
  }
  out.sigma2 = dof > 0 ? rss / dof : 0.0;
  return out;
}

void require_cells(const EstimatorSpec& spec, std::size_t cells) {
  const std::size_t needed = static_cast<std::size_t>(spec.method == Method::Quad ? 3 : spec.spline_df) + 2;
  if (cells < needed) {
    throw Error(ErrorCode::InsufficientData, "regression needs at least " + std::to_string(needed) +
                                                 " observed cells, panel has " + std::to_string(cells));
  }
  if (spec.method != Method::Spline && spec.method != Method::Quad) {
    throw Error(ErrorCode::Spec, "fit_regression_curve handles spline and quad methods only");
  }
  if (spec.spline_df < 2) throw Error(ErrorCode::InvalidArgument, "invalid degrees of freedom");
}

FitResult fit_random(const PerformancePanel& panel, const EstimatorSpec& spec, const Problem& p) {
  const Pilot pilot = pilot_effects(panel, spec, p);
  if (pilot.usable < 2) {
    throw Error(ErrorCode::InsufficientData, "random effects need at least 2 players with more cells than effect terms");
  }
  const AgeDesign pop = population_design(panel, spec, p);
  const AgeDesign zd = player_design(panel, spec, pop, p);
  const Eigen::MatrixXd x = design_matrix(pop, p.ages);
  const Eigen::Index q = x.cols();
  const Eigen::Index m = zd.cols();

  // Moment matching: spread of pilot effects minus their sampling noise.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(m);
  for (std::size_t b = 0; b < p.players.size(); ++b) {
    if (pilot.effects[b].size() == 0) continue;
    mean += pilot.effects[b];
    noise += pilot.inverse_gram_diag[b];
  }
  const auto usable = static_cast<double>(pilot.usable);
  mean /= usable;
  noise *= pilot.sigma2 / usable;
  Eigen::VectorXd spread = Eigen::VectorXd::Zero(m);
  for (std::size_t b = 0; b < p.players.size(); ++b) {
    if (pilot.effects[b].size() == 0) continue;
    spread += (pilot.effects[b] - mean).cwiseAbs2();
  }
  spread /= usable - 1.0;

  const double sigma2 = std::max(pilot.sigma2, 1e-12);
  Eigen::VectorXd penalty(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double var = std::max(spread(k) - noise(k), 1e-6 * sigma2);
    penalty(k) = sigma2 / var;
  }

  // Eliminate each player's block, solve for the population coefficients,
  // then back-substitute.
  Eigen::MatrixXd reduced = x.transpose() * x;
  Eigen::VectorXd rhs = x.transpose() * p.y;
  struct Block {
    Eigen::LDLT<Eigen::MatrixXd> a;
    Eigen::MatrixXd zx;
    Eigen::VectorXd zy;
    Eigen::MatrixXd z;
  };
  std::vector<Block> blocks(p.players.size());
  for (std::size_t b = 0; b < p.players.size(); ++b) {
    const auto& rows = p.players[b].rows;
    Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), m);
    Eigen::MatrixXd xb(static_cast<Eigen::Index>(rows.size()), q);
    Eigen::VectorXd yb(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      z.row(jj) = zd.row(p.ages[rows[j]]);
      xb.row(jj) = x.row(static_cast<Eigen::Index>(rows[j]));
      yb(jj) = p.y(static_cast<Eigen::Index>(rows[j]));
    }
    Eigen::MatrixXd a = z.transpose() * z;
    a.diagonal() += penalty;
    Block& blk = blocks[b];
    blk.a.compute(a);
    blk.zx = z.transpose() * xb;
    blk.zy = z.transpose() * yb;
    blk.z = std::move(z);
    reduced -= blk.zx.transpose() * blk.a.solve(blk.zx);
    rhs -= blk.zx.transpose() * blk.a.solve(blk.zy);
  }
  Eigen::LDLT<Eigen::MatrixXd> reduced_solver(reduced);
  bool ridge_used = false;
  if (reduced_solver.info() != Eigen::Success || reduced_solver.rcond() < 1e-14) {
    const double scale = std::max(1.0, reduced.diagonal().maxCoeff());
    reduced.diagonal().array() += 1e-8 * scale;
    reduced_solver.compute(reduced);
    ridge_used = true;
  }
  const Eigen::VectorXd beta = reduced_solver.solve(rhs);

  std::vector<Eigen::VectorXd> u(p.players.size());
  Eigen::VectorXd u_mean = Eigen::VectorXd::Zero(m);
  double rss = 0.0;
  double effective = static_cast<double>(q);
  for (std::size_t b = 0; b < p.players.size(); ++b) {
    Block& blk = blocks[b];
    u[b] = blk.a.solve(blk.zy - blk.zx * beta);
    u_mean += u[b];
    const auto& rows = p.players[b].rows;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(rows[j]);
      const double fitted = x.row(r).dot(beta) + blk.z.row(static_cast<Eigen::Index>(j)).dot(u[b]);
      rss += (p.y(r) - fitted) * (p.y(r) - fitted);
    }
    effective += blk.a.solve(blk.z.transpose() * blk.z).trace();
  }
  u_mean /= static_cast<double>(p.players.size());

  const std::vector<double> grid_ages = panel.grid().ages_real();
  std::vector<double> g(grid_ages.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = pop.row(grid_ages[k]).dot(beta) + zd.row(grid_ages[k]).dot(u_mean);

  FitResult fit;
  fit.spec = spec;
  fit.ridge_used = ridge_used;
  fit.curve = AgeCurve(panel.grid(), std::move(g), support_counts(panel));
  const double dof = static_cast<double>(p.cells.size()) - effective;
  fit.residual_sd = dof > 0 ? std::sqrt(rss / dof) : 0.0;

  PlayerEffects& fx = fit.effects;
  fx.kind = spec.effects;
  fx.penalties.assign(penalty.data(), penalty.data() + m);
  const std::size_t n = panel.n_players();
  fx.intercepts.assign(n, 0.0);
  if (spec.effects == Effects::RandomQuad) {
    fx.linear.assign(n, 0.0);
    fx.quadratic.assign(n, 0.0);
    for (std::size_t b = 0; b < p.players.size(); ++b) {
      const Eigen::VectorXd c = u[b] - u_mean;
      const auto raw = zd.to_raw_age(c(0), c(1), c(2));
      const std::size_t i = p.players[b].player;
      fx.intercepts[i] = raw[0];
      fx.linear[i] = raw[1];
      fx.quadratic[i] = raw[2];
    }
  } else {
    fx.spline_coeffs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m);
    for (std::size_t b = 0; b < p.players.size(); ++b) {
      const Eigen::VectorXd c = u[b] - u_mean;
      const auto i = p.players[b].player;
      fx.spline_coeffs.row(static_cast<Eigen::Index>(i)) = c.transpose();
      fx.intercepts[i] = c(0);
    }
  }

  if (pop.is_quadratic() && spec.effects == Effects::RandomQuad) {
    const Eigen::VectorXd total = beta + u_mean;
    fit.quad_coefficients = pop.to_raw_age(total(0), total(1), total(2));
  } else if (pop.is_quadratic()) {
    // Spline player terms shift the population curve off the pure quadratic.
    fit.quad_coefficients.reset();
  }
  return fit;
}

}  // namespace

FitResult fit_regression_curve(const PerformancePanel& panel, const EstimatorSpec& spec) {
  const Problem p = collect(panel);
  require_cells(spec, p.cells.size());
  if (spec.effects == Effects::RandomQuad || spec.effects == Effects::RandomSpline) return fit_random(panel, spec, p);

  const AgeDesign pop = population_design(panel, spec, p);
  const Eigen::MatrixXd x = design_matrix(pop, p.ages);
  const std::vector<double> grid_ages = panel.grid().ages_real();

  FitResult fit;
  fit.spec = spec;
  fit.effects.kind = spec.effects;
  fit.effects.intercepts.assign(panel.n_players(), 0.0);

  if (spec.effects == Effects::None) {
    LeastSquaresOptions opts;
    opts.ridge_fallback = true;
    const LeastSquaresResult ls = least_squares_fit(x, p.y, opts);
    std::vector<double> g(grid_ages.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = pop.row(grid_ages[k]).dot(ls.coefficients);
    fit.curve = AgeCurve(panel.grid(), std::move(g), support_counts(panel));
    fit.residual_sd = ls.residual_sd;
    fit.ridge_used = ls.ridge_used;
    if (pop.is_quadratic()) {
      fit.quad_coefficients = pop.to_raw_age(ls.coefficients(0), ls.coefficients(1), ls.coefficients(2));
    }
    return fit;
  }

  if (spec.effects != Effects::Fixed) throw Error(ErrorCode::Spec, "unknown player effects kind");
  const FixedFit fe = fit_fixed(panel, p, x);
  fit.curve = AgeCurve(panel.grid(), fixed_curve_values(pop, fe, grid_ages), support_counts(panel));
  fit.residual_sd = fe.residual_sd;
  fit.ridge_used = fe.ridge_used;
  fit.effects.intercepts = fe.gamma;
  if (pop.is_quadratic()) fit.quad_coefficients = pop.to_raw_age(fe.alpha, fe.beta(0), fe.beta(1));
  return fit;
}

PlayerEffects unpenalized_player_effects(const PerformancePanel& panel, const EstimatorSpec& spec) {
  if (spec.effects != Effects::RandomQuad && spec.effects != Effects::RandomSpline) {
    throw Error(ErrorCode::Spec, "unpenalized player effects apply to random-effect specs only");
  }
  const Problem p = collect(panel);
  require_cells(spec, p.cells.size());
  const Pilot pilot = pilot_effects(panel, spec, p);
  const AgeDesign pop = population_design(panel, spec, p);
  const AgeDesign zd = player_design(panel, spec, pop, p);
  const Eigen::Index m = zd.cols();

  PlayerEffects fx;
  fx.kind = spec.effects;
  const std::size_t n = panel.n_players();
  fx.intercepts.assign(n, 0.0);
  if (spec.effects == Effects::RandomQuad) {
    fx.linear.assign(n, 0.0);
    fx.quadratic.assign(n, 0.0);
  } else {
    fx.spline_coeffs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m);
  }
  for (std::size_t b = 0; b < p.players.size(); ++b) {
    if (pilot.effects[b].size() == 0) continue;
    const auto i = p.players[b].player;
    const Eigen::VectorXd& c = pilot.effects[b];
    if (spec.effects == Effects::RandomQuad) {
      const auto raw = zd.to_raw_age(c(0), c(1), c(2));
      fx.intercepts[i] = raw[0];
      fx.linear[i] = raw[1];
      fx.quadratic[i] = raw[2];
    } else {
      fx.spline_coeffs.row(static_cast<Eigen::Index>(i)) = c.transpose();
      fx.intercepts[i] = c(0);
    }
  }
  return fx;
}

}  // namespace aging
