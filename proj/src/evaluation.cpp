#include "aging/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aging/error.hpp"
#include "aging/estimate.hpp"

namespace aging {

std::vector<double> rmse_by_age(const std::vector<AgeCurve>& estimates, const AgeCurve& truth) {
  if (estimates.empty()) throw Error(ErrorCode::InsufficientData, "rmse needs at least one estimate");
  std::vector<double> out(truth.g.size(), 0.0);
  for (const AgeCurve& e : estimates) {
    if (!(e.grid == truth.grid)) throw Error(ErrorCode::GridMismatch, "estimate grid differs from the truth grid");
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += (e.g[k] - truth.g[k]) * (e.g[k] - truth.g[k]);
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(estimates.size()));
  return out;
}

namespace {

std::vector<double> z_scores(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  if (sd == 0.0) throw Error(ErrorCode::DegenerateCurve, "shape distance of a constant curve");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd;
  return out;
}

}  // namespace

double shape_based_distance(const std::vector<double>& x_in, const std::vector<double>& y_in, bool z_normalize) {
  if (x_in.size() != y_in.size()) throw Error(ErrorCode::GridMismatch, "shape distance needs curves of equal length");
  if (x_in.empty()) throw Error(ErrorCode::DegenerateCurve, "shape distance of an empty curve");
  const std::vector<double> x = z_normalize ? z_scores(x_in) : x_in;
  const std::vector<double> y = z_normalize ? z_scores(y_in) : y_in;
  double nx = 0.0, ny = 0.0;
  for (double v : x) nx += v * v;
  for (double v : y) ny += v * v;
  if (nx == 0.0 || ny == 0.0) throw Error(ErrorCode::DegenerateCurve, "shape distance of a zero-norm curve");
  const auto n = static_cast<long>(x.size());
  double best = -std::numeric_limits<double>::infinity();
  for (long shift = -(n - 1); shift <= n - 1; ++shift) {
    double cc = 0.0;
    for (long i = std::max(0L, -shift); i < std::min(n, n - shift); ++i) cc += x[i + shift] * y[i];
    best = std::max(best, cc);
  }
  return 1.0 - best / std::sqrt(nx * ny);
}

double shape_based_distance(const AgeCurve& x, const AgeCurve& y, bool z_normalize) {
  if (!(x.grid == y.grid)) throw Error(ErrorCode::GridMismatch, "shape distance needs curves on the same grid");
  return shape_based_distance(x.g, y.g, z_normalize);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

BootstrapResult bootstrap_curves(const PerformancePanel& panel, const EstimatorSpec& spec, int draws,
                                 std::uint64_t root_seed, const BootstrapOptions& options) {
  if (draws < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least one draw");
  const std::size_t n = panel.n_players();
  auto resample = options.resample;
  if (!resample) {
    resample = [](std::size_t count, Rng& rng) {
      std::vector<std::size_t> rows(count);
      for (auto& r : rows) r = rng.index(count);
      return rows;
    };
  }

  BootstrapResult out;
  for (int b = 0; b < draws; ++b) {
    bool done = false;
    for (int attempt = 0; attempt <= options.max_retries && !done; ++attempt) {
      Rng rng(derive_seed(root_seed, static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(attempt)));
      try {
        const PerformancePanel sample = panel.select_players(resample(n, rng));
        out.curves.push_back(estimate(sample, spec, options.pool_size, rng).curve);
        done = true;
      } catch (const Error&) {
      }
    }
    if (!done) out.failed_draws.push_back(b);
  }
  return out;
}

}  // namespace aging
