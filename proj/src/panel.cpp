#include "aging/panel.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "aging/error.hpp"

namespace aging {

namespace {
constexpr double kMasked = std::numeric_limits<double>::quiet_NaN();
}

PerformancePanel::PerformancePanel(AgeGrid grid, std::vector<std::string> player_ids, std::vector<double> values,
                                   std::vector<std::uint8_t> mask)
    : grid_(grid), ids_(std::move(player_ids)), values_(std::move(values)), mask_(std::move(mask)) {
  const std::size_t cells = ids_.size() * grid_.size();
  if (values_.size() != cells || mask_.size() != cells) {
    throw Error(ErrorCode::InvalidArgument, "panel needs " + std::to_string(cells) + " values and mask entries, got " +
                                                std::to_string(values_.size()) + " and " +
                                                std::to_string(mask_.size()));
  }
  std::set<std::string_view> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateRecord, "duplicate player id " + id);
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (mask_[c] == 0) {
      values_[c] = kMasked;
    } else {
      mask_[c] = 1;
      if (!std::isfinite(values_[c])) {
        throw Error(ErrorCode::InvalidArgument, "observed panel value is not finite (player " +
                                                    ids_[c / grid_.size()] + ")");
      }
    }
  }
}

PerformancePanel PerformancePanel::complete(AgeGrid grid, std::vector<std::string> player_ids,
                                            std::vector<double> values) {
  std::vector<std::uint8_t> mask(values.size(), 1);
  return PerformancePanel(grid, std::move(player_ids), std::move(values), std::move(mask));
}

std::optional<double> PerformancePanel::observed(std::size_t player, std::size_t age_index) const {
  const std::size_t c = offset(player, age_index);
  if (mask_[c] == 0) return std::nullopt;
  return values_[c];
}

std::size_t PerformancePanel::observed_count(std::size_t age_index) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < n_players(); ++i) n += mask_[offset(i, age_index)];
  return n;
}

std::size_t PerformancePanel::observed_count_for_player(std::size_t player) const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < n_ages(); ++k) n += mask_[offset(player, k)];
  return n;
}

std::size_t PerformancePanel::total_observed() const {
  std::size_t n = 0;
  for (auto m : mask_) n += m;
  return n;
}

std::vector<double> PerformancePanel::observed_at_age(std::size_t age_index) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < n_players(); ++i) {
    if (mask_[offset(i, age_index)]) out.push_back(values_[offset(i, age_index)]);
  }
  return out;
}

std::vector<Cell> PerformancePanel::observed_cells() const {
  std::vector<Cell> out;
  out.reserve(total_observed());
  for (std::size_t i = 0; i < n_players(); ++i) {
    for (std::size_t k = 0; k < n_ages(); ++k) {
      if (mask_[offset(i, k)]) out.push_back({i, k, values_[offset(i, k)]});
    }
  }
  return out;
}

PerformancePanel PerformancePanel::with_mask(const std::vector<std::uint8_t>& mask) const {
  if (mask.size() != mask_.size()) throw Error(ErrorCode::InvalidArgument, "mask has the wrong dimensions");
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (mask[c] && !mask_[c]) {
      throw Error(ErrorCode::InvalidArgument, "cannot unmask a cell that was never observed");
    }
  }
  return PerformancePanel(grid_, ids_, values_, mask);
}

PerformancePanel PerformancePanel::select_players(const std::vector<std::size_t>& rows) const {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  ids.reserve(rows.size());
  values.reserve(rows.size() * n_ages());
  mask.reserve(rows.size() * n_ages());
  std::vector<int> seen(n_players(), 0);
  for (std::size_t r : rows) {
    if (r >= n_players()) throw Error(ErrorCode::OutOfRange, "player row " + std::to_string(r) + " out of range");
    const int copy = seen[r]++;
    ids.push_back(copy == 0 ? ids_[r] : ids_[r] + "#" + std::to_string(copy));
    for (std::size_t k = 0; k < n_ages(); ++k) {
      values.push_back(values_[offset(r, k)]);
      mask.push_back(mask_[offset(r, k)]);
    }
  }
  return PerformancePanel(grid_, std::move(ids), std::move(values), std::move(mask));
}

AgeCurve::AgeCurve(AgeGrid grid_in, std::vector<double> g_in, std::optional<std::vector<int>> support)
    : grid(grid_in), g(std::move(g_in)), support_counts(std::move(support)) {
  if (g.size() != grid.size()) {
    throw Error(ErrorCode::GridMismatch,
                "curve has " + std::to_string(g.size()) + " values for a grid of " + std::to_string(grid.size()));
  }
  for (double v : g) {
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateCurve, "curve value is not finite");
  }
  if (support_counts && support_counts->size() != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "support counts do not match the grid");
  }
}

std::string to_string(Method m) {
  switch (m) {
    case Method::DeltaPlus: return "delta-plus";
    case Method::Spline: return "spline";
    case Method::Quad: return "quad";
    case Method::Quant: return "quant";
  }
  return "?";
}

std::string to_string(DataSource d) {
  switch (d) {
    case DataSource::Obs: return "obs";
    case DataSource::Trunc: return "trunc";
    case DataSource::NoTrunc: return "notrunc";
  }
  return "?";
}

std::string to_string(Effects e) {
  switch (e) {
    case Effects::None: return "none";
    case Effects::Fixed: return "fixed";
    case Effects::RandomQuad: return "random-quad";
    case Effects::RandomSpline: return "random-spline";
  }
  return "?";
}

std::vector<EstimatorSpec> preset_specs() {
  auto make = [](Method m, DataSource d, Effects e) {
    EstimatorSpec s;
    s.method = m;
    s.data = d;
    s.effects = e;
    return s;
  };
  return {
      make(Method::DeltaPlus, DataSource::Obs, Effects::None),
      make(Method::Spline, DataSource::Obs, Effects::None),
      make(Method::Spline, DataSource::Obs, Effects::Fixed),
      make(Method::Spline, DataSource::Trunc, Effects::Fixed),
      make(Method::Spline, DataSource::NoTrunc, Effects::Fixed),
      make(Method::Quant, DataSource::Trunc, Effects::Fixed),
      make(Method::Quant, DataSource::Obs, Effects::None),
      make(Method::Quad, DataSource::Trunc, Effects::Fixed),
      make(Method::Spline, DataSource::Trunc, Effects::RandomQuad),
      make(Method::Spline, DataSource::Trunc, Effects::RandomSpline),
  };
}

bool EstimatorSpec::is_preset() const {
  for (const auto& p : preset_specs()) {
    if (p.method == method && p.data == data && p.effects == effects) return true;
  }
  return false;
}

std::string EstimatorSpec::name() const {
  if (method == Method::DeltaPlus) return "delta-plus";
  return to_string(method) + ":" + to_string(data) + ":" + to_string(effects);
}

EstimatorSpec EstimatorSpec::parse(std::string_view text, bool allow_custom) {
  EstimatorSpec spec;
  if (text == "delta-plus") {
    spec.method = Method::DeltaPlus;
    return spec;
  }
  std::vector<std::string> parts;
  std::stringstream ss{std::string(text)};
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) {
    throw Error(ErrorCode::Spec, "estimator spec must look like method:data:effects, got '" + std::string(text) + "'");
  }

  if (parts[0] == "spline") spec.method = Method::Spline;
  else if (parts[0] == "quad") spec.method = Method::Quad;
  else if (parts[0] == "quant") spec.method = Method::Quant;
  else throw Error(ErrorCode::Spec, "unknown estimation method '" + parts[0] + "'");

  if (parts[1] == "obs") spec.data = DataSource::Obs;
  else if (parts[1] == "trunc") spec.data = DataSource::Trunc;
  else if (parts[1] == "notrunc") spec.data = DataSource::NoTrunc;
  else throw Error(ErrorCode::Spec, "unknown data option '" + parts[1] + "'");

  if (parts[2] == "none") spec.effects = Effects::None;
  else if (parts[2] == "fixed") spec.effects = Effects::Fixed;
  else if (parts[2] == "random-quad") spec.effects = Effects::RandomQuad;
  else if (parts[2] == "random-spline") spec.effects = Effects::RandomSpline;
  else throw Error(ErrorCode::Spec, "unknown player effects '" + parts[2] + "'");

  if (!spec.is_preset()) {
    if (!allow_custom) {
      throw Error(ErrorCode::Spec, "'" + std::string(text) + "' is not one of the preset estimators");
    }
    // quant has no player terms of its own; only the imputation route adds them.
    if (spec.method == Method::Quant &&
        !((spec.data == DataSource::Obs && spec.effects == Effects::None) ||
          (spec.data != DataSource::Obs && spec.effects == Effects::Fixed))) {
      throw Error(ErrorCode::Spec, "unsupported quantile combination '" + std::string(text) + "'");
    }
    spec.custom = true;
  }
  return spec;
}

std::vector<double> observed_fraction_by_age(const PerformancePanel& panel) {
  std::vector<double> out(panel.n_ages(), 0.0);
  if (panel.n_players() == 0) return out;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = static_cast<double>(panel.observed_count(k)) / static_cast<double>(panel.n_players());
  }
  return out;
}

PerformancePanel apply_affine(const PerformancePanel& panel, double scale, double shift) {
  if (scale == 0.0) throw Error(ErrorCode::InvalidArgument, "invalid transform: scale must be nonzero");
  std::vector<double> values(panel.n_players() * panel.n_ages());
  for (std::size_t i = 0; i < panel.n_players(); ++i) {
    for (std::size_t k = 0; k < panel.n_ages(); ++k) {
      const auto v = panel.observed(i, k);
      values[i * panel.n_ages() + k] = v ? scale * *v + shift : 0.0;
    }
  }
  return PerformancePanel(panel.grid(), panel.player_ids(), std::move(values), panel.mask());
}

}  // namespace aging
