#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aging/numerics.hpp"

namespace aging {

/// One observed player-age cell.
struct Cell {
  std::size_t player;
  std::size_t age_index;
  double value;
};

/// Player x age performance matrix with an observability mask. Masked cells
/// hold a quiet NaN; nothing that was not observed survives construction.
/// Immutable once built.
class PerformancePanel {
 public:
  PerformancePanel() = default;
  PerformancePanel(AgeGrid grid, std::vector<std::string> player_ids, std::vector<double> values,
                   std::vector<std::uint8_t> mask);

  /// Fully observed panel.
  static PerformancePanel complete(AgeGrid grid, std::vector<std::string> player_ids, std::vector<double> values);

  const AgeGrid& grid() const { return grid_; }
  std::size_t n_players() const { return ids_.size(); }
  std::size_t n_ages() const { return grid_.size(); }
  const std::vector<std::string>& player_ids() const { return ids_; }

  bool is_observed(std::size_t player, std::size_t age_index) const { return mask_[offset(player, age_index)] != 0; }
  std::optional<double> observed(std::size_t player, std::size_t age_index) const;
  /// Stored value, NaN where unobserved.
  double value(std::size_t player, std::size_t age_index) const { return values_[offset(player, age_index)]; }

  std::size_t observed_count(std::size_t age_index) const;
  std::size_t observed_count_for_player(std::size_t player) const;
  std::size_t total_observed() const;
  bool fully_observed() const { return total_observed() == values_.size(); }

  /// Observed values at one age, in player order.
  std::vector<double> observed_at_age(std::size_t age_index) const;
  /// Every observed cell, player-major.
  std::vector<Cell> observed_cells() const;

  const std::vector<std::uint8_t>& mask() const { return mask_; }

  /// Same players and values, restricted to `mask` (which must only keep
  /// cells that are observed here).
  PerformancePanel with_mask(const std::vector<std::uint8_t>& mask) const;

  /// Rows `rows` of this panel, in order; repeated rows get distinct ids.
  PerformancePanel select_players(const std::vector<std::size_t>& rows) const;

 private:
  std::size_t offset(std::size_t player, std::size_t age_index) const { return player * grid_.size() + age_index; }

  AgeGrid grid_;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

/// Mean curve g(t) on an integer age grid.
struct AgeCurve {
  AgeGrid grid;
  std::vector<double> g;
  std::optional<std::vector<int>> support_counts;

  AgeCurve() = default;
  AgeCurve(AgeGrid grid, std::vector<double> g, std::optional<std::vector<int>> support = std::nullopt);

  double at_age(int age) const { return g[grid.index_of(age)]; }
};

enum class Method { DeltaPlus, Spline, Quad, Quant };
enum class DataSource { Obs, Trunc, NoTrunc };
enum class Effects { None, Fixed, RandomQuad, RandomSpline };

/// method:data:effects selector.
struct EstimatorSpec {
  Method method = Method::Spline;
  DataSource data = DataSource::Obs;
  Effects effects = Effects::None;
  int spline_df = 6;
  double boundary_quantile = 0.75;
  bool custom = false;

  /// True when the triple is one of the ten named presets.
  bool is_preset() const;
  std::string name() const;

  /// Parses "spline:obs:fixed" or "delta-plus". Combinations outside the
  /// presets throw Spec unless allow_custom is set, in which case the result
  /// is flagged custom.
  static EstimatorSpec parse(std::string_view text, bool allow_custom = false);

  bool operator==(const EstimatorSpec&) const = default;
};

/// The ten presets, in table order.
std::vector<EstimatorSpec> preset_specs();

std::string to_string(Method m);
std::string to_string(DataSource d);
std::string to_string(Effects e);

/// Fitted player deviations. Polynomial effects are in raw age:
/// intercepts + linear t + quadratic t^2. Random-spline coefficients are on
/// the fit's natural spline basis (column 0 constant, so intercepts mirror it).
struct PlayerEffects {
  Effects kind = Effects::None;
  std::vector<double> intercepts;
  std::vector<double> linear;
  std::vector<double> quadratic;
  Eigen::MatrixXd spline_coeffs;
  /// Ridge ratios sigma_eps^2 / sigma_effect^2 used for random effects.
  std::vector<double> penalties;
};

struct FitResult {
  AgeCurve curve;
  PlayerEffects effects;
  double residual_sd = 0.0;
  EstimatorSpec spec;
  /// quad fits only: population curve as c0 + c1 t + c2 t^2.
  std::optional<std::array<double, 3>> quad_coefficients;
  bool ridge_used = false;
};

std::vector<double> observed_fraction_by_age(const PerformancePanel& panel);

/// Observed values mapped to scale * y + shift.
PerformancePanel apply_affine(const PerformancePanel& panel, double scale, double shift);

}  // namespace aging
