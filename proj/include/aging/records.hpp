#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aging/panel.hpp"

namespace aging {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  static Date parse(const std::string& iso);  // YYYY-MM-DD
  auto operator<=>(const Date&) const = default;
};

struct PlayerSeasonRecord {
  std::string player_id;
  Date birth_date;
  int season_start_year = 0;
  std::string position;
  int games_played = 0;
  int goals = 0;
  int assists = 0;
  std::size_t line = 0;  // 1-based source line

  double points_per_game() const { return static_cast<double>(goals + assists) / games_played; }
};

struct LoadedRecords {
  std::vector<PlayerSeasonRecord> records;
  std::size_t skipped_zero_games = 0;
};

/// Reads the player-season CSV (header: player_id, birth_date,
/// season_start_year, position, games_played, goals, assists). Rows with zero
/// games are skipped and counted. Throws Parse with the line number on a bad
/// row and DuplicateRecord naming both lines on a repeated (player, season).
LoadedRecords load_records(const std::string& path);
LoadedRecords parse_records(const std::string& text);

struct PanelFilters {
  std::set<std::string> positions;  // empty keeps every position
  std::optional<Date> min_birth_date;
  std::optional<int> first_season;
  std::optional<int> last_season;
  /// Month/day at which age is taken. Months before July fall in the second
  /// calendar year of the season.
  int age_cutoff_month = 1;
  int age_cutoff_day = 31;
};

/// Integer age in completed years for a season under `filters`' cutoff.
int season_age(const Date& birth, int season_start_year, const PanelFilters& filters);

/// Standardizes points per game within each season (mean 0, sample sd 1 over
/// the records that pass the filters) and lays them out on `grid`. Players
/// with no season on the grid are dropped.
PerformancePanel build_panel(const std::vector<PlayerSeasonRecord>& records, const AgeGrid& grid,
                             const PanelFilters& filters);

}  // namespace aging
