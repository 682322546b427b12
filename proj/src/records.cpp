#include "aging/records.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "aging/csv.hpp"
#include "aging/error.hpp"

namespace aging {

namespace {

int parse_int(const std::string& s, const std::string& what, std::size_t line) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : days[m - 1];
}

}  // namespace

Date Date::parse(const std::string& iso) {
  Date d;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw Error(ErrorCode::Parse, "date must be YYYY-MM-DD, got '" + iso + "'");
  }
  d.year = parse_int(iso.substr(0, 4), "year", 0);
  d.month = parse_int(iso.substr(5, 2), "month", 0);
  d.day = parse_int(iso.substr(8, 2), "day", 0);
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
    throw Error(ErrorCode::Parse, "invalid calendar date '" + iso + "'");
  }
  return d;
}

LoadedRecords parse_records(const std::string& text) {
  static const std::vector<std::string> header{"player_id",   "birth_date", "season_start_year", "position",
                                               "games_played", "goals",      "assists"};
  LoadedRecords out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::map<std::pair<std::string, int>, std::size_t> keys;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (!seen_header) {
      if (fields != header) throw Error(ErrorCode::Parse, "line 1: header must be " + join_csv(header));
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 7 fields, got " +
                                        std::to_string(fields.size()));
    }
    PlayerSeasonRecord r;
    r.line = line_no;
    r.player_id = fields[0];
    if (r.player_id.empty()) throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": empty player_id");
    try {
      r.birth_date = Date::parse(fields[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    r.season_start_year = parse_int(fields[2], "season_start_year", line_no);
    r.position = fields[3];
    r.games_played = parse_int(fields[4], "games_played", line_no);
    r.goals = parse_int(fields[5], "goals", line_no);
    r.assists = parse_int(fields[6], "assists", line_no);
    if (r.games_played < 0 || r.goals < 0 || r.assists < 0) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": counts must be nonnegative");
    }

    const auto key = std::make_pair(r.player_id, r.season_start_year);
    if (const auto it = keys.find(key); it != keys.end()) {
      throw Error(ErrorCode::DuplicateRecord, "duplicate record for player " + r.player_id + " season " +
                                                  std::to_string(r.season_start_year) + " on lines " +
                                                  std::to_string(it->second) + " and " + std::to_string(line_no));
    }
    keys.emplace(key, line_no);

    if (r.games_played == 0) {
      ++out.skipped_zero_games;
      continue;
    }
    out.records.push_back(std::move(r));
  }
  if (!seen_header) throw Error(ErrorCode::Parse, "empty records file");
  return out;
}

LoadedRecords load_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open records file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_records(buf.str());
}

int season_age(const Date& birth, int season_start_year, const PanelFilters& filters) {
  const int ref_year = filters.age_cutoff_month < 7 ? season_start_year + 1 : season_start_year;
  int age = ref_year - birth.year;
  if (filters.age_cutoff_month < birth.month ||
      (filters.age_cutoff_month == birth.month && filters.age_cutoff_day < birth.day)) {
    --age;
  }
  return age;
}

PerformancePanel build_panel(const std::vector<PlayerSeasonRecord>& records, const AgeGrid& grid,
                             const PanelFilters& filters) {
  std::vector<const PlayerSeasonRecord*> kept;
  for (const auto& r : records) {
    if (r.games_played < 1) continue;
    if (!filters.positions.empty() && !filters.positions.contains(r.position)) continue;
    if (filters.min_birth_date && r.birth_date < *filters.min_birth_date) continue;
    if (filters.first_season && r.season_start_year < *filters.first_season) continue;
    if (filters.last_season && r.season_start_year > *filters.last_season) continue;
    kept.push_back(&r);
  }
  if (kept.empty()) throw Error(ErrorCode::InsufficientData, "no records left after filtering");

  std::map<int, std::vector<double>> by_season;
  for (const auto* r : kept) by_season[r->season_start_year].push_back(r->points_per_game());
  std::map<int, std::pair<double, double>> moments;
  for (const auto& [season, ppg] : by_season) {
    if (ppg.size() < 2) {
      throw Error(ErrorCode::InsufficientData,
                  "cannot standardize season " + std::to_string(season) + ": fewer than 2 records");
    }
    const double sd = sample_sd(ppg);
    if (!(sd > 0.0)) {
      throw Error(ErrorCode::InsufficientData,
                  "cannot standardize season " + std::to_string(season) + ": zero spread in points per game");
    }
    moments[season] = {sample_mean(ppg), sd};
  }

  std::vector<std::string> ids;
  std::map<std::string, std::size_t> row_of;
  struct Placement {
    std::size_t row;
    std::size_t age_index;
    double value;
    std::size_t line;
  };
  std::vector<Placement> cells;
  for (const auto* r : kept) {
    const int age = season_age(r->birth_date, r->season_start_year, filters);
    if (!grid.contains(age)) continue;
    auto [it, inserted] = row_of.emplace(r->player_id, ids.size());
    if (inserted) ids.push_back(r->player_id);
    const auto& [mean, sd] = moments.at(r->season_start_year);
    cells.push_back({it->second, grid.index_of(age), (r->points_per_game() - mean) / sd, r->line});
  }
  if (ids.empty()) throw Error(ErrorCode::InsufficientData, "no records fall on the age grid");

  const std::size_t ages = grid.size();
  std::vector<double> values(ids.size() * ages, 0.0);
  std::vector<std::uint8_t> mask(ids.size() * ages, 0);
  std::vector<std::size_t> source(ids.size() * ages, 0);
  for (const auto& c : cells) {
    const std::size_t at = c.row * ages + c.age_index;
    if (mask[at]) {
      throw Error(ErrorCode::DuplicateRecord, "player " + ids[c.row] + " has two seasons at age " +
                                                  std::to_string(grid.age_at(c.age_index)) + " (lines " +
                                                  std::to_string(source[at]) + " and " + std::to_string(c.line) + ")");
    }
    values[at] = c.value;
    mask[at] = 1;
    source[at] = c.line;
  }
  return PerformancePanel(grid, std::move(ids), std::move(values), std::move(mask));
}

}  // namespace aging
