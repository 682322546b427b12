#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "aging/panel.hpp"
#include "aging/simulation.hpp"

namespace fixtures {

inline constexpr double NA = std::numeric_limits<double>::quiet_NaN();

// Rows of values with NA for unobserved cells; `sentinel` fills the stored
// value behind each unobserved cell.
inline aging::PerformancePanel panel(const aging::AgeGrid& grid, const std::vector<std::vector<double>>& rows,
                                     double sentinel = 0.0) {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back("p" + std::to_string(i));
    for (double v : rows[i]) {
      const bool obs = !std::isnan(v);
      values.push_back(obs ? v : sentinel);
      mask.push_back(obs ? 1 : 0);
    }
  }
  return aging::PerformancePanel(grid, ids, values, mask);
}

// Masked simulated panel under the default design.
inline aging::MaskedSimulation masked_sim(std::uint64_t seed, std::size_t n_players = 600, double sigma_gamma = 0.8) {
  aging::SimulationConfig cfg;
  cfg.n_players = n_players;
  cfg.sigma_gamma = sigma_gamma;
  return aging::simulate_masked(cfg, seed);
}

// Slides y across a zero-padded copy of x and keeps the best overlap sum.
inline double sbd_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> padded(3 * n - 2, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[n - 1 + i] = x[i];
  double best = -1e300;
  for (std::size_t start = 0; start + n <= padded.size(); ++start) {
    double cc = 0.0;
    for (std::size_t i = 0; i < n; ++i) cc += padded[start + i] * y[i];
    best = std::max(best, cc);
  }
  double nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  return 1.0 - best / std::sqrt(nx * ny);
}

// Records CSV with `players` players over five consecutive seasons each.
inline std::string random_records_csv(std::uint64_t seed, int players = 100) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> birth_year(1970, 1985), month(1, 12), day(1, 28), games(1, 82), pts(0, 60);
  std::string text = "player_id,birth_date,season_start_year,position,games_played,goals,assists\n";
  for (int i = 0; i < players; ++i) {
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02d-%02d", birth_year(gen), month(gen), day(gen));
    for (int s = 2000; s < 2005; ++s) {
      text += "p" + std::to_string(i) + "," + date + "," + std::to_string(s) + "," + (i % 3 ? "F" : "D") + "," +
              std::to_string(games(gen)) + "," + std::to_string(pts(gen)) + "," + std::to_string(pts(gen)) + "\n";
    }
  }
  return text;
}

}  // namespace fixtures
