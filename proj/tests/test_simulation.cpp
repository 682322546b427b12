#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aging/error.hpp"
#include "aging/simulation.hpp"
#include "fixtures.hpp"

using namespace aging;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("generating curve") {
  SimulationConfig cfg;
  const auto g = true_mean_curve(cfg);
  CHECK(std::abs(g.at_age(25) - 0.0) < 1e-9);
  CHECK(std::abs(g.at_age(22) - -1.0) < 1e-9);
  CHECK(std::abs(g.at_age(28) - -1.0 - 9 * -0.006 - 27 * 0.0045) < 1e-9);
  CHECK(std::abs(g.at_age(40) - -11.1625) < 1e-9);
  for (int t = 18; t <= 40; ++t) CHECK(g.at_age(t) <= g.at_age(25));

  // Smooth join at the peak: one-sided slopes and curvatures agree.
  const auto f = [&](double t) {
    const double d = t - 25.0;
    return cfg.a * d * d + (d > 0 ? cfg.b * d * d + cfg.c * d * d * d : 0.0);
  };
  const double h = 1e-4;
  CHECK(std::abs((f(25 + h) - f(25)) / h) < 1e-3);
  CHECK(std::abs((f(25) - f(25 - h)) / h) < 1e-3);

  cfg.omega = 1.0;
  const auto shifted = true_mean_curve(cfg);
  for (std::size_t k = 0; k < g.g.size(); ++k) CHECK(shifted.g[k] - g.g[k] == doctest::Approx(1.0));
}

TEST_CASE("simulated panel") {
  SUBCASE("no noise reproduces the curve") {
    SimulationConfig cfg;
    cfg.n_players = 5;
    cfg.sigma_gamma = cfg.sigma_b = cfg.sigma_eps = 0.0;
    Rng rng(1);
    const auto sim = simulate_panel(cfg, rng);
    CHECK(sim.panel.fully_observed());
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t k = 0; k < sim.panel.n_ages(); ++k) CHECK(*sim.panel.observed(i, k) == sim.truth.true_curve.g[k]);
    }
  }
  SUBCASE("moments at large N") {
    SimulationConfig cfg;
    cfg.n_players = 10000;
    Rng rng(11);
    const auto sim = simulate_panel(cfg, rng);
    CHECK(std::abs(sd(sim.truth.player_intercepts) - 0.8) < 0.03);
    CHECK(std::abs(mean(sim.truth.player_intercepts)) < 0.04);
    CHECK(std::abs(sd(sim.truth.player_quads) - 0.02) < 0.001);
    for (std::size_t k = 0; k < sim.panel.n_ages(); ++k) {
      const auto col = sim.panel.observed_at_age(k);
      const double d = sim.panel.grid().age_at(k) - 25.0;
      const double var = 0.64 + 1.0 + (d > 0 ? 0.0004 * d * d * d * d : 0.0);
      CHECK(std::abs(mean(col) - sim.truth.true_curve.g[k]) < 4.0 * std::sqrt(var / 10000.0));
    }
    // Truth bundle is consistent with the values up to noise.
    std::vector<double> resid;
    for (std::size_t i = 0; i < 200; ++i) {
      for (std::size_t k = 0; k < sim.panel.n_ages(); ++k) {
        const double d = sim.panel.grid().age_at(k) - 25.0;
        const double noiseless = sim.truth.true_curve.g[k] + sim.truth.player_intercepts[i] +
                                 (d > 0 ? sim.truth.player_quads[i] * d * d : 0.0);
        CHECK(sim.truth.noiseless_values[i * sim.panel.n_ages() + k] == doctest::Approx(noiseless));
        resid.push_back(*sim.panel.observed(i, k) - noiseless);
      }
    }
    CHECK(std::abs(sd(resid) - 1.0) < 0.05);
  }
  SUBCASE("seeded") {
    SimulationConfig cfg;
    Rng a(4), b(4);
    CHECK(simulate_panel(cfg, a).truth.noiseless_values == simulate_panel(cfg, b).truth.noiseless_values);
  }
  SUBCASE("config checks") {
    SimulationConfig cfg;
    cfg.sigma_eps = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.t_peak = 40;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.pi_schedule = {0.5};
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}

TEST_CASE("default observed-fraction schedule") {
  const AgeGrid grid(18, 40);
  const auto pi = default_pi_schedule(grid);
  CHECK(pi[grid.index_of(18)] == doctest::Approx(0.09));
  CHECK(pi[grid.index_of(23)] == doctest::Approx(0.63));
  CHECK(pi[grid.index_of(24)] == doctest::Approx(0.63));
  CHECK(pi[grid.index_of(36)] == doctest::Approx(0.09));
  for (std::size_t k = 1; k <= grid.index_of(23); ++k) CHECK(pi[k] >= pi[k - 1]);
  for (std::size_t k = grid.index_of(24) + 1; k < pi.size(); ++k) CHECK(pi[k] <= pi[k - 1]);
  for (double p : pi) {
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
  CHECK_THROWS_AS(default_pi_schedule(AgeGrid(20, 40)), Error);
}

TEST_CASE("cumulative-performance mask") {
  SUBCASE("counts match the schedule") {
    SimulationConfig cfg;
    cfg.n_players = 300;
    const auto pi = cfg.resolved_pi();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto sim = simulate_masked(cfg, seed);
      for (std::size_t k = 0; k < pi.size(); ++k) {
        const auto want = static_cast<std::size_t>(std::lround(300 * pi[k]));
        CHECK(sim.masked.observed_count(k) == want);
        CHECK(sim.mask.diagnostics.target_counts[k] == static_cast<int>(want));
      }
    }
  }
  SUBCASE("extreme schedules") {
    SimulationConfig cfg;
    cfg.n_players = 50;
    Rng rng(3);
    const auto sim = simulate_panel(cfg, rng);
    Rng r1(1);
    const auto all = generate_mask(sim.panel, std::vector<double>(23, 1.0), r1);
    CHECK(std::all_of(all.mask.begin(), all.mask.end(), [](auto m) { return m == 1; }));
    const auto none = generate_mask(sim.panel, std::vector<double>(23, 0.0), r1);
    CHECK(std::all_of(none.mask.begin(), none.mask.end(), [](auto m) { return m == 0; }));
    CHECK_THROWS_AS(generate_mask(sim.panel, std::vector<double>(22, 0.5), r1), Error);
    CHECK_THROWS_AS(generate_mask(sim.panel.with_mask(all.mask).with_mask(none.mask), std::vector<double>(23, 0.5), r1),
                    Error);
  }
  SUBCASE("selection probabilities") {
    const auto sim = fixtures::masked_sim(5, 200);
    const auto& d = sim.mask.diagnostics;
    for (const auto& row : d.selection_probs) {
      CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Weight ratios follow the cumulative sums.
    const std::size_t k = 10;
    const double lr = d.log_weights[0 * 23 + k] - d.log_weights[1 * 23 + k];
    CHECK(std::log(d.selection_probs[k][0] / d.selection_probs[k][1]) == doctest::Approx(lr).epsilon(1e-9));
  }
  SUBCASE("one of two players at a million to one") {
    const auto p = PerformancePanel::complete(AgeGrid(18, 19), {"strong", "weak"}, {std::log(1e6), 0.0, 0.0, 0.0});
    int weak = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) {
      Rng rng(s);
      weak += generate_mask(p, {0.5, 0.0}, rng).mask[2];
    }
    CHECK(weak <= 2);
  }
  SUBCASE("two of three players matches the sequential-draw law") {
    const std::vector<double> w{1.0, 2.0, 5.0};
    const auto p = PerformancePanel::complete(AgeGrid(18, 19), {"a", "b", "c"},
                                            {std::log(w[0]), 0.0, std::log(w[1]), 0.0, std::log(w[2]), 0.0});
    const double total = 8.0;
    std::vector<double> left_out(3, 0.0);
    for (int i = 0; i < 3; ++i) {
      for (int first = 0; first < 3; ++first) {
        if (first == i) continue;
        left_out[i] += w[first] / total * (w[3 - i - first] / (total - w[first]));
      }
    }
    const int trials = 40000;
    std::vector<int> missed(3, 0);
    for (int s = 0; s < trials; ++s) {
      Rng rng(static_cast<std::uint64_t>(s) + 1000);
      const auto m = generate_mask(p, {2.0 / 3.0, 0.0}, rng).mask;
      CHECK(m[0] + m[2] + m[4] == 2);
      for (int i = 0; i < 3; ++i) missed[i] += m[2 * i] == 0;
    }
    for (int i = 0; i < 3; ++i) {
      const double se = std::sqrt(left_out[i] * (1 - left_out[i]) / trials);
      CHECK(std::abs(missed[i] / double(trials) - left_out[i]) < 4.5 * se);
    }
  }
  SUBCASE("selection favours strong careers") {
    double gap = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto sim = fixtures::masked_sim(seed, 600);
      const std::size_t k = sim.masked.grid().index_of(36);
      gap += mean(sim.masked.observed_at_age(k)) - mean(sim.simulated.panel.observed_at_age(k));
    }
    CHECK(gap / 10 > 1.0);
  }
}

TEST_CASE("factorial runner") {
  SimulationConfig base;
  SweepSets sweep{{120}, {0.0, 1.0}, {0.8}};
  const std::vector<EstimatorSpec> specs{EstimatorSpec::parse("delta-plus"), EstimatorSpec::parse("spline:obs:fixed")};
  const auto r1 = run_factorial(base, sweep, specs, 3, 17);
  const auto r2 = run_factorial(base, sweep, specs, 3, 17);
  REQUIRE(r1.cells.size() == 2);
  CHECK(r1.replications == 3);
  CHECK(r1.cells[1].cell.omega == 1.0);
  for (std::size_t c = 0; c < 2; ++c) {
    REQUIRE(r1.cells[c].outcomes.size() == 2);
    CHECK(r1.cells[c].outcomes[1].spec == "spline:obs:fixed");
    for (std::size_t s = 0; s < 2; ++s) {
      const auto& o = r1.cells[c].outcomes[s];
      CHECK(o.rmse_by_age.size() == 23);
      CHECK(o.sbd_values.size() + static_cast<std::size_t>(o.failure_count) == 3);
      CHECK(o.rmse_by_age == r2.cells[c].outcomes[s].rmse_by_age);
      CHECK(o.sbd_values == r2.cells[c].outcomes[s].sbd_values);
    }
  }
  const auto r3 = run_factorial(base, sweep, specs, 3, 18);
  CHECK(r3.cells[0].outcomes[1].sbd_values != r1.cells[0].outcomes[1].sbd_values);

  SUBCASE("failures are counted, not fatal") {
    // Five players: the youngest ages have no observed cells, so the
    // per-age quantile estimator cannot run.
    const auto tiny = run_factorial(base, SweepSets{{5}, {0.0}, {0.8}}, {EstimatorSpec::parse("quant:obs:none")}, 4, 1);
    const auto& o = tiny.cells[0].outcomes[0];
    CHECK(o.failure_count == 4);
    CHECK(o.sbd_values.empty());
    CHECK(std::isnan(o.rmse_by_age[0]));
  }
  CHECK_THROWS_AS(run_factorial(base, SweepSets{{}, {0.0}, {0.8}}, specs, 1, 1), Error);
  CHECK_THROWS_AS(run_factorial(base, sweep, specs, 0, 1), Error);
}
