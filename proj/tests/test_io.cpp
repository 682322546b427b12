#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>

#include "aging/config.hpp"
#include "aging/csv.hpp"
#include "aging/error.hpp"
#include "aging/records.hpp"
#include "fixtures.hpp"

using namespace aging;
namespace fs = std::filesystem;

namespace {

const char* kRecords =
    "player_id,birth_date,season_start_year,position,games_played,goals,assists\n"
    "a,1990-01-01,2011,C,10,5,5\n"
    "b,1991-06-10,2011,D,20,2,2\n"
    "a,1990-01-01,2013,C,10,1,1\n"
    "b,1991-06-10,2013,D,10,4,4\n"
    "c,1985-05-05,2013,C,0,0,0\n";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aging_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AGING_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("csv fields") {
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_csv_line("\"x,y\",\"say \"\"hi\"\"\",z") == std::vector<std::string>{"x,y", "say \"hi\"", "z"});
  const std::vector<std::string> tricky{"plain", "with,comma", "with \"quote\"", ""};
  CHECK(split_csv_line(join_csv(tricky)) == tricky);

  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "NA");
  CHECK(format_double(-kInf) == "-Inf");
  CHECK(std::isnan(parse_double("NA")));
  CHECK(parse_double("Inf") == kInf);
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = z(gen);
    CHECK(parse_double(format_double(v)) == v);
  }
}

TEST_CASE("panel csv round trip") {
  const auto sim = fixtures::masked_sim(8, 40);
  const auto back = panel_from_csv(panel_to_csv(sim.masked));
  CHECK(back.grid() == sim.masked.grid());
  CHECK(back.player_ids() == sim.masked.player_ids());
  CHECK(back.mask() == sim.masked.mask());
  for (std::size_t i = 0; i < back.n_players(); ++i) {
    for (std::size_t k = 0; k < back.n_ages(); ++k) CHECK(back.observed(i, k) == sim.masked.observed(i, k));
  }
  CHECK(panel_to_csv(back) == panel_to_csv(sim.masked));

  const std::string dup = "player_id,age,value,observed\np,20,1,1\np,21,2,1\np,20,3,1\n";
  try {
    panel_from_csv(dup);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateRecord);
  }
  CHECK_THROWS_AS(panel_from_csv("player_id,age,value,observed\np,20,1,2\np,21,1,1\n"), Error);
  CHECK_THROWS_AS(panel_from_csv("id,age,value\n"), Error);
}

TEST_CASE("curve and truth csv round trips") {
  const AgeGrid grid(18, 21);
  std::vector<NamedCurve> curves{{"spline:obs:fixed", -1, AgeCurve(grid, {0.25, -1.0 / 3.0, 2.0, 1e-17})},
                                 {"delta-plus", -1, AgeCurve(grid, {0.0, 1.0, 2.0, 3.0}, std::vector<int>{0, 4, 5, 6})}};
  const auto back = curves_from_csv(curves_to_csv(curves));
  REQUIRE(back.size() == 2);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(back[c].spec == curves[c].spec);
    CHECK(back[c].curve.grid == grid);
    CHECK(back[c].curve.g == curves[c].curve.g);
  }
  CHECK(back[1].curve.support_counts == curves[1].curve.support_counts);

  std::vector<NamedCurve> bundle{{"quant:obs:none", 0, AgeCurve(grid, {1, 2, 3, 4})},
                                 {"quant:obs:none", 1, AgeCurve(grid, {5, 6, 7, 8})}};
  const auto bb = curves_from_csv(curves_to_csv(bundle));
  REQUIRE(bb.size() == 2);
  CHECK(bb[1].draw == 1);
  CHECK(bb[1].curve.g == bundle[1].curve.g);

  const AgeCurve truth(grid, {-5.444444444444445, -4.0, -2.7777777777777777, -1.7777777777777777});
  const auto t = truth_curve_from_csv(truth_curve_to_csv(truth));
  CHECK(t.grid == grid);
  CHECK(t.g == truth.g);
  CHECK_THROWS_AS(truth_curve_from_csv("age,g\n18,1\n20,2\n"), Error);
}

TEST_CASE("player-season records") {
  const auto loaded = parse_records(kRecords);
  CHECK(loaded.records.size() == 4);
  CHECK(loaded.skipped_zero_games == 1);
  CHECK(loaded.records[2].line == 4);
  CHECK(loaded.records[0].points_per_game() == 1.0);

  SUBCASE("duplicate names both lines") {
    const std::string text = std::string(kRecords) + "a,1990-01-01,2011,C,3,1,1\n";
    try {
      parse_records(text);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DuplicateRecord);
      const std::string msg = e.what();
      CHECK(msg.find("line") != std::string::npos);
      CHECK(msg.find(" 2 ") != std::string::npos);
      CHECK(msg.find("7") != std::string::npos);
    }
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(parse_records("player,birth\n"), Error);
    try {
      parse_records(std::string(kRecords) + "d,1990-13-01,2013,C,1,1,1\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
      CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_records(std::string(kRecords) + "d,1990-01-01,2013,C,-1,1,1\n"), Error);
    CHECK_THROWS_AS(parse_records(std::string(kRecords) + "d,1990-01-01,2013,C,1,1\n"), Error);
  }
}

TEST_CASE("season age") {
  const Date feb15{1990, 2, 15};
  PanelFilters jan;
  CHECK(season_age(feb15, 2011, jan) == 21);
  PanelFilters feb;
  feb.age_cutoff_month = 2;
  feb.age_cutoff_day = 15;
  CHECK(season_age(feb15, 2011, feb) == 22);
  PanelFilters sep;
  sep.age_cutoff_month = 9;
  sep.age_cutoff_day = 15;
  CHECK(season_age(feb15, 2011, sep) == 21);
  CHECK(season_age(Date{1990, 10, 1}, 2011, sep) == 20);
  CHECK(Date::parse("2000-02-29").day == 29);
  CHECK_THROWS_AS(Date::parse("1999-02-29"), Error);
}

TEST_CASE("panel from records") {
  const auto recs = parse_records(kRecords).records;
  const AgeGrid grid(18, 30);
  const auto p = build_panel(recs, grid, {});
  REQUIRE(p.n_players() == 2);
  CHECK(p.player_ids() == std::vector<std::string>{"a", "b"});
  const double r = std::sqrt(0.5);
  CHECK(*p.observed(0, grid.index_of(22)) == doctest::Approx(r).epsilon(1e-12));
  CHECK(*p.observed(0, grid.index_of(24)) == doctest::Approx(-r).epsilon(1e-12));
  CHECK(*p.observed(1, grid.index_of(20)) == doctest::Approx(-r).epsilon(1e-12));
  CHECK(*p.observed(1, grid.index_of(22)) == doctest::Approx(r).epsilon(1e-12));
  CHECK(p.total_observed() == 4);
  CHECK_FALSE(p.is_observed(0, grid.index_of(23)));

  SUBCASE("filters") {
    PanelFilters f;
    f.min_birth_date = Date{1991, 1, 1};
    // Only player b survives, which leaves one record per season.
    CHECK_THROWS_AS(build_panel(recs, grid, f), Error);
    PanelFilters pos;
    pos.positions = {"C"};
    CHECK_THROWS_AS(build_panel(recs, grid, pos), Error);
    PanelFilters seasons;
    seasons.first_season = 2012;
    const auto later = build_panel(recs, grid, seasons);
    CHECK(later.total_observed() == 2);
    CHECK(later.is_observed(0, grid.index_of(24)));
    seasons.last_season = 2012;
    CHECK_THROWS_AS(build_panel(recs, grid, seasons), Error);
  }
  SUBCASE("players off the grid are dropped") {
    const auto narrow = build_panel(recs, AgeGrid(21, 23), {});
    CHECK(narrow.n_players() == 2);
    CHECK(narrow.total_observed() == 2);
    CHECK_THROWS_AS(build_panel(recs, AgeGrid(30, 35), {}), Error);
  }
}

TEST_CASE("standardization happens before the grid clip") {
  const auto recs = parse_records(fixtures::random_records_csv(42)).records;
  REQUIRE(recs.size() == 500);

  const PanelFilters f;
  const AgeGrid wide(10, 50);
  const auto all = build_panel(recs, wide, f);
  std::map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < all.n_players(); ++i) row[all.player_ids()[i]] = i;
  std::map<int, std::vector<double>> by_season;
  for (const auto& r : recs) {
    const int age = season_age(r.birth_date, r.season_start_year, f);
    by_season[r.season_start_year].push_back(*all.observed(row.at(r.player_id), wide.index_of(age)));
  }
  for (const auto& [season, z] : by_season) {
    CAPTURE(season);
    CHECK(std::abs(sample_mean(z)) < 1e-10);
    CHECK(std::abs(sample_sd(z) - 1.0) < 1e-10);
  }

  const AgeGrid narrow(25, 28);
  const auto clipped = build_panel(recs, narrow, f);
  for (std::size_t i = 0; i < clipped.n_players(); ++i) {
    for (std::size_t k = 0; k < narrow.size(); ++k) {
      const auto v = clipped.observed(i, k);
      if (!v) continue;
      CHECK(*v == *all.observed(row.at(clipped.player_ids()[i]), wide.index_of(narrow.age_at(k))));
    }
  }
}

TEST_CASE("config parsing") {
  const auto t = parse_toml(
      "# comment\n"
      "top = 1\n"
      "[sweep]\n"
      "n_players = [300, 1_000]  # trailing\n"
      "omega = [\n  0.0,\n  1.5,\n]\n"
      "[estimation]\n"
      "specs = [\"delta-plus\", \"spline:obs:fixed\"]\n"
      "[evaluation]\n"
      "sbd_z_normalize = true\n");
  CHECK(t.at("top").as_integer("top") == 1);
  CHECK(t.at("sweep.n_players").as_numbers("n") == std::vector<double>{300, 1000});
  CHECK(t.at("sweep.omega").as_numbers("o") == std::vector<double>{0.0, 1.5});
  CHECK(t.at("estimation.specs").as_strings("s") == std::vector<std::string>{"delta-plus", "spline:obs:fixed"});
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2\n"), Error);
  CHECK_THROWS_AS(parse_toml("a = [[1]]\n"), Error);
  CHECK_THROWS_AS(parse_toml("a = \"open\n"), Error);

  const auto cfg = sweep_config_from_toml("[sweep]\nn_players = [50]\nseed = 9\n[evaluation]\nsbd_z_normalize = true\n");
  CHECK(cfg.sweep.n_players == std::vector<std::size_t>{50});
  CHECK(cfg.seed == 9);
  CHECK(cfg.has_seed);
  CHECK(cfg.sbd_z_normalize);
  try {
    sweep_config_from_toml("[sweep]\nreplicatons = 3\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("replicatons") != std::string::npos);
  }
  CHECK_THROWS_AS(sweep_config_from_toml("[players]\nsigma_eps = -1\n"), Error);
  CHECK_THROWS_AS(sweep_config_from_toml("[estimation]\nspecs = [\"spline:bogus:fixed\"]\n"), Error);

  const auto full = load_sweep_config(std::string(AGING_SOURCE_DIR) + "/configs/factorial.toml");
  CHECK(full.sweep.n_players.size() * full.sweep.omega.size() * full.sweep.sigma_gamma.size() == 18);
  CHECK(full.specs == preset_specs());
  CHECK(full.replications == 200);
  CHECK(full.has_seed);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  const std::string out = " --out " + dir.string();
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("simulate --players 30" + out) == 1);  // no seed
  REQUIRE(run_cli("--seed 3 simulate --players 60 --masked" + out) == 0);
  CHECK(fs::exists(dir / "panel.csv"));
  CHECK(fs::exists(dir / "masked.csv"));
  CHECK(run_cli("estimate --panel " + (dir / "masked.csv").string() + " --spec spline:obs:fixed" + out) == 0);
  CHECK(run_cli("estimate --panel " + (dir / "masked.csv").string() + " --spec spline:nope:fixed" + out) == 2);
  CHECK(run_cli("estimate --panel " + (dir / "masked.csv").string() + " --spec quad:obs:fixed" + out) == 2);

  write_text_file((dir / "bad.csv").string(), "player_id,age,value,observed\np,20,oops,1\n");
  CHECK(run_cli("estimate --panel " + (dir / "bad.csv").string() + out) == 2);

  // A zero truth curve has no shape, which is a numerical failure.
  write_text_file((dir / "zero.csv").string(), truth_curve_to_csv(AgeCurve(AgeGrid(18, 40), std::vector<double>(23, 0.0))));
  CHECK(run_cli("evaluate --curves " + (dir / "curves.csv").string() + " --truth " + (dir / "zero.csv").string() + out) ==
        3);
  CHECK(run_cli("evaluate --curves " + (dir / "curves.csv").string() + " --truth " + (dir / "truth.csv").string() + out) ==
        0);
  fs::remove_all(dir);
}
