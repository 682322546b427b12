// Command-line front end: simulate, mask, estimate, impute, evaluate, sweep,
// bootstrap and summary. Every output is a CSV or JSON file under --out.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aging/config.hpp"
#include "aging/csv.hpp"
#include "aging/error.hpp"
#include "aging/estimate.hpp"
#include "aging/evaluation.hpp"
#include "aging/records.hpp"
#include "aging/simulation.hpp"

namespace fs = std::filesystem;
using namespace aging;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = ".";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t require_seed(const Globals& g, const std::string& command) {
  if (!g.seed) throw UsageError(command + " needs --seed");
  return *g.seed;
}

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

void emit(const Globals& g, const std::string& name, const std::string& text) {
  const fs::path p = out_path(g, name);
  write_text_file(p.string(), text);
  std::cerr << "wrote " << p.string() << "\n";
}

SimulationConfig base_config(const Globals& g) {
  return g.config.empty() ? SimulationConfig{} : load_sweep_config(g.config).base;
}

std::uint64_t spec_seed(std::uint64_t seed, const EstimatorSpec& spec) {
  return derive_seed(seed, 3, hash_label(spec.name()));
}

bool spec_is_stochastic(const EstimatorSpec& spec) {
  return spec.method != Method::DeltaPlus && spec.data != DataSource::Obs;
}

struct SpecOptions {
  std::vector<std::string> names;
  int spline_df = 6;
  double boundary_quantile = 0.75;
  bool allow_custom = false;

  void attach(CLI::App* app, bool many) {
    if (many) {
      app->add_option("--spec", names, "Estimator spec(s), e.g. spline:obs:fixed; default all presets");
    } else {
      app->add_option("--spec", names, "Estimator spec, e.g. spline:trunc:fixed")->required()->expected(1);
    }
    app->add_option("--spline-df", spline_df, "Natural spline columns")->check(CLI::PositiveNumber);
    app->add_option("--boundary-quantile", boundary_quantile, "Quantile for the imputation boundary and quant fits")
        ->check(CLI::Range(0.0, 1.0));
    app->add_flag("--allow-custom", allow_custom, "Accept method:data:effects triples outside the presets");
  }

  std::vector<EstimatorSpec> resolve() const {
    std::vector<EstimatorSpec> specs;
    if (names.empty()) {
      specs = preset_specs();
    } else {
      for (const auto& n : names) specs.push_back(EstimatorSpec::parse(n, allow_custom));
    }
    for (auto& s : specs) {
      s.spline_df = spline_df;
      s.boundary_quantile = boundary_quantile;
    }
    return specs;
  }
};

PanelFilters parse_filters(const std::vector<std::string>& positions, const std::string& min_birth,
                           std::optional<int> first_season, std::optional<int> last_season,
                           const std::string& cutoff) {
  PanelFilters f;
  f.positions.insert(positions.begin(), positions.end());
  if (!min_birth.empty()) f.min_birth_date = Date::parse(min_birth);
  f.first_season = first_season;
  f.last_season = last_season;
  if (cutoff.size() != 5 || cutoff[2] != '-') throw UsageError("--age-cutoff must be MM-DD");
  const Date probe = Date::parse("2000-" + cutoff);  // leap year accepts 02-29
  f.age_cutoff_month = probe.month;
  f.age_cutoff_day = probe.day;
  return f;
}

std::string fraction_csv(const PerformancePanel& panel) {
  const auto frac = observed_fraction_by_age(panel);
  std::string out = "age,observed,n_players,fraction\n";
  for (std::size_t k = 0; k < panel.n_ages(); ++k) {
    out += std::to_string(panel.grid().age_at(k)) + "," + std::to_string(panel.observed_count(k)) + "," +
           std::to_string(panel.n_players()) + "," + format_double(frac[k]) + "\n";
  }
  return out;
}

std::string trace_csv(const PerformancePanel& panel, const ImputationTrace& trace) {
  std::string out = "player_id,age,boundary,first_pass_mean,second_pass_mean,imputed\n";
  for (std::size_t c = 0; c < trace.cells.size(); ++c) {
    const auto& cell = trace.cells[c];
    out += join_csv({panel.player_ids()[cell.player], std::to_string(panel.grid().age_at(cell.age_index)),
                     format_double(trace.boundary[cell.age_index]), format_double(trace.first_pass_means[c]),
                     format_double(trace.second_pass_means[c]), format_double(trace.imputed[c])});
    out.push_back('\n');
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aging curve estimation from incomplete performance panels"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Root seed for stochastic commands");
  app.add_option("--config", g.config, "TOML config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate a fully observed panel and its truth");
  std::optional<std::size_t> sim_players;
  std::optional<double> sim_omega, sim_sigma_gamma;
  bool sim_masked = false;
  simulate->add_option("--players", sim_players, "Number of players")->check(CLI::PositiveNumber);
  simulate->add_option("--omega", sim_omega, "Peak height");
  simulate->add_option("--sigma-gamma", sim_sigma_gamma, "Player intercept sd");
  simulate->add_flag("--masked", sim_masked, "Also write the masked panel (same result as a later `mask`)");

  // mask
  auto* mask = app.add_subcommand("mask", "Apply cumulative-performance missingness to a full panel");
  std::string mask_panel;
  mask->add_option("--panel", mask_panel, "Fully observed panel CSV")->required()->check(CLI::ExistingFile);

  // estimate
  auto* est = app.add_subcommand("estimate", "Fit estimator specs on a panel");
  std::string est_panel;
  std::optional<std::size_t> est_pool;
  SpecOptions est_specs;
  est->add_option("--panel", est_panel, "Panel CSV")->required()->check(CLI::ExistingFile);
  est->add_option("--pool", est_pool, "Population size N_t for quantile mapping")->check(CLI::PositiveNumber);
  est_specs.attach(est, true);

  // impute
  auto* imp = app.add_subcommand("impute", "Complete a panel by imputation and write the trace");
  std::string imp_panel;
  std::optional<std::size_t> imp_pool;
  SpecOptions imp_spec;
  imp->add_option("--panel", imp_panel, "Panel CSV")->required()->check(CLI::ExistingFile);
  imp->add_option("--pool", imp_pool, "Population size N_t for quantile mapping")->check(CLI::PositiveNumber);
  imp_spec.attach(imp, false);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "RMSE and SBD of curves against a truth curve");
  std::string eval_curves, eval_truth;
  eval->add_option("--curves", eval_curves, "Curves CSV (single curves or a bootstrap bundle)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--truth", eval_truth, "Truth CSV with columns age,g")->required()->check(CLI::ExistingFile);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Factorial simulation study from --config");
  std::optional<int> sweep_reps;
  sweep->add_option("--replications", sweep_reps, "Override the configured replication count")
      ->check(CLI::PositiveNumber);

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "Player-level bootstrap curve bundle");
  std::string boot_panel;
  int boot_draws = 100;
  std::optional<std::size_t> boot_pool;
  SpecOptions boot_specs;
  boot->add_option("--panel", boot_panel, "Panel CSV")->required()->check(CLI::ExistingFile);
  boot->add_option("--draws", boot_draws, "Number of bootstrap draws")->check(CLI::PositiveNumber)->capture_default_str();
  boot->add_option("--pool", boot_pool, "Population size N_t for quantile mapping")->check(CLI::PositiveNumber);
  boot_specs.attach(boot, true);

  // summary
  auto* summary = app.add_subcommand("summary", "Observed fraction by age, from a panel or raw records");
  std::string sum_panel, sum_records, sum_min_birth, sum_cutoff = "01-31";
  std::vector<std::string> sum_positions;
  std::optional<int> sum_first, sum_last;
  int sum_tmin = 18, sum_tmax = 40;
  auto* sum_panel_opt = summary->add_option("--panel", sum_panel, "Panel CSV")->check(CLI::ExistingFile);
  auto* sum_records_opt =
      summary->add_option("--records", sum_records, "Player-season records CSV")->check(CLI::ExistingFile);
  sum_panel_opt->excludes(sum_records_opt);
  summary->add_option("--t-min", sum_tmin, "Youngest grid age")->capture_default_str();
  summary->add_option("--t-max", sum_tmax, "Oldest grid age")->capture_default_str();
  summary->add_option("--positions", sum_positions, "Positions to keep (default all)")->delimiter(',');
  summary->add_option("--min-birth-date", sum_min_birth, "Drop players born before YYYY-MM-DD");
  summary->add_option("--first-season", sum_first, "Earliest season start year");
  summary->add_option("--last-season", sum_last, "Latest season start year");
  summary->add_option("--age-cutoff", sum_cutoff, "Month-day at which season age is taken")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (simulate->parsed()) {
      const std::uint64_t seed = require_seed(g, "simulate");
      SimulationConfig cfg = base_config(g);
      if (sim_players) cfg.n_players = *sim_players;
      if (sim_omega) cfg.omega = *sim_omega;
      if (sim_sigma_gamma) cfg.sigma_gamma = *sim_sigma_gamma;
      const MaskedSimulation run = simulate_masked(cfg, seed);
      emit(g, "panel.csv", panel_to_csv(run.simulated.panel));
      emit(g, "truth.csv", truth_curve_to_csv(run.simulated.truth.true_curve));
      emit(g, "players.csv", player_truth_to_csv(run.simulated.panel, run.simulated.truth));
      if (sim_masked) emit(g, "masked.csv", panel_to_csv(run.masked));
    } else if (mask->parsed()) {
      const std::uint64_t seed = require_seed(g, "mask");
      const PerformancePanel full = panel_from_csv(read_text_file(mask_panel));
      SimulationConfig cfg = base_config(g);
      const auto pi = cfg.pi_schedule.empty() ? default_pi_schedule(full.grid()) : cfg.pi_schedule;
      Rng rng(derive_seed(seed, 2));
      const MaskResult m = generate_mask(full, pi, rng);
      emit(g, "masked.csv", panel_to_csv(full.with_mask(m.mask)));
      emit(g, "mask_counts.csv", mask_diagnostics_to_csv(full.grid(), m.diagnostics));
    } else if (est->parsed()) {
      const PerformancePanel panel = panel_from_csv(read_text_file(est_panel));
      const auto specs = est_specs.resolve();
      std::vector<NamedCurve> curves;
      for (const auto& spec : specs) {
        const std::uint64_t seed = spec_is_stochastic(spec) ? require_seed(g, "estimate " + spec.name()) : 0;
        Rng rng(spec_seed(seed, spec));
        curves.push_back({spec.name(), -1, estimate(panel, spec, est_pool, rng).curve});
      }
      emit(g, "curves.csv", curves_to_csv(curves));
    } else if (imp->parsed()) {
      const std::uint64_t seed = require_seed(g, "impute");
      const PerformancePanel panel = panel_from_csv(read_text_file(imp_panel));
      const EstimatorSpec spec = imp_spec.resolve().front();
      Rng rng(spec_seed(seed, spec));
      const ImputationResult r = impute_panel(panel, spec, imputation_config_for(spec, imp_pool), rng);
      emit(g, "completed.csv", panel_to_csv(r.completed));
      emit(g, "trace.csv", trace_csv(panel, r.trace));
    } else if (eval->parsed()) {
      const auto curves = curves_from_csv(read_text_file(eval_curves));
      const AgeCurve truth = truth_curve_from_csv(read_text_file(eval_truth));
      std::vector<std::string> order;
      std::map<std::string, std::vector<AgeCurve>> by_spec;
      for (const auto& nc : curves) {
        if (!by_spec.contains(nc.spec)) order.push_back(nc.spec);
        by_spec[nc.spec].push_back(nc.curve);
      }
      std::string csv = "spec,age,rmse\n";
      nlohmann::ordered_json summary_json = nlohmann::ordered_json::object();
      for (const auto& name : order) {
        const auto& group = by_spec[name];
        const auto rmse = rmse_by_age(group, truth);
        for (std::size_t k = 0; k < rmse.size(); ++k) {
          csv += join_csv({name, std::to_string(truth.grid.age_at(k)), format_double(rmse[k])}) + "\n";
        }
        std::vector<double> sbd;
        for (const auto& c : group) sbd.push_back(shape_based_distance(c, truth));
        summary_json[name] = {{"curves", group.size()},
                              {"mean_rmse", mean_of(rmse)},
                              {"median_sbd", median_of(sbd)},
                              {"sbd", sbd}};
      }
      emit(g, "evaluation.csv", csv);
      emit(g, "evaluation.json", summary_json.dump(2) + "\n");
    } else if (sweep->parsed()) {
      if (g.config.empty()) throw UsageError("sweep needs --config");
      const SweepConfig cfg = load_sweep_config(g.config);
      std::uint64_t seed = cfg.seed;
      if (g.seed) {
        seed = *g.seed;
      } else if (!cfg.has_seed) {
        throw UsageError("sweep needs --seed or sweep.seed in the config");
      }
      const int reps = sweep_reps.value_or(cfg.replications);
      const EvaluationReport report = run_factorial(cfg.base, cfg.sweep, cfg.specs, reps, seed, cfg.sbd_z_normalize);
      emit(g, "report_rmse.csv", report_rmse_csv(report));
      emit(g, "report_sbd.csv", report_sbd_csv(report));
      emit(g, "report_appendix.csv", report_appendix_csv(report));
      emit(g, "report_summary.json", report_summary_json(report));
    } else if (boot->parsed()) {
      const std::uint64_t seed = require_seed(g, "bootstrap");
      const PerformancePanel panel = panel_from_csv(read_text_file(boot_panel));
      std::vector<NamedCurve> curves;
      std::string failed = "spec,draw\n";
      for (const auto& spec : boot_specs.resolve()) {
        BootstrapOptions opts;
        opts.pool_size = boot_pool;
        const BootstrapResult r = bootstrap_curves(panel, spec, boot_draws, spec_seed(seed, spec), opts);
        std::size_t next = 0;
        for (int b = 0; b < boot_draws; ++b) {
          if (std::find(r.failed_draws.begin(), r.failed_draws.end(), b) != r.failed_draws.end()) {
            failed += spec.name() + "," + std::to_string(b) + "\n";
          } else {
            curves.push_back({spec.name(), b, r.curves[next++]});
          }
        }
        if (!r.failed_draws.empty()) {
          std::cerr << spec.name() << ": " << r.failed_draws.size() << " bootstrap draws failed\n";
        }
      }
      emit(g, "bootstrap.csv", curves_to_csv(curves));
      emit(g, "bootstrap_failed.csv", failed);
    } else if (summary->parsed()) {
      PerformancePanel panel;
      if (!sum_panel.empty()) {
        panel = panel_from_csv(read_text_file(sum_panel));
      } else if (!sum_records.empty()) {
        const LoadedRecords loaded = load_records(sum_records);
        if (loaded.skipped_zero_games > 0) {
          std::cerr << "skipped " << loaded.skipped_zero_games << " records with zero games played\n";
        }
        const PanelFilters filters = parse_filters(sum_positions, sum_min_birth, sum_first, sum_last, sum_cutoff);
        panel = build_panel(loaded.records, AgeGrid(sum_tmin, sum_tmax), filters);
        emit(g, "panel.csv", panel_to_csv(panel));
      } else {
        throw UsageError("summary needs --panel or --records");
      }
      emit(g, "observed_fraction.csv", fraction_csv(panel));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_numerical() ? kExitNumerical : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
