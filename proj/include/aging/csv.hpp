#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aging/evaluation.hpp"
#include "aging/panel.hpp"
#include "aging/simulation.hpp"

namespace aging {

std::vector<std::string> split_csv_line(const std::string& line);
std::string join_csv(const std::vector<std::string>& fields);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(const std::string& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Long panel format: player_id,age,value,observed with value NA where the
/// cell is unobserved. Every cell is written, so the grid is recoverable.
std::string panel_to_csv(const PerformancePanel& panel);
PerformancePanel panel_from_csv(const std::string& text);

struct NamedCurve {
  std::string spec;
  int draw = -1;  // bootstrap draw index, -1 when not a bundle
  AgeCurve curve;
};

/// spec,[draw,]age,g_hat,support_count
std::string curves_to_csv(const std::vector<NamedCurve>& curves);
std::vector<NamedCurve> curves_from_csv(const std::string& text);

/// age,g
std::string truth_curve_to_csv(const AgeCurve& truth);
AgeCurve truth_curve_from_csv(const std::string& text);
std::string player_truth_to_csv(const PerformancePanel& panel, const TruthBundle& truth);

std::string mask_diagnostics_to_csv(const AgeGrid& grid, const MaskDiagnostics& diagnostics);

/// cell,n_players,omega,sigma_gamma,spec,age,rmse
std::string report_rmse_csv(const EvaluationReport& report);
/// cell,spec,replication,sbd
std::string report_sbd_csv(const EvaluationReport& report);
/// RMSE averaged over cells sharing a player count: n_players,spec,<one column per age>
std::string report_appendix_csv(const EvaluationReport& report);
/// Per cell and spec: age-averaged RMSE, median SBD, failures; plus the same
/// pooled over cells.
std::string report_summary_json(const EvaluationReport& report);

}  // namespace aging
