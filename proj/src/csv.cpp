#include "aging/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "aging/error.hpp"

namespace aging {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") != std::string::npos) {
      out.push_back('"');
      for (char c : f) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
      }
      out.push_back('"');
    } else {
      out += f;
    }
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  if (s == "NA") return std::nan("");
  if (s == "Inf") return kInf;
  if (s == "-Inf") return -kInf;
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorCode::Parse, "not a number: '" + s + "'");
  return v;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Parse, "cannot write " + path);
  out << text;
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCode::Parse, "missing column '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& h : header) {
      if (h == name) return true;
    }
    return false;
  }
};

Table parse_table(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(t.header.size()) + " fields");
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(line_no);
  }
  if (t.header.empty()) throw Error(ErrorCode::Parse, "empty CSV input");
  return t;
}

int parse_age(const std::string& s, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": bad age '" + s + "'");
  }
  return v;
}

}  // namespace

std::string panel_to_csv(const PerformancePanel& panel) {
  std::string out = "player_id,age,value,observed\n";
  for (std::size_t i = 0; i < panel.n_players(); ++i) {
    for (std::size_t k = 0; k < panel.n_ages(); ++k) {
      const auto v = panel.observed(i, k);
      out += join_csv({panel.player_ids()[i], std::to_string(panel.grid().age_at(k)), v ? format_double(*v) : "NA",
                       v ? "1" : "0"});
      out.push_back('\n');
    }
  }
  return out;
}

PerformancePanel panel_from_csv(const std::string& text) {
  const Table t = parse_table(text);
  const auto c_id = t.column("player_id"), c_age = t.column("age"), c_val = t.column("value"),
             c_obs = t.column("observed");
  if (t.rows.empty()) throw Error(ErrorCode::Parse, "panel file has no rows");
  int lo = INT32_MAX, hi = INT32_MIN;
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const int age = parse_age(t.rows[r][c_age], t.lines[r]);
    lo = std::min(lo, age);
    hi = std::max(hi, age);
    if (row_of.emplace(t.rows[r][c_id], ids.size()).second) ids.push_back(t.rows[r][c_id]);
  }
  const AgeGrid grid(lo, hi);
  const std::size_t ages = grid.size();
  std::vector<double> values(ids.size() * ages, 0.0);
  std::vector<std::uint8_t> mask(ids.size() * ages, 0);
  std::vector<std::uint8_t> seen(ids.size() * ages, 0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t at = row_of[row[c_id]] * ages + grid.index_of(parse_age(row[c_age], t.lines[r]));
    if (seen[at]) throw Error(ErrorCode::DuplicateRecord, "line " + std::to_string(t.lines[r]) + ": repeated cell");
    seen[at] = 1;
    if (row[c_obs] == "1") {
      values[at] = parse_double(row[c_val]);
      mask[at] = 1;
    } else if (row[c_obs] != "0") {
      throw Error(ErrorCode::Parse, "line " + std::to_string(t.lines[r]) + ": observed must be 0 or 1");
    }
  }
  return PerformancePanel(grid, std::move(ids), std::move(values), std::move(mask));
}

std::string curves_to_csv(const std::vector<NamedCurve>& curves) {
  bool bundle = false;
  for (const auto& c : curves) bundle = bundle || c.draw >= 0;
  std::string out = bundle ? "spec,draw,age,g_hat,support_count\n" : "spec,age,g_hat,support_count\n";
  for (const auto& nc : curves) {
    for (std::size_t k = 0; k < nc.curve.g.size(); ++k) {
      std::vector<std::string> f{nc.spec};
      if (bundle) f.push_back(std::to_string(nc.draw));
      f.push_back(std::to_string(nc.curve.grid.age_at(k)));
      f.push_back(format_double(nc.curve.g[k]));
      f.push_back(nc.curve.support_counts ? std::to_string((*nc.curve.support_counts)[k]) : "NA");
      out += join_csv(f);
      out.push_back('\n');
    }
  }
  return out;
}

std::vector<NamedCurve> curves_from_csv(const std::string& text) {
  const Table t = parse_table(text);
  const auto c_spec = t.column("spec"), c_age = t.column("age"), c_g = t.column("g_hat");
  const bool has_draw = t.has("draw");
  const bool has_support = t.has("support_count");

  struct Group {
    std::string spec;
    int draw;
    std::map<int, std::pair<double, std::optional<int>>> points;
  };
  std::vector<Group> groups;
  std::map<std::pair<std::string, int>, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const int draw = has_draw ? parse_age(row[t.column("draw")], t.lines[r]) : -1;
    auto [it, inserted] = index.emplace(std::make_pair(row[c_spec], draw), groups.size());
    if (inserted) groups.push_back({row[c_spec], draw, {}});
    std::optional<int> support;
    if (has_support && row[t.column("support_count")] != "NA") {
      support = parse_age(row[t.column("support_count")], t.lines[r]);
    }
    groups[it->second].points[parse_age(row[c_age], t.lines[r])] = {parse_double(row[c_g]), support};
  }

  std::vector<NamedCurve> out;
  for (auto& g : groups) {
    const int lo = g.points.begin()->first;
    const int hi = g.points.rbegin()->first;
    if (static_cast<std::size_t>(hi - lo + 1) != g.points.size()) {
      throw Error(ErrorCode::Parse, "curve '" + g.spec + "' does not cover a contiguous age range");
    }
    std::vector<double> values;
    std::vector<int> support;
    bool all_support = true;
    for (const auto& [age, p] : g.points) {
      values.push_back(p.first);
      all_support = all_support && p.second.has_value();
      support.push_back(p.second.value_or(0));
    }
    std::optional<std::vector<int>> sc;
    if (all_support) sc = std::move(support);
    out.push_back({g.spec, g.draw, AgeCurve(AgeGrid(lo, hi), std::move(values), std::move(sc))});
  }
  return out;
}

std::string truth_curve_to_csv(const AgeCurve& truth) {
  std::string out = "age,g\n";
  for (std::size_t k = 0; k < truth.g.size(); ++k) {
    out += std::to_string(truth.grid.age_at(k)) + "," + format_double(truth.g[k]) + "\n";
  }
  return out;
}

AgeCurve truth_curve_from_csv(const std::string& text) {
  const Table t = parse_table(text);
  const auto c_age = t.column("age"), c_g = t.column("g");
  std::map<int, double> points;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    points[parse_age(t.rows[r][c_age], t.lines[r])] = parse_double(t.rows[r][c_g]);
  }
  if (points.empty()) throw Error(ErrorCode::Parse, "truth file has no rows");
  const int lo = points.begin()->first, hi = points.rbegin()->first;
  if (static_cast<std::size_t>(hi - lo + 1) != points.size()) {
    throw Error(ErrorCode::Parse, "truth curve does not cover a contiguous age range");
  }
  std::vector<double> g;
  for (const auto& [age, v] : points) g.push_back(v);
  return AgeCurve(AgeGrid(lo, hi), std::move(g));
}

std::string player_truth_to_csv(const PerformancePanel& panel, const TruthBundle& truth) {
  std::string out = "player_id,intercept,quadratic\n";
  for (std::size_t i = 0; i < panel.n_players(); ++i) {
    out += join_csv({panel.player_ids()[i], format_double(truth.player_intercepts[i]),
                     format_double(truth.player_quads[i])});
    out.push_back('\n');
  }
  return out;
}

std::string mask_diagnostics_to_csv(const AgeGrid& grid, const MaskDiagnostics& diagnostics) {
  std::string out = "age,target_count\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out += std::to_string(grid.age_at(k)) + "," + std::to_string(diagnostics.target_counts[k]) + "\n";
  }
  return out;
}

std::string report_rmse_csv(const EvaluationReport& report) {
  std::string out = "cell,n_players,omega,sigma_gamma,spec,age,rmse\n";
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    const auto& cell = report.cells[c];
    for (const auto& o : cell.outcomes) {
      for (std::size_t k = 0; k < o.rmse_by_age.size(); ++k) {
        out += join_csv({std::to_string(c), std::to_string(cell.cell.n_players), format_double(cell.cell.omega),
                         format_double(cell.cell.sigma_gamma), o.spec, std::to_string(report.grid.age_at(k)),
                         format_double(o.rmse_by_age[k])});
        out.push_back('\n');
      }
    }
  }
  return out;
}

std::string report_sbd_csv(const EvaluationReport& report) {
  std::string out = "cell,spec,replication,sbd\n";
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    for (const auto& o : report.cells[c].outcomes) {
      for (std::size_t r = 0; r < o.sbd_values.size(); ++r) {
        out += join_csv({std::to_string(c), o.spec, std::to_string(r), format_double(o.sbd_values[r])});
        out.push_back('\n');
      }
    }
  }
  return out;
}

std::string report_appendix_csv(const EvaluationReport& report) {
  std::string out = "n_players,spec";
  for (int age : report.grid.ages()) out += "," + std::to_string(age);
  out.push_back('\n');

  std::vector<std::size_t> counts;
  for (const auto& cell : report.cells) {
    if (std::find(counts.begin(), counts.end(), cell.cell.n_players) == counts.end()) {
      counts.push_back(cell.cell.n_players);
    }
  }
  if (report.cells.empty()) return out;
  const std::size_t n_specs = report.cells.front().outcomes.size();
  for (std::size_t n : counts) {
    for (std::size_t s = 0; s < n_specs; ++s) {
      std::vector<double> avg(report.grid.size(), 0.0);
      int used = 0;
      for (const auto& cell : report.cells) {
        if (cell.cell.n_players != n) continue;
        for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += cell.outcomes[s].rmse_by_age[k];
        ++used;
      }
      out += std::to_string(n) + "," + report.cells.front().outcomes[s].spec;
      for (double v : avg) out += "," + format_double(v / used);
      out.push_back('\n');
    }
  }
  return out;
}

std::string report_summary_json(const EvaluationReport& report) {
  using nlohmann::ordered_json;
  ordered_json root;
  root["replications"] = report.replications;
  root["ages"] = report.grid.ages();
  ordered_json cells = ordered_json::array();
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> pooled;
  std::map<std::string, int> pooled_failures;
  std::vector<std::string> order;
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    const auto& cell = report.cells[c];
    ordered_json jc;
    jc["cell"] = c;
    jc["n_players"] = cell.cell.n_players;
    jc["omega"] = cell.cell.omega;
    jc["sigma_gamma"] = cell.cell.sigma_gamma;
    ordered_json specs = ordered_json::object();
    for (const auto& o : cell.outcomes) {
      const double mean_rmse = mean_of(o.rmse_by_age);
      const double med_sbd = median_of(o.sbd_values);
      specs[o.spec] = {{"mean_rmse", std::isfinite(mean_rmse) ? ordered_json(mean_rmse) : ordered_json(nullptr)},
                       {"median_sbd", std::isfinite(med_sbd) ? ordered_json(med_sbd) : ordered_json(nullptr)},
                       {"failures", o.failure_count}};
      if (!pooled.contains(o.spec)) order.push_back(o.spec);
      auto& [rm, sb] = pooled[o.spec];
      if (std::isfinite(mean_rmse)) rm.push_back(mean_rmse);
      sb.insert(sb.end(), o.sbd_values.begin(), o.sbd_values.end());
      pooled_failures[o.spec] += o.failure_count;
    }
    jc["specs"] = std::move(specs);
    cells.push_back(std::move(jc));
  }
  root["cells"] = std::move(cells);
  ordered_json overall = ordered_json::object();
  for (const auto& spec : order) {
    const auto& [rm, sb] = pooled[spec];
    overall[spec] = {{"mean_rmse", rm.empty() ? ordered_json(nullptr) : ordered_json(mean_of(rm))},
                     {"median_sbd", sb.empty() ? ordered_json(nullptr) : ordered_json(median_of(sb))},
                     {"failures", pooled_failures[spec]}};
  }
  root["overall"] = std::move(overall);
  return root.dump(2) + "\n";
}

}  // namespace aging
