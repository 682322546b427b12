#include "aging/config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "aging/csv.hpp"
#include "aging/error.hpp"

namespace aging {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::Parse, "config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

int bracket_depth(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (quoted) continue;
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
  }
  return depth;
}

TomlValue::Scalar parse_scalar(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  if (s.empty()) fail(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        const char n = s[++i];
        out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
      } else {
        out.push_back(s[i]);
      }
    }
    return out;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  std::string digits;
  for (char c : s) {
    if (c != '_') digits.push_back(c);
  }
  if (!digits.empty() && digits.front() == '+') digits.erase(0, 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) fail(line, "cannot parse value '" + s + "'");
  return v;
}

TomlValue parse_value(const std::string& raw, std::size_t line) {
  TomlValue v;
  const std::string s = trim(raw);
  if (s.empty() || s.front() != '[') {
    v.items.push_back(parse_scalar(s, line));
    return v;
  }
  if (s.back() != ']') fail(line, "unterminated array");
  v.is_array = true;
  const std::string body = s.substr(1, s.size() - 2);
  std::string item;
  bool quoted = false;
  auto flush = [&] {
    if (!trim(item).empty()) v.items.push_back(parse_scalar(item, line));
    item.clear();
  };
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '"' && (i == 0 || body[i - 1] != '\\')) quoted = !quoted;
    if (c == '[' && !quoted) fail(line, "nested arrays are not supported");
    if (c == ',' && !quoted) {
      flush();
    } else {
      item.push_back(c);
    }
  }
  flush();
  return v;
}

}  // namespace

double TomlValue::as_number(const std::string& key) const {
  if (is_array || items.size() != 1 || !std::holds_alternative<double>(items[0])) {
    throw Error(ErrorCode::Parse, "config key '" + key + "' must be a number");
  }
  return std::get<double>(items[0]);
}

std::int64_t TomlValue::as_integer(const std::string& key) const {
  const double v = as_number(key);
  if (v != std::trunc(v) || std::abs(v) > 9.0e15) {
    throw Error(ErrorCode::Parse, "config key '" + key + "' must be an integer");
  }
  return static_cast<std::int64_t>(v);
}

std::string TomlValue::as_string(const std::string& key) const {
  if (is_array || items.size() != 1 || !std::holds_alternative<std::string>(items[0])) {
    throw Error(ErrorCode::Parse, "config key '" + key + "' must be a string");
  }
  return std::get<std::string>(items[0]);
}

std::vector<double> TomlValue::as_numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : items) {
    if (!std::holds_alternative<double>(item)) {
      throw Error(ErrorCode::Parse, "config key '" + key + "' must hold numbers");
    }
    out.push_back(std::get<double>(item));
  }
  return out;
}

std::vector<std::string> TomlValue::as_strings(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& item : items) {
    if (!std::holds_alternative<std::string>(item)) {
      throw Error(ErrorCode::Parse, "config key '" + key + "' must hold strings");
    }
    out.push_back(std::get<std::string>(item));
  }
  return out;
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) fail(line_no, "bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(line_no, "empty key");
    std::string value = trim(line.substr(eq + 1));
    const std::size_t start = line_no;
    while (bracket_depth(value) > 0) {
      if (!std::getline(in, raw)) fail(start, "unterminated array");
      ++line_no;
      value += " " + trim(strip_comment(raw));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.contains(full)) fail(start, "duplicate key '" + full + "'");
    table.emplace(full, parse_value(value, start));
  }
  return table;
}

SweepConfig sweep_config_from_toml(const std::string& text) {
  const TomlTable t = parse_toml(text);
  SweepConfig cfg;
  SimulationConfig& b = cfg.base;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const TomlValue* {
    const auto it = t.find(key);
    if (it == t.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  int t_min = b.grid.t_min(), t_max = b.grid.t_max();
  if (const auto* v = get("grid.t_min")) t_min = static_cast<int>(v->as_integer("grid.t_min"));
  if (const auto* v = get("grid.t_max")) t_max = static_cast<int>(v->as_integer("grid.t_max"));
  b.grid = AgeGrid(t_min, t_max);

  if (const auto* v = get("curve.omega")) b.omega = v->as_number("curve.omega");
  if (const auto* v = get("curve.a")) b.a = v->as_number("curve.a");
  if (const auto* v = get("curve.b")) b.b = v->as_number("curve.b");
  if (const auto* v = get("curve.c")) b.c = v->as_number("curve.c");
  if (const auto* v = get("curve.t_peak")) b.t_peak = static_cast<int>(v->as_integer("curve.t_peak"));

  if (const auto* v = get("players.n_players")) {
    const auto n = v->as_integer("players.n_players");
    if (n < 1) throw Error(ErrorCode::Parse, "config key 'players.n_players' must be positive");
    b.n_players = static_cast<std::size_t>(n);
  }
  if (const auto* v = get("players.sigma_gamma")) b.sigma_gamma = v->as_number("players.sigma_gamma");
  if (const auto* v = get("players.sigma_b")) b.sigma_b = v->as_number("players.sigma_b");
  if (const auto* v = get("players.sigma_eps")) b.sigma_eps = v->as_number("players.sigma_eps");

  if (const auto* v = get("missingness.pi")) b.pi_schedule = v->as_numbers("missingness.pi");

  if (const auto* v = get("sweep.n_players")) {
    cfg.sweep.n_players.clear();
    for (double n : v->as_numbers("sweep.n_players")) {
      if (n < 1 || n != std::trunc(n)) throw Error(ErrorCode::Parse, "sweep.n_players entries must be positive integers");
      cfg.sweep.n_players.push_back(static_cast<std::size_t>(n));
    }
  }
  if (const auto* v = get("sweep.omega")) cfg.sweep.omega = v->as_numbers("sweep.omega");
  if (const auto* v = get("sweep.sigma_gamma")) cfg.sweep.sigma_gamma = v->as_numbers("sweep.sigma_gamma");
  if (const auto* v = get("sweep.replications")) {
    cfg.replications = static_cast<int>(v->as_integer("sweep.replications"));
  }
  if (const auto* v = get("sweep.seed")) {
    const auto s = v->as_integer("sweep.seed");
    if (s < 0) throw Error(ErrorCode::Parse, "config key 'sweep.seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.has_seed = true;
  }
  b.replications = cfg.replications;

  int df = 6;
  double q = 0.75;
  if (const auto* v = get("estimation.spline_df")) df = static_cast<int>(v->as_integer("estimation.spline_df"));
  if (const auto* v = get("estimation.boundary_quantile")) q = v->as_number("estimation.boundary_quantile");
  if (const auto* v = get("estimation.specs")) {
    cfg.specs.clear();
    for (const auto& name : v->as_strings("estimation.specs")) cfg.specs.push_back(EstimatorSpec::parse(name));
  }
  for (auto& s : cfg.specs) {
    s.spline_df = df;
    s.boundary_quantile = q;
  }

  if (const auto* v = get("evaluation.sbd_z_normalize")) {
    if (v->is_array || v->items.size() != 1 || !std::holds_alternative<bool>(v->items[0])) {
      throw Error(ErrorCode::Parse, "config key 'evaluation.sbd_z_normalize' must be true or false");
    }
    cfg.sbd_z_normalize = std::get<bool>(v->items[0]);
  }

  for (const auto& [key, value] : t) {
    if (!used.contains(key)) throw Error(ErrorCode::Parse, "unknown config key '" + key + "'");
  }
  b.validate();
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) { return sweep_config_from_toml(read_text_file(path)); }

}  // namespace aging
