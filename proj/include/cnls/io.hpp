#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cnls/field.hpp"
#include "cnls/integrator.hpp"
#include "cnls/solitons.hpp"

namespace cnls {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline double parse_double_strict(std::string_view s, const std::string& what) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("invalid numeric value for " + what + ": '" + std::string(s) + "'");
  return out;
}

inline int parse_int_strict(std::string_view s, const std::string& what) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("invalid integer value for " + what + ": '" + std::string(s) + "'");
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(s.substr(pos));
      break;
    }
    parts.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

}  // namespace detail

/// The complete key set accepted by configuration files. Anything else is a
/// hard error so that typos cannot silently fall back to defaults.
inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "experiment", "L0",        "L1",          "J",           "t0",
      "l",          "n_steps",   "mu1",         "mu2",         "mu3",
      "kappa",      "sigma1",    "sigma2",      "lambda",      "p",
      "a",          "c",         "phi_u",       "phi_v",       "mode",
      "right_factor", "weight_rule", "forcing", "bootstrap",   "fp_tol",
      "fp_max",     "blowup_factor", "snapshot_every", "regime", "ladder_J",
      "ladder_l",   "l_ref",     "l_over_h",    "l_over_h2",   "t_eval",
      "t_final",    "margin",    "oracle_points", "oracle_lo", "oracle_hi",
      "fd_step"};
  return keys;
}

/// Flat `key = value` file. Full-line comments start with '#', blank lines
/// are skipped, duplicate or unknown keys are errors.
class Config {
 public:
  static Config parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view sv = detail::trim(line);
      if (sv.empty() || sv.front() == '#') continue;
      size_t eq = sv.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                          std::string(sv) + "'");
      std::string key(detail::trim(sv.substr(0, eq)));
      std::string value(detail::trim(sv.substr(eq + 1)));
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      if (!known_config_keys().count(key))
        throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      if (cfg.values_.count(key))
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : detail::parse_double_strict(it->second, key);
  }

  int get_int(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : detail::parse_int_strict(it->second, key);
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    for (auto part : detail::split(it->second, ','))
      out.push_back(detail::parse_int_strict(detail::trim(part), key));
    return out;
  }

  std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (auto part : detail::split(it->second, ','))
      out.push_back(detail::parse_double_strict(detail::trim(part), key));
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

// --------------------------------------------------------------------------
// Enum <-> string maps shared by config files and the CLI
// --------------------------------------------------------------------------

inline std::string kind_name(ExperimentKind k) {
  return k == ExperimentKind::counter_propagating ? "counter_propagating" : "axis_aligned";
}

inline ExperimentKind parse_kind(const std::string& s) {
  if (s == "counter_propagating") return ExperimentKind::counter_propagating;
  if (s == "axis_aligned") return ExperimentKind::axis_aligned;
  throw ConfigError("unknown experiment '" + s + "'");
}

inline NonlinearMode parse_mode(const std::string& s) {
  if (s == "split") return NonlinearMode::split;
  if (s == "diagonal") return NonlinearMode::diagonal;
  throw ConfigError("unknown mode '" + s + "'");
}

inline RightFactor parse_right_factor(const std::string& s) {
  if (s == "same") return RightFactor::same;
  if (s == "transposed") return RightFactor::transposed;
  throw ConfigError("unknown right_factor '" + s + "'");
}

inline WeightRule parse_weight_rule(const std::string& s) {
  if (s == "time_scaled") return WeightRule::time_scaled;
  if (s == "unit") return WeightRule::unit;
  throw ConfigError("unknown weight_rule '" + s + "'");
}

inline BootstrapMode parse_bootstrap(const std::string& s) {
  if (s == "exact") return BootstrapMode::exact_samples;
  if (s == "taylor") return BootstrapMode::taylor_from_velocity;
  throw ConfigError("unknown bootstrap '" + s + "'");
}

// --------------------------------------------------------------------------
// Results tables
// --------------------------------------------------------------------------

inline constexpr std::string_view kResultsHeader =
    "experiment,J,h,l,mu1,mu2,mu3,kappa,Er,RelEr,observed_order";

struct ResultRow {
  std::string experiment;
  int J = 0;
  double h = 0.0;
  double l = 0.0;
  double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;
  int kappa = 2;
  double er = 0.0;
  double rel_er = 0.0;
  std::optional<double> observed_order;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

inline std::string emit_results(std::vector<ResultRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.h > b.h; });
  std::string out{kResultsHeader};
  out += '\n';
  for (const ResultRow& r : rows) {
    out += r.experiment;
    out += ',';
    out += std::to_string(r.J);
    out += ',';
    out += format_double(r.h);
    out += ',';
    out += format_double(r.l);
    out += ',';
    out += format_double(r.mu1);
    out += ',';
    out += format_double(r.mu2);
    out += ',';
    out += format_double(r.mu3);
    out += ',';
    out += std::to_string(r.kappa);
    out += ',';
    out += format_double(r.er);
    out += ',';
    out += format_double(r.rel_er);
    out += ',';
    if (r.observed_order) out += format_double(*r.observed_order);
    out += '\n';
  }
  return out;
}

inline std::vector<ResultRow> parse_results(const std::string& text) {
  auto lines = detail::split(text, '\n');
  if (lines.empty() || detail::trim(lines[0]) != kResultsHeader)
    throw std::runtime_error("parse_results: bad header");
  std::vector<ResultRow> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (detail::trim(line).empty()) continue;
    auto f = detail::split(line, ',');
    if (f.size() != 11) throw std::runtime_error("parse_results: wrong column count");
    ResultRow r;
    r.experiment = std::string(f[0]);
    r.J = detail::parse_int_strict(f[1], "J");
    r.h = detail::parse_double_strict(f[2], "h");
    r.l = detail::parse_double_strict(f[3], "l");
    r.mu1 = detail::parse_double_strict(f[4], "mu1");
    r.mu2 = detail::parse_double_strict(f[5], "mu2");
    r.mu3 = detail::parse_double_strict(f[6], "mu3");
    r.kappa = detail::parse_int_strict(f[7], "kappa");
    r.er = detail::parse_double_strict(f[8], "Er");
    r.rel_er = detail::parse_double_strict(f[9], "RelEr");
    if (!f[10].empty()) r.observed_order = detail::parse_double_strict(f[10], "observed_order");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary keeps LF line endings as written
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// --------------------------------------------------------------------------
// Step logs and field snapshots
// --------------------------------------------------------------------------

struct StepRecord {
  int n = 0;
  double t = 0.0;
  double norm_u = 0.0;
  double norm_v = 0.0;
  std::optional<double> err_u;
  std::optional<double> err_v;
};

inline std::string emit_steps(const std::vector<StepRecord>& steps) {
  std::string out = "n,t,norm_u,norm_v,err_u,err_v\n";
  for (const StepRecord& s : steps) {
    out += std::to_string(s.n);
    out += ',';
    out += format_double(s.t);
    out += ',';
    out += format_double(s.norm_u);
    out += ',';
    out += format_double(s.norm_v);
    out += ',';
    if (s.err_u) out += format_double(*s.err_u);
    out += ',';
    if (s.err_v) out += format_double(*s.err_v);
    out += '\n';
  }
  return out;
}

/// Grid of comma-separated values, one file row per grid row x_j.
inline std::string emit_real_grid(const RealField& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_snapshot(const std::filesystem::path& dir, const Snapshot& snap) {
  char tag[16];
  std::snprintf(tag, sizeof(tag), "%06d", snap.n);
  const std::string base = "snap_" + std::string(tag);
  write_text_file(dir / (base + "_u_re.csv"), emit_real_grid(snap.fields.u.real()));
  write_text_file(dir / (base + "_u_im.csv"), emit_real_grid(snap.fields.u.imag()));
  write_text_file(dir / (base + "_v_re.csv"), emit_real_grid(snap.fields.v.real()));
  write_text_file(dir / (base + "_v_im.csv"), emit_real_grid(snap.fields.v.imag()));
}

}  // namespace cnls
