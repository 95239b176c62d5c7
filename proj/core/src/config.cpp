#include "cprgg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace cprgg {

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::rgg_tau, "rgg-tau"},
    {ExperimentKind::clique_scaling, "clique-scaling"},
    {ExperimentKind::exp1_test, "exp1-test"},
    {ExperimentKind::percolation_sweep, "percolation-sweep"},
    {ExperimentKind::embedding, "embedding"},
    {ExperimentKind::d1_regimes, "d1-regimes"},
    {ExperimentKind::oracle_battery, "oracle-battery"},
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (auto [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view text) {
  for (auto [k, name] : kKinds) {
    if (name == text) return k;
  }
  return std::nullopt;
}

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& field,
                         const std::string& problem)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + field + ": " + problem),
      line_(line),
      field_(field) {}

void ExperimentConfig::validate(const std::string& source) const {
  auto fail = [&](const char* field, const std::string& why) { throw ConfigError(source, 0, field, why); };
  if (workers == 0) fail("experiment.workers", "must be at least 1");
  if (n.empty() || std::any_of(n.begin(), n.end(), [](double v) { return !(v > 0.0); })) fail("geometry.n", "must be positive");
  if (radius.empty() || std::any_of(radius.begin(), radius.end(), [](double v) { return !(v > 0.0); })) {
    fail("geometry.R", "must be positive");
  }
  if (dim == 0) fail("geometry.d", "must be at least 1");
  if (lambda.empty() || std::any_of(lambda.begin(), lambda.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); })) {
    fail("contact.lambda", "must be finite and >= 0");
  }
  if (t_cap && !(*t_cap > 0.0)) fail("contact.t_cap", "must be positive");
  if (replicas == 0) fail("contact.replicas", "must be at least 1");
  if (m.empty() || std::find(m.begin(), m.end(), std::size_t{0}) != m.end()) fail("contact.m", "must be at least 1");
  if (max_vertices < 2 || max_vertices > 12) fail("contact.max_vertices", "must lie in [2, 12]");
  if (!(q >= 0.0 && q <= 1.0)) fail("percolation.q", "must lie in [0, 1]");
  if (p.empty() || std::any_of(p.begin(), p.end(), [](double v) { return !(v >= 0.0 && v <= 1.0); })) {
    fail("percolation.p", "must lie in [0, 1]");
  }
  if (dims.empty() || std::find(dims.begin(), dims.end(), std::size_t{0}) != dims.end()) {
    fail("percolation.dims", "must be positive");
  }
  if (length.empty()) fail("percolation.l", "needs at least one value");
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::size_t lineno = 0;
  std::string section;
  std::set<std::string> seen;

  auto number = [&](const std::string& field, const std::string& text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw ConfigError(source, lineno, field, "expected a number, got '" + text + "'");
    }
    return v;
  };
  auto count = [&](const std::string& field, const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw ConfigError(source, lineno, field, "expected a non-negative integer, got '" + text + "'");
    }
    return v;
  };
  auto numbers = [&](const std::string& field, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(number(field, item));
    if (out.empty()) throw ConfigError(source, lineno, field, "empty list");
    return out;
  };
  auto counts = [&](const std::string& field, const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) out.push_back(count(field, item));
    if (out.empty()) throw ConfigError(source, lineno, field, "empty list");
    return out;
  };

  using Setter = std::function<void(const std::string& field, const std::string& value)>;
  const std::map<std::string, Setter> setters = {
      {"experiment.kind",
       [&](auto& f, auto& v) {
         auto k = parse_kind(v);
         if (!k) throw ConfigError(source, lineno, f, "unknown experiment kind '" + v + "'");
         cfg.kind = *k;
       }},
      {"experiment.seed", [&](auto& f, auto& v) { cfg.seed = count(f, v); }},
      {"experiment.workers", [&](auto& f, auto& v) { cfg.workers = count(f, v); }},
      {"experiment.log_level", [&](auto&, auto& v) { cfg.log_level = v; }},
      {"geometry.n", [&](auto& f, auto& v) { cfg.n = numbers(f, v); }},
      {"geometry.R", [&](auto& f, auto& v) { cfg.radius = numbers(f, v); }},
      {"geometry.d", [&](auto& f, auto& v) { cfg.dim = count(f, v); }},
      {"geometry.intensity", [&](auto&, auto& v) { cfg.intensity = v; }},
      {"contact.lambda", [&](auto& f, auto& v) { cfg.lambda = numbers(f, v); }},
      {"contact.t_cap",
       [&](auto& f, auto& v) {
         if (v == "none") {
           cfg.t_cap.reset();
         } else {
           cfg.t_cap = number(f, v);
         }
       }},
      {"contact.replicas", [&](auto& f, auto& v) { cfg.replicas = count(f, v); }},
      {"contact.m", [&](auto& f, auto& v) { cfg.m = counts(f, v); }},
      {"contact.graph", [&](auto&, auto& v) { cfg.graph = v; }},
      {"contact.graphs", [&](auto& f, auto& v) { cfg.graphs = count(f, v); }},
      {"contact.max_vertices", [&](auto& f, auto& v) { cfg.max_vertices = count(f, v); }},
      {"percolation.l", [&](auto& f, auto& v) { cfg.length = counts(f, v); }},
      {"percolation.q", [&](auto& f, auto& v) { cfg.q = number(f, v); }},
      {"percolation.p", [&](auto& f, auto& v) { cfg.p = numbers(f, v); }},
      {"percolation.dims", [&](auto& f, auto& v) { cfg.dims = counts(f, v); }},
  };
  const std::set<std::string> sections = {"experiment", "geometry", "contact", "percolation"};

  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, lineno, line, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) throw ConfigError(source, lineno, section, "unknown section");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, line, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(source, lineno, key, "key outside any section");
    const std::string field = section + "." + key;
    auto it = setters.find(field);
    if (it == setters.end()) throw ConfigError(source, lineno, field, "unknown key");
    if (!seen.insert(field).second) throw ConfigError(source, lineno, field, "repeated key");
    if (value.empty()) throw ConfigError(source, lineno, field, "missing value");
    it->second(field, value);
  }
  cfg.validate(source);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "file", "cannot open");
  return parse_config(in, path);
}

std::string write_config(const ExperimentConfig& cfg) {
  auto join_d = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
  };
  auto join_u = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  std::ostringstream out;
  out << "[experiment]\n"
      << "kind = " << to_string(cfg.kind) << "\n"
      << "seed = " << cfg.seed << "\n"
      << "workers = " << cfg.workers << "\n"
      << "log_level = " << cfg.log_level << "\n\n"
      << "[geometry]\n"
      << "n = " << join_d(cfg.n) << "\n"
      << "R = " << join_d(cfg.radius) << "\n"
      << "d = " << cfg.dim << "\n"
      << "intensity = " << cfg.intensity << "\n\n"
      << "[contact]\n"
      << "lambda = " << join_d(cfg.lambda) << "\n"
      << "t_cap = " << (cfg.t_cap ? format_double(*cfg.t_cap) : std::string("none")) << "\n"
      << "replicas = " << cfg.replicas << "\n"
      << "m = " << join_u(cfg.m) << "\n"
      << "graph = " << cfg.graph << "\n"
      << "graphs = " << cfg.graphs << "\n"
      << "max_vertices = " << cfg.max_vertices << "\n\n"
      << "[percolation]\n"
      << "l = " << join_u(cfg.length) << "\n"
      << "q = " << format_double(cfg.q) << "\n"
      << "p = " << join_d(cfg.p) << "\n"
      << "dims = " << join_u(cfg.dims) << "\n";
  return out.str();
}

}  // namespace cprgg
