#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cprgg {

enum class ExperimentKind {
  rgg_tau,
  clique_scaling,
  exp1_test,
  percolation_sweep,
  embedding,
  d1_regimes,
  oracle_battery,
};

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view text);

/// Malformed config; what() carries "<source>:<line>: <field>: <problem>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& field, const std::string& problem);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Fully determines an experiment's outputs together with the master seed.
/// Every list field accepts a comma-separated value; scalar fields left
/// unset fall back to per-kind defaults documented in the README.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::oracle_battery;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string log_level = "info";

  // [geometry]
  std::vector<double> n{100.0};  // volumes; several give a sweep
  std::vector<double> radius{10.0};
  std::size_t dim = 2;
  std::string intensity = "constant:1";

  // [contact]
  std::vector<double> lambda{1.0};
  std::optional<double> t_cap;
  std::size_t replicas = 100;
  std::vector<std::size_t> m{30};    // clique sizes
  std::string graph = "clique:30";   // exp1-test: clique:<m> | caterpillar:<l>,<M> | birth-death:<m>
  std::size_t graphs = 20;           // oracle-battery size
  std::size_t max_vertices = 7;      // oracle-battery vertex bound

  // [percolation]
  std::vector<std::size_t> length{16};  // l
  double q = 0.9;
  std::vector<double> p{0.75};
  std::vector<std::size_t> dims{32, 32};

  /// Checks ranges; throws ConfigError with line 0 and the field name.
  void validate(const std::string& source = "config") const;
};

/// Grammar (one item per line, '#' starts a comment):
///   [section]          section in {experiment, geometry, contact, percolation}
///   key = value        value is a scalar or a comma-separated list
/// Unknown sections, unknown keys, repeated keys and malformed values are
/// errors reported with the line number and field.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(write_config(c)) reproduces c.
std::string write_config(const ExperimentConfig& cfg);

}  // namespace cprgg
