#pragma once

#include <cstddef>
#include <optional>

#include <nlohmann/json_fwd.hpp>

namespace cprgg {

// All bound quantities are returned as natural logs unless a name says
// otherwise.

/// ln T_m = m ln(lambda m) / 16; requires lambda m > 1.
double log_t_m(double m, double lambda);

/// ln F(v, e) = ln v + v ln(2 + 4 lambda e / v); requires v >= 1.
double log_f_bound(double v, double e, double lambda);
/// F itself; throws std::domain_error when it exceeds the double range.
double f_bound(double v, double e, double lambda);

/// Lower bound (2 + 4 lambda e / v)^{-v} on P(xi_1 empty).
double extinction_floor(double v, double e, double lambda);
double log_extinction_floor(double v, double e, double lambda);

/// P(walk from `start` hits `lower` before `upper`) for a +-1 walk stepping
/// up with probability p_up. Requires lower < start < upper and
/// 0 < p_up < 1; p_up = 1/2 uses (N - k) / N.
double gambler_ruin_lower_first(double p_up, long long lower, long long upper, long long start);

/// n ln(lambda R^d); requires lambda R^d > 1.
double theorem_scale(double n, double lambda, double radius, double dim);

struct BoundReport {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  double lambda = 0.0;
  double log_f = 0.0;
  double log_extinction_floor = 0.0;
  std::optional<double> theorem_scale;  // with geometric metadata only

  static BoundReport make(std::size_t vertices, std::size_t edges, double lambda);
  /// Adds n ln(lambda R^d) when lambda R^d > 1.
  BoundReport& with_geometry(double n, double radius, double dim);
};

void to_json(nlohmann::json& j, const BoundReport& r);

}  // namespace cprgg
