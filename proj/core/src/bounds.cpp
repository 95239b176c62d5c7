#include "cprgg/bounds.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "cprgg/numeric.hpp"

namespace cprgg {

namespace {

void require_vertices(double v, const char* what) {
  if (!(v >= 1.0)) throw std::invalid_argument(std::string(what) + ": needs |V| >= 1");
}

void require_rate(double lambda, const char* what) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument(std::string(what) + ": bad lambda");
}

}  // namespace

double log_t_m(double m, double lambda) {
  if (!(lambda * m > 1.0)) throw std::invalid_argument("log_t_m: requires lambda * m > 1");
  return m * std::log(lambda * m) / 16.0;
}

double log_f_bound(double v, double e, double lambda) {
  require_vertices(v, "log_f_bound");
  require_rate(lambda, "log_f_bound");
  if (!(e >= 0.0)) throw std::invalid_argument("log_f_bound: needs |E| >= 0");
  return std::log(v) + v * std::log(2.0 + 4.0 * lambda * e / v);
}

double f_bound(double v, double e, double lambda) { return checked_exp(log_f_bound(v, e, lambda), "f_bound"); }

double log_extinction_floor(double v, double e, double lambda) {
  require_vertices(v, "extinction_floor");
  require_rate(lambda, "extinction_floor");
  if (!(e >= 0.0)) throw std::invalid_argument("extinction_floor: needs |E| >= 0");
  return -v * std::log(2.0 + 4.0 * lambda * e / v);
}

double extinction_floor(double v, double e, double lambda) { return std::exp(log_extinction_floor(v, e, lambda)); }

double gambler_ruin_lower_first(double p_up, long long lower, long long upper, long long start) {
  if (!(lower < start && start < upper)) throw std::invalid_argument("gambler_ruin: needs lower < start < upper");
  if (!(p_up > 0.0 && p_up < 1.0)) throw std::invalid_argument("gambler_ruin: needs 0 < p_up < 1");
  const double n = double(upper - lower);
  const double k = double(start - lower);
  if (p_up == 0.5) return (n - k) / n;
  // (r^k - r^N) / (1 - r^N), r = (1 - p)/p, written with expm1 for both signs of ln r
  const double lr = std::log1p(-p_up) - std::log(p_up);
  if (lr < 0.0) return std::exp(k * lr) * std::expm1((n - k) * lr) / std::expm1(n * lr);
  return std::expm1(-(n - k) * lr) / std::expm1(-n * lr);
}

double theorem_scale(double n, double lambda, double radius, double dim) {
  const double base = lambda * std::pow(radius, dim);
  if (!(base > 1.0)) {
    throw std::invalid_argument(
        "theorem_scale: lambda R^d <= 1 is outside the supercritical regime (needs R^d >= K / min(lambda, 1))");
  }
  return n * std::log(base);
}

BoundReport BoundReport::make(std::size_t vertices, std::size_t edges, double lambda) {
  BoundReport r;
  r.vertices = vertices;
  r.edges = edges;
  r.lambda = lambda;
  r.log_f = log_f_bound(double(vertices), double(edges), lambda);
  r.log_extinction_floor = cprgg::log_extinction_floor(double(vertices), double(edges), lambda);
  return r;
}

BoundReport& BoundReport::with_geometry(double n, double radius, double dim) {
  if (lambda * std::pow(radius, dim) > 1.0) theorem_scale = cprgg::theorem_scale(n, lambda, radius, dim);
  return *this;
}

void to_json(nlohmann::json& j, const BoundReport& r) {
  j = nlohmann::json{{"vertices", r.vertices},
                     {"edges", r.edges},
                     {"lambda", r.lambda},
                     {"log_f", r.log_f},
                     {"log_extinction_floor", r.log_extinction_floor}};
  if (r.theorem_scale) j["theorem_scale"] = *r.theorem_scale;
}

}  // namespace cprgg
