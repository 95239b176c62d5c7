#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace cprgg {

/// Raised when an exact oracle is asked for an instance beyond its budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ln(e^a + e^b) without overflow; -inf acts as the zero.
inline double log_add_exp(double a, double b) noexcept {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> xs) noexcept {
  double acc = -std::numeric_limits<double>::infinity();
  for (double x : xs) acc = log_add_exp(acc, x);
  return acc;
}

/// exp(x), refusing values outside the double range.
inline double checked_exp(double x, const char* what) {
  if (x > std::log(std::numeric_limits<double>::max())) {
    throw std::domain_error(std::string(what) + ": value overflows a double; use the log form");
  }
  return std::exp(x);
}

}  // namespace cprgg
