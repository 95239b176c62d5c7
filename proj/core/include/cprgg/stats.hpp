#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cprgg/contact.hpp"

namespace cprgg {

/// sup_x |F_n(x) - (1 - e^{-x})|, evaluated at both sides of every jump.
/// Throws on an empty sample.
double ks_to_exp1(std::span<const double> sample);

/// x_i / mean(x). Throws on an empty sample or non-positive mean.
std::vector<double> normalize_by_mean(std::span<const double> sample);

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 1 for a residual-free fit of constant ys
};

/// Ordinary least squares of ys on xs. Needs >= 3 points and xs not all
/// equal.
LogLinearFit fit_loglinear(std::span<const double> xs, std::span<const double> ys);

struct Observation {
  double time = 0.0;
  bool censored = false;
};

/// Product-limit estimate of P(tau > t).
class SurvivalCurve {
 public:
  SurvivalCurve() = default;
  explicit SurvivalCurve(std::span<const Observation> obs);

  /// P(tau > t); nullopt past the last observation when that observation
  /// is censored (the curve is not identified there).
  std::optional<double> at(double t) const;
  /// Smallest event time with survival <= 1/2, if reached.
  std::optional<double> median() const;

  struct Step {
    double time;      // event time
    double survival;  // value on [time, next step)
  };
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t events() const { return steps_.size(); }
  double horizon() const { return horizon_; }
  bool tail_censored() const { return tail_censored_; }

 private:
  std::vector<Step> steps_;
  double horizon_ = 0.0;
  bool tail_censored_ = false;
};

SurvivalCurve survival_curve(std::span<const Observation> obs);
SurvivalCurve survival_curve(std::span<const TauSample> samples);

/// Summary of a batch of extinction times. Moments and quantiles use the
/// uncensored values; the censored count is carried alongside. The values
/// are kept sorted, so merging is order independent bit for bit.
class SampleSummary {
 public:
  SampleSummary() = default;
  explicit SampleSummary(std::span<const TauSample> samples);
  static SampleSummary of_values(std::span<const double> values);

  void add(const TauSample& s);
  SampleSummary& merge(const SampleSummary& other);

  std::size_t count() const { return values_.size() + censored_; }
  std::size_t uncensored() const { return values_.size(); }
  std::size_t censored() const { return censored_; }
  double mean() const;
  double standard_deviation() const;
  double standard_error() const;  // sd / sqrt(uncensored)
  /// Linear-interpolation quantile of the uncensored values.
  double quantile(double q) const;
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;  // ascending
  std::size_t censored_ = 0;
};

void to_json(nlohmann::json& j, const SampleSummary& s);
void to_json(nlohmann::json& j, const LogLinearFit& f);

}  // namespace cprgg
