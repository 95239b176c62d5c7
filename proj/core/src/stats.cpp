#include "cprgg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

namespace cprgg {

double ks_to_exp1(std::span<const double> sample) {
  if (sample.empty()) throw std::invalid_argument("ks_to_exp1: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = double(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = x[i] <= 0.0 ? 0.0 : -std::expm1(-x[i]);
    d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
  }
  return d;
}

std::vector<double> normalize_by_mean(std::span<const double> sample) {
  if (sample.empty()) throw std::invalid_argument("normalize_by_mean: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / double(sorted.size());
  if (!(mean > 0.0)) throw std::invalid_argument("normalize_by_mean: mean must be positive");
  std::vector<double> out(sample.begin(), sample.end());
  for (auto& v : out) v /= mean;
  return out;
}

LogLinearFit fit_loglinear(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_loglinear: xs and ys differ in length");
  if (xs.size() < 3) throw std::invalid_argument("fit_loglinear: needs at least 3 points");
  const double n = double(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_loglinear: xs are all equal");
  LogLinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    ssr += r * r;
  }
  if (syy == 0.0) {
    f.r_squared = 1.0;  // constant ys are fitted exactly by slope 0
  } else {
    f.r_squared = 1.0 - ssr / syy;
  }
  return f;
}

SurvivalCurve::SurvivalCurve(std::span<const Observation> obs) {
  std::vector<Observation> sorted(obs.begin(), obs.end());
  // events before censorings at equal times
  std::sort(sorted.begin(), sorted.end(), [](const Observation& a, const Observation& b) {
    return a.time != b.time ? a.time < b.time : (!a.censored && b.censored);
  });
  double s = 1.0;
  std::size_t at_risk = sorted.size();
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i, deaths = 0;
    while (j < sorted.size() && sorted[j].time == sorted[i].time) {
      deaths += sorted[j].censored ? 0 : 1;
      ++j;
    }
    if (deaths > 0) {
      s *= 1.0 - double(deaths) / double(at_risk);
      steps_.push_back({sorted[i].time, s});
    }
    at_risk -= j - i;
    i = j;
  }
  if (!sorted.empty()) {
    horizon_ = sorted.back().time;
    tail_censored_ = sorted.back().censored;
  }
}

std::optional<double> SurvivalCurve::at(double t) const {
  if (tail_censored_ && t >= horizon_) return std::nullopt;
  double s = 1.0;
  for (const auto& st : steps_) {
    if (st.time > t) break;
    s = st.survival;
  }
  return s;
}

std::optional<double> SurvivalCurve::median() const {
  for (const auto& st : steps_) {
    if (st.survival <= 0.5) return st.time;
  }
  return std::nullopt;
}

SurvivalCurve survival_curve(std::span<const Observation> obs) { return SurvivalCurve(obs); }

SurvivalCurve survival_curve(std::span<const TauSample> samples) {
  std::vector<Observation> obs;
  obs.reserve(samples.size());
  for (const auto& s : samples) obs.push_back({s.tau, s.censored});
  return SurvivalCurve(obs);
}

SampleSummary::SampleSummary(std::span<const TauSample> samples) {
  for (const auto& s : samples) {
    if (s.censored) {
      ++censored_;
    } else {
      values_.push_back(s.tau);
    }
  }
  std::sort(values_.begin(), values_.end());
}

SampleSummary SampleSummary::of_values(std::span<const double> values) {
  SampleSummary s;
  s.values_.assign(values.begin(), values.end());
  std::sort(s.values_.begin(), s.values_.end());
  return s;
}

void SampleSummary::add(const TauSample& s) {
  if (s.censored) {
    ++censored_;
    return;
  }
  values_.insert(std::upper_bound(values_.begin(), values_.end(), s.tau), s.tau);
}

SampleSummary& SampleSummary::merge(const SampleSummary& other) {
  std::vector<double> out;
  out.reserve(values_.size() + other.values_.size());
  std::merge(values_.begin(), values_.end(), other.values_.begin(), other.values_.end(), std::back_inserter(out));
  values_ = std::move(out);
  censored_ += other.censored_;
  return *this;
}

double SampleSummary::mean() const {
  if (values_.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(values_.begin(), values_.end(), 0.0) / double(values_.size());
}

double SampleSummary::standard_deviation() const {
  if (values_.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean();
  double ss = 0.0;
  for (double v : values_) ss += (v - m) * (v - m);
  return std::sqrt(ss / double(values_.size() - 1));
}

double SampleSummary::standard_error() const {
  return standard_deviation() / std::sqrt(double(values_.size()));
}

double SampleSummary::quantile(double q) const {
  if (values_.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must lie in [0, 1]");
  const double h = q * double(values_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values_.size() - 1);
  return values_[lo] + (h - double(lo)) * (values_[hi] - values_[lo]);
}

namespace {
nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace

void to_json(nlohmann::json& j, const SampleSummary& s) {
  j = nlohmann::json{{"count", s.count()},
                     {"censored", s.censored()},
                     {"mean", number_or_null(s.mean())},
                     {"standard_error", number_or_null(s.standard_error())},
                     {"q25", number_or_null(s.quantile(0.25))},
                     {"median", number_or_null(s.quantile(0.5))},
                     {"q75", number_or_null(s.quantile(0.75))}};
}

void to_json(nlohmann::json& j, const LogLinearFit& f) {
  j = nlohmann::json{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

}  // namespace cprgg
