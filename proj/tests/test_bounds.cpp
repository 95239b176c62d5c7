#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "cprgg/bounds.hpp"
#include "cprgg/contact.hpp"
#include "cprgg/random.hpp"
#include "oracles.hpp"

using namespace cprgg;

TEST_CASE("T_m") {
  CHECK(log_t_m(640, 1.0) == doctest::Approx(258.4587270541).epsilon(1e-11));
  CHECK(log_t_m(16, 1.0) == doctest::Approx(std::log(16.0)).epsilon(1e-12));
  const double e = std::exp(1.0);
  CHECK(log_t_m(8, e / 8.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS(log_t_m(4, 0.25));
  CHECK_THROWS(log_t_m(4, 0.1));
}

TEST_CASE("F bound") {
  CHECK(log_f_bound(1, 0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(log_f_bound(2, 1, 1.0) == doctest::Approx(std::log(32.0)).epsilon(1e-12));
  CHECK(log_f_bound(5, 7, 0.0) == doctest::Approx(std::log(5.0) + 5.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(f_bound(2, 1, 1.0) == doctest::Approx(32.0));
  CHECK_THROWS(log_f_bound(0, 0, 1.0));
  CHECK_THROWS_AS(f_bound(1000, 100000, 10.0), std::domain_error);
}

TEST_CASE("extinction floor") {
  CHECK(extinction_floor(1, 0, 1.0) == doctest::Approx(0.5));
  CHECK(1.0 - std::exp(-1.0) >= extinction_floor(1, 0, 1.0));
  CHECK(extinction_floor(2, 1, 1.0) == doctest::Approx(1.0 / 16.0));
  for (int v = 1; v <= 30; ++v) {
    CHECK(extinction_floor(v, 3, 0.0) == doctest::Approx(std::pow(2.0, -v)));
    CHECK(std::pow(1.0 - std::exp(-1.0), v) >= extinction_floor(v, 3, 0.0));
  }
  CHECK_THROWS(extinction_floor(0, 0, 1.0));

  // one-second extinction on K2 beats 1/16
  const int reps = 100000;
  int dead = 0;
  auto k2 = build_complete(2);
  for (int r = 0; r < reps; ++r) dead += !simulate_extinction(k2, {1.0, 1.0, replica_seed(4, std::uint64_t(r))}).censored;
  const double p = double(dead) / reps;
  CHECK(p + 3.0 * std::sqrt(p * (1 - p) / reps) >= 1.0 / 16.0);
}

TEST_CASE("gambler's ruin") {
  CHECK(gambler_ruin_lower_first(2.0 / 3.0, 2, 6, 4) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(gambler_ruin_lower_first(0.5, 0, 10, 3) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(gambler_ruin_lower_first(1.0 - 1e-12, 0, 10, 9) < 1e-9);
  CHECK_THROWS(gambler_ruin_lower_first(0.6, 0, 10, 0));
  CHECK_THROWS(gambler_ruin_lower_first(0.6, 0, 10, 10));
  CHECK_THROWS(gambler_ruin_lower_first(1.0, 0, 10, 4));

  for (long long n = 2; n <= 30; ++n) {
    for (long long k = 1; k < n; ++k) {
      for (double p : {0.1, 0.3, 0.5, 0.55, 0.7, 0.95}) {
        const double expect = oracle::ruin_by_linear_solve(p, -3, n - 3, k - 3);
        CHECK(gambler_ruin_lower_first(p, -3, n - 3, k - 3) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("martingale bound on the clique walk") {
  // Walk with down/up odds theta = 4 / (lambda m), started m/4 above the
  // lower barrier: hitting it first has probability at most theta^{m/4}.
  const double lambda = 10.0;
  const long long m = 64;
  const double theta = 4.0 / (lambda * double(m));
  const double p_up = 1.0 / (1.0 + theta);
  const double q = gambler_ruin_lower_first(p_up, m / 2, m, 3 * m / 4);
  CHECK(q <= std::pow(theta, double(m) / 4.0) * (1.0 + 1e-12));
}

TEST_CASE("theorem scale") {
  const double e = std::exp(1.0);
  CHECK(theorem_scale(37.0, e, 1.0, 2.0) == doctest::Approx(37.0).epsilon(1e-12));
  CHECK(theorem_scale(100.0, 1.0, 10.0, 2.0) == doctest::Approx(460.517018599).epsilon(1e-10));
  CHECK(theorem_scale(200.0, 1.0, 10.0, 2.0) == 2.0 * theorem_scale(100.0, 1.0, 10.0, 2.0));
  CHECK_THROWS(theorem_scale(100.0, 1.0, 1.0, 2.0));
}

TEST_CASE("bound report") {
  auto r = BoundReport::make(5, 7, 1.0);
  CHECK(r.log_f == doctest::Approx(log_f_bound(5, 7, 1.0)));
  CHECK(r.log_extinction_floor == doctest::Approx(log_extinction_floor(5, 7, 1.0)));
  CHECK_FALSE(r.theorem_scale);
  r.with_geometry(100.0, 10.0, 2.0);
  REQUIRE(r.theorem_scale);
  nlohmann::json j = r;
  CHECK(j["log_f"].get<double>() == doctest::Approx(r.log_f));
  CHECK(j.contains("theorem_scale"));
  auto sub = BoundReport::make(5, 7, 0.5).with_geometry(100.0, 1.0, 2.0);
  CHECK_FALSE(sub.theorem_scale);
}
