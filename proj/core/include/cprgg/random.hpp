#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace cprgg {

// splitmix64 finalizer; the building block for every derived seed and
// counter-based draw in the library.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash of (seed, k0, k1, ...) with every key passing through the mixer, so
// neighbouring keys give unrelated outputs.
constexpr std::uint64_t hash_keys(std::uint64_t seed) noexcept { return mix64(seed); }

template <class... Keys>
constexpr std::uint64_t hash_keys(std::uint64_t seed, std::uint64_t key, Keys... rest) noexcept {
  return hash_keys(mix64(seed ^ mix64(key)), static_cast<std::uint64_t>(rest)...);
}

/// Seed of replica `index` under master seed `master`. Replica seeds depend
/// only on (master, index), so adding replicas never perturbs earlier ones.
constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Maps 64 random bits to a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform in [0, 1) keyed by (seed, keys...).
template <class... Keys>
constexpr double counter_uniform(std::uint64_t seed, Keys... keys) noexcept {
  return to_unit(hash_keys(seed, static_cast<std::uint64_t>(keys)...));
}

/// Sequential stream used inside one simulation run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double uniform() { return to_unit(engine_()); }

  /// Exp(rate) variate by inversion; rate must be positive.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cprgg
