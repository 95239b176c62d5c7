#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cprgg/config.hpp"
#include "cprgg/graph.hpp"
#include "cprgg/table.hpp"

namespace cprgg {

/// A replica threw; what() names the replica index and its seed.
class ReplicaFailure : public std::runtime_error {
 public:
  ReplicaFailure(std::size_t index, std::uint64_t seed, const std::string& cause);
  std::size_t index() const { return index_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t index_;
  std::uint64_t seed_;
};

/// Calls fn(i) for i in [0, count) on up to `workers` threads. If any call
/// throws, the exception of the lowest failing index is rethrown after all
/// threads stop.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// fn(i) for every i, collected in index order.
template <class T>
std::vector<T> map_indexed(std::size_t count, std::size_t workers, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(count);
  parallel_for(count, workers, [&](std::size_t i) { slots[i] = fn(i); });
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Connected graph on n vertices: vertex v >= 1 attaches to a uniform
/// earlier vertex, then every remaining pair is added with probability
/// `extra`.
Graph random_connected_graph(std::size_t n, double extra, std::uint64_t seed);

/// Graph `index` of the oracle battery: 3..max_vertices vertices, seeded
/// from (master, index).
Graph oracle_battery_graph(std::uint64_t master, std::size_t index, std::size_t max_vertices);

struct ExperimentResult {
  ResultTable table;
  bool success = true;  // oracle-battery: every cell passed its gates
  std::vector<std::filesystem::path> files;
};

/// Runs the experiment described by cfg. Replica i uses
/// replica_seed(cfg.seed, i); rows are produced in replica order, so the
/// output does not depend on cfg.workers. When `outdir` is given, writes
/// <outdir>/<kind>.csv and <outdir>/<kind>.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& outdir = std::nullopt);

}  // namespace cprgg
