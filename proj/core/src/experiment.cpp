#include "cprgg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "cprgg/bounds.hpp"
#include "cprgg/contact.hpp"
#include "cprgg/percolation.hpp"
#include "cprgg/random.hpp"
#include "cprgg/rgg.hpp"
#include "cprgg/stats.hpp"

namespace cprgg {

ReplicaFailure::ReplicaFailure(std::size_t index, std::uint64_t seed, const std::string& cause)
    : std::runtime_error("replica " + std::to_string(index) + " (seed " + std::to_string(seed) + ") failed: " + cause),
      index_(index),
      seed_(seed) {}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < count && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Graph random_connected_graph(std::size_t n, double extra, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("random_connected_graph: n must be positive");
  Rng rng(seed);
  std::vector<Edge> edges;
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (Vertex v = 1; v < n; ++v) {
    auto u = static_cast<Vertex>(rng.below(v));
    edges.emplace_back(u, v);
    adj[u][v] = adj[v][u] = 1;
  }
  for (Vertex a = 0; a < n; ++a) {
    for (Vertex b = a + 1; b < n; ++b) {
      if (!adj[a][b] && rng.uniform() < extra) edges.emplace_back(a, b);
    }
  }
  return Graph::from_edges(n, edges);
}

Graph oracle_battery_graph(std::uint64_t master, std::size_t index, std::size_t max_vertices) {
  if (max_vertices < 3) throw std::invalid_argument("oracle_battery_graph: max_vertices must be >= 3");
  const std::uint64_t s = hash_keys(master, 0x6f7261636c65ULL, index);
  const std::size_t n = 3 + s % (max_vertices - 2);
  return random_connected_graph(n, 0.25, mix64(s));
}

namespace {

template <class Fn>
auto guarded(std::size_t index, std::uint64_t seed, Fn&& fn) {
  try {
    return fn();
  } catch (const ReplicaFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw ReplicaFailure(index, seed, e.what());
  }
}

using Row = std::vector<Cell>;

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }
// seeds are stored bit-identical in a signed column
std::int64_t seed_cell(std::uint64_t s) { return static_cast<std::int64_t>(s); }
double nan() { return std::numeric_limits<double>::quiet_NaN(); }

ExperimentResult run_rgg_tau(const ExperimentConfig& cfg) {
  const double lambda = cfg.lambda.front();
  const double radius = cfg.radius.front();
  ExperimentResult res;
  res.table = ResultTable({"n", "replica", "seed", "vertices", "edges", "tau", "censored", "scale", "log_tau"});
  const std::size_t cells = cfg.n.size() * cfg.replicas;
  auto rows = map_indexed<Row>(cells, cfg.workers, [&](std::size_t i) {
    const double n = cfg.n[i / cfg.replicas];
    const std::uint64_t seed = replica_seed(cfg.seed, i);
    return guarded(i, seed, [&] {
      GeometryConfig geo{n, radius, cfg.dim, Intensity::parse(cfg.intensity, std::pow(n, 1.0 / double(cfg.dim)))};
      PointCloud cloud = sample_poisson_points(geo, seed);
      Graph g = build_rgg(cloud, radius);
      ContactConfig cc{lambda, cfg.t_cap, mix64(seed)};
      TauSample s = simulate_extinction(g, cc);
      const double base = lambda * std::pow(radius, double(cfg.dim));
      const double scale = base > 1.0 ? theorem_scale(n, lambda, radius, double(cfg.dim)) : nan();
      return Row{n, as_int(i % cfg.replicas), seed_cell(seed), as_int(g.vertex_count()), as_int(g.edge_count()),
                 s.tau, as_int(s.censored), scale, s.tau > 0.0 ? std::log(s.tau) : nan()};
    });
  });
  for (auto& r : rows) res.table.add_row(std::move(r));

  nlohmann::json per_n = nlohmann::json::array();
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < cfg.n.size(); ++k) {
    std::vector<TauSample> samples;
    double vertices = 0.0, edges = 0.0;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const auto& row = res.table.rows[k * cfg.replicas + r];
      samples.push_back({std::get<double>(row[5]), std::get<std::int64_t>(row[6]) != 0, 0, 0});
      vertices += double(std::get<std::int64_t>(row[3]));
      edges += double(std::get<std::int64_t>(row[4]));
    }
    SampleSummary summary(samples);
    nlohmann::json entry{{"n", cfg.n[k]}, {"tau", summary}};
    const double v = std::max(1.0, std::round(vertices / double(cfg.replicas)));
    entry["bounds"] = BoundReport::make(std::size_t(v), std::size_t(std::round(edges / double(cfg.replicas))),
                                        lambda)
                          .with_geometry(cfg.n[k], radius, double(cfg.dim));
    per_n.push_back(entry);
    const double scale = std::get<double>(res.table.rows[k * cfg.replicas][7]);
    if (std::isfinite(scale) && summary.uncensored() > 0) {
      xs.push_back(scale);
      ys.push_back(std::log(summary.mean()));
    }
  }
  res.table.summary["per_n"] = per_n;
  if (xs.size() >= 3) res.table.summary["fit"] = fit_loglinear(xs, ys);
  return res;
}

ExperimentResult run_clique_scaling(const ExperimentConfig& cfg) {
  const double lambda = cfg.lambda.front();
  ExperimentResult res;
  res.table = ResultTable({"m", "m_log_lambda_m", "log_expected_tau"});
  std::vector<double> xs, ys;
  for (std::size_t m : cfg.m) {
    const double x = double(m) * std::log(lambda * double(m));
    const double y = log_exact_clique_extinction(m, lambda);
    res.table.add_row({as_int(m), x, y});
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.size() >= 3) {
    LogLinearFit fit = fit_loglinear(xs, ys);
    res.table.summary["fit"] = fit;
  }
  res.table.summary["lambda"] = lambda;
  return res;
}

struct GraphSpec {
  enum Kind { clique, caterpillar, birth_death } kind;
  std::size_t a = 0, b = 0;
};

GraphSpec parse_graph_spec(const std::string& text) {
  auto colon = text.find(':');
  auto bad = [&] { return ConfigError("config", 0, "contact.graph", "expected clique:<m>, caterpillar:<l>,<M> or birth-death:<m>, got '" + text + "'"); };
  if (colon == std::string::npos) throw bad();
  const std::string kind = text.substr(0, colon), args = text.substr(colon + 1);
  try {
    if (kind == "clique") return {GraphSpec::clique, std::stoul(args), 0};
    if (kind == "birth-death") return {GraphSpec::birth_death, std::stoul(args), 0};
    if (kind == "caterpillar") {
      auto comma = args.find(',');
      if (comma == std::string::npos) throw bad();
      return {GraphSpec::caterpillar, std::stoul(args.substr(0, comma)), std::stoul(args.substr(comma + 1))};
    }
  } catch (const std::logic_error&) {
  }
  throw bad();
}

ExperimentResult run_exp1(const ExperimentConfig& cfg) {
  const double lambda = cfg.lambda.front();
  const GraphSpec spec = parse_graph_spec(cfg.graph);
  Graph g;
  if (spec.kind == GraphSpec::clique) g = build_complete(spec.a);
  if (spec.kind == GraphSpec::caterpillar) g = build_caterpillar({spec.a, spec.b}).graph;

  auto samples = map_indexed<TauSample>(cfg.replicas, cfg.workers, [&](std::size_t i) {
    const std::uint64_t seed = replica_seed(cfg.seed, i);
    return guarded(i, seed, [&] {
      if (spec.kind == GraphSpec::birth_death) return birth_death_clique_simulate(spec.a, lambda, spec.a, seed, cfg.t_cap);
      return simulate_extinction(g, {lambda, cfg.t_cap, seed});
    });
  });
  SampleSummary summary(samples);
  const double mean = summary.mean();
  std::vector<double> normalized;
  for (const auto& s : samples) {
    if (!s.censored) normalized.push_back(s.tau / mean);
  }
  std::vector<double> sorted = normalized;
  std::sort(sorted.begin(), sorted.end());

  ExperimentResult res;
  res.table = ResultTable({"replica", "seed", "tau", "censored", "normalized", "empirical_survival", "exp_survival"});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    double x = nan(), emp = nan(), ex = nan();
    if (!s.censored && !sorted.empty()) {
      x = s.tau / mean;
      auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
      emp = double(above) / double(sorted.size());
      ex = std::exp(-x);
    }
    res.table.add_row({as_int(i), seed_cell(s.seed), s.tau, as_int(s.censored), x, emp, ex});
  }
  res.table.summary["tau"] = summary;
  res.table.summary["graph"] = cfg.graph;
  res.table.summary["ks_to_exp1"] = sorted.empty() ? nlohmann::json(nullptr) : nlohmann::json(ks_to_exp1(sorted));
  return res;
}

ExperimentResult run_percolation_sweep(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.table = ResultTable({"p", "replica", "seed", "open_fraction", "crossing", "long_path", "valid"});
  const std::size_t cells = cfg.p.size() * cfg.replicas;
  auto rows = map_indexed<Row>(cells, cfg.workers, [&](std::size_t i) {
    const double p = cfg.p[i / cfg.replicas];
    const std::size_t r = i % cfg.replicas;
    const std::uint64_t seed = replica_seed(cfg.seed, r);  // shared across p: coupled grids
    return guarded(i, seed, [&] {
      SiteGrid grid = sample_site_grid(cfg.dims, p, seed);
      SitePath path = find_long_open_path(grid);
      return Row{p,
                 as_int(r),
                 seed_cell(seed),
                 double(grid.open_count()) / double(grid.size()),
                 as_int(has_open_crossing(grid)),
                 as_int(path.size()),
                 as_int(is_valid_open_path(grid, path))};
    });
  });
  for (auto& r : rows) res.table.add_row(std::move(r));

  nlohmann::json per_p = nlohmann::json::array();
  std::vector<CrossingSweepPoint> points;
  for (std::size_t k = 0; k < cfg.p.size(); ++k) {
    std::size_t cross = 0;
    double path = 0.0;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const auto& row = res.table.rows[k * cfg.replicas + r];
      cross += std::size_t(std::get<std::int64_t>(row[4]));
      path += double(std::get<std::int64_t>(row[5]));
    }
    points.push_back({cfg.p[k], cross, cfg.replicas});
    per_p.push_back({{"p", cfg.p[k]},
                     {"crossing_frequency", double(cross) / double(cfg.replicas)},
                     {"mean_long_path", path / double(cfg.replicas)}});
  }
  res.table.summary["per_p"] = per_p;
  std::sort(points.begin(), points.end(), [](auto& a, auto& b) { return a.p < b.p; });
  nlohmann::json threshold = nullptr;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double f = points[i].frequency();
    if (f < 0.5) continue;
    if (i == 0) {
      threshold = points[0].p;
    } else {
      const double f0 = points[i - 1].frequency();
      threshold = f == f0 ? points[i].p
                          : points[i - 1].p + (0.5 - f0) * (points[i].p - points[i - 1].p) / (f - f0);
    }
    break;
  }
  res.table.summary["crossing_threshold"] = threshold;
  return res;
}

ExperimentResult run_embedding(const ExperimentConfig& cfg) {
  const double n = cfg.n.front(), radius = cfg.radius.front();
  ExperimentResult res;
  res.table = ResultTable({"replica", "seed", "points", "edges", "success", "spine_length", "clique_size", "mu", "verified"});
  auto rows = map_indexed<Row>(cfg.replicas, cfg.workers, [&](std::size_t i) {
    const std::uint64_t seed = replica_seed(cfg.seed, i);
    return guarded(i, seed, [&] {
      GeometryConfig geo{n, radius, cfg.dim, Intensity::parse(cfg.intensity, std::pow(n, 1.0 / double(cfg.dim)))};
      PointCloud cloud = sample_poisson_points(geo, seed);
      Graph g = build_rgg(cloud, radius);
      auto emb = find_caterpillar_embedding(cloud, geo);
      const double mu = geo.intensity.lower() * std::pow(radius / (2.0 * std::sqrt(double(cfg.dim))), double(cfg.dim));
      const bool ok = emb && emb->spine_length() >= 2 && double(emb->clique_size()) >= mu / 2.0;
      return Row{as_int(i),
                 seed_cell(seed),
                 as_int(cloud.size()),
                 as_int(g.edge_count()),
                 as_int(ok),
                 as_int(emb ? emb->spine_length() : 0),
                 as_int(emb ? emb->clique_size() : 0),
                 mu,
                 as_int(emb && verify_embedding(g, *emb))};
    });
  });
  std::size_t success = 0;
  for (auto& r : rows) {
    success += std::size_t(std::get<std::int64_t>(r[4]));
    res.table.add_row(std::move(r));
  }
  res.table.summary["success_rate"] = double(success) / double(cfg.replicas);
  return res;
}

ExperimentResult run_d1_regimes(const ExperimentConfig& cfg) {
  if (cfg.dim != 1) throw ConfigError("config", 0, "geometry.d", "d1-regimes requires d = 1");
  const double n = cfg.n.front();
  ExperimentResult res;
  res.table = ResultTable({"R", "replica", "seed", "points", "components", "largest", "connected", "largest_below_n23"});
  const std::size_t cells = cfg.radius.size() * cfg.replicas;
  auto rows = map_indexed<Row>(cells, cfg.workers, [&](std::size_t i) {
    const double radius = cfg.radius[i / cfg.replicas];
    const std::uint64_t seed = replica_seed(cfg.seed, i);
    return guarded(i, seed, [&] {
      GeometryConfig geo{n, radius, 1, Intensity::parse(cfg.intensity, n)};
      PointCloud cloud = sample_poisson_points(geo, seed);
      Graph g = build_rgg(cloud, radius);
      auto comps = connected_components(g);
      const std::size_t largest = comps.empty() ? 0 : comps.front().size();
      return Row{radius,
                 as_int(i % cfg.replicas),
                 seed_cell(seed),
                 as_int(g.vertex_count()),
                 as_int(comps.size()),
                 as_int(largest),
                 as_int(comps.size() == 1),
                 as_int(double(largest) <= std::pow(n, 2.0 / 3.0))};
    });
  });
  for (auto& r : rows) res.table.add_row(std::move(r));
  nlohmann::json per_r = nlohmann::json::array();
  for (std::size_t k = 0; k < cfg.radius.size(); ++k) {
    std::size_t connected = 0, small = 0;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const auto& row = res.table.rows[k * cfg.replicas + r];
      connected += std::size_t(std::get<std::int64_t>(row[6]));
      small += std::size_t(std::get<std::int64_t>(row[7]));
    }
    per_r.push_back({{"R", cfg.radius[k]},
                     {"connected_frequency", double(connected) / double(cfg.replicas)},
                     {"largest_below_n23_frequency", double(small) / double(cfg.replicas)}});
  }
  res.table.summary["per_R"] = per_r;
  return res;
}

ExperimentResult run_oracle_battery(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.table = ResultTable({"graph", "lambda", "seed", "vertices", "edges", "exact", "mean", "standard_error", "z",
                           "pass", "log_two_f", "bound_ok"});
  const std::size_t cells = cfg.graphs * cfg.lambda.size();
  auto rows = map_indexed<Row>(cells, cfg.workers, [&](std::size_t i) {
    const std::size_t gi = i / cfg.lambda.size();
    const double lambda = cfg.lambda[i % cfg.lambda.size()];
    const std::uint64_t seed = replica_seed(cfg.seed, i);
    return guarded(i, seed, [&] {
      Graph g = oracle_battery_graph(cfg.seed, gi, cfg.max_vertices);
      const double exact = exact_expected_extinction_ctmc(g, lambda);
      std::vector<TauSample> samples;
      samples.reserve(cfg.replicas);
      for (std::size_t r = 0; r < cfg.replicas; ++r) {
        samples.push_back(simulate_extinction(g, {lambda, cfg.t_cap, replica_seed(seed, r)}));
      }
      SampleSummary s(samples);
      const double z = (s.mean() - exact) / s.standard_error();
      const bool pass = s.censored() == 0 && std::fabs(z) <= 3.0;
      const double log_two_f = std::log(2.0) + log_f_bound(double(g.vertex_count()), double(g.edge_count()), lambda);
      return Row{as_int(gi),          lambda,      seed_cell(seed), as_int(g.vertex_count()), as_int(g.edge_count()),
                 exact,               s.mean(),    s.standard_error(), z,                     as_int(pass),
                 log_two_f,           as_int(std::log(exact) <= log_two_f)};
    });
  });
  std::size_t passed = 0, bounded = 0;
  for (auto& r : rows) {
    passed += std::size_t(std::get<std::int64_t>(r[9]));
    bounded += std::size_t(std::get<std::int64_t>(r[11]));
    res.table.add_row(std::move(r));
  }
  res.success = passed == cells && bounded == cells;
  res.table.summary["cells"] = cells;
  res.table.summary["passed"] = passed;
  res.table.summary["bound_ok"] = bounded;
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& outdir) {
  cfg.validate();
  ExperimentResult res;
  switch (cfg.kind) {
    case ExperimentKind::rgg_tau: res = run_rgg_tau(cfg); break;
    case ExperimentKind::clique_scaling: res = run_clique_scaling(cfg); break;
    case ExperimentKind::exp1_test: res = run_exp1(cfg); break;
    case ExperimentKind::percolation_sweep: res = run_percolation_sweep(cfg); break;
    case ExperimentKind::embedding: res = run_embedding(cfg); break;
    case ExperimentKind::d1_regimes: res = run_d1_regimes(cfg); break;
    case ExperimentKind::oracle_battery: res = run_oracle_battery(cfg); break;
  }
  res.table.summary["kind"] = std::string(to_string(cfg.kind));
  res.table.summary["seed"] = cfg.seed;
  res.table.summary["rows"] = res.table.rows.size();
  res.table.summary["success"] = res.success;

  if (outdir) {
    std::filesystem::create_directories(*outdir);
    const std::string stem(to_string(cfg.kind));
    const auto csv = *outdir / (stem + ".csv");
    const auto json = *outdir / (stem + ".json");
    {
      std::ofstream out(csv, std::ios::binary);
      write_csv(out, res.table);
      if (!out) throw std::runtime_error("cannot write " + csv.string());
    }
    {
      std::ofstream out(json, std::ios::binary);
      out << res.table.summary.dump(2) << '\n';
      if (!out) throw std::runtime_error("cannot write " + json.string());
    }
    res.files = {csv, json};
  }
  return res;
}

}  // namespace cprgg
