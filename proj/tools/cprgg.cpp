#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cprgg/bounds.hpp"
#include "cprgg/config.hpp"
#include "cprgg/contact.hpp"
#include "cprgg/experiment.hpp"
#include "cprgg/graph.hpp"
#include "cprgg/percolation.hpp"
#include "cprgg/random.hpp"
#include "cprgg/rgg.hpp"
#include "cprgg/stats.hpp"
#include "cprgg/table.hpp"

using namespace cprgg;
using nlohmann::json;

namespace {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };
Level g_level = Level::info;

Level parse_level(const std::string& s) {
  if (s == "error") return Level::error;
  if (s == "warn") return Level::warn;
  if (s == "info") return Level::info;
  if (s == "debug") return Level::debug;
  throw CLI::ValidationError("--log-level", "expected error|warn|info|debug, got '" + s + "'");
}

void log(Level level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= g_level) std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

Graph load_graph(const std::string& path) {
  auto in = open_in(path);
  return read_edge_list(in);
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
  }
}

struct GenerateOpts {
  std::string model = "rgg";
  double n = 100.0, radius = 2.0;
  std::size_t dim = 2;
  std::string intensity = "constant:1";
  std::size_t spine = 4, clique = 5, size = 10;
  std::uint64_t seed = 1;
  std::string edges, points;
};

int run_generate(const GenerateOpts& o) {
  Graph g;
  json summary;
  if (o.model == "rgg") {
    GeometryConfig geo{o.n, o.radius, o.dim, Intensity::parse(o.intensity, std::pow(o.n, 1.0 / double(o.dim)))};
    geo.validate();
    PointCloud cloud = sample_poisson_points(geo, o.seed);
    g = build_rgg(cloud, o.radius);
    if (!o.points.empty()) {
      auto out = open_out(o.points);
      write_point_cloud(out, cloud);
    }
    auto comps = connected_components(g);
    summary["largest_component"] = comps.empty() ? 0 : comps.front().size();
    summary["components"] = comps.size();
  } else if (o.model == "caterpillar") {
    g = build_caterpillar({o.spine, o.clique}).graph;
  } else if (o.model == "complete") {
    g = build_complete(o.size);
  } else {
    throw CLI::ValidationError("--model", "expected rgg|caterpillar|complete");
  }
  if (!o.edges.empty()) {
    auto out = open_out(o.edges);
    write_edge_list(out, g);
  }
  summary["model"] = o.model;
  summary["vertices"] = g.vertex_count();
  summary["edges"] = g.edge_count();
  summary["fingerprint"] = g.fingerprint();
  emit_json(summary, "-");
  return 0;
}

struct SimulateOpts {
  std::string graph;
  double lambda = 1.0;
  double t_cap = 0.0;
  std::size_t replicas = 100, workers = 1;
  std::uint64_t seed = 1;
  std::string out;
};

int run_simulate(const SimulateOpts& o) {
  Graph g = load_graph(o.graph);
  ContactConfig base{o.lambda, o.t_cap > 0.0 ? std::optional<double>(o.t_cap) : std::nullopt, o.seed};
  base.validate();
  auto samples = map_indexed<TauSample>(o.replicas, o.workers, [&](std::size_t i) {
    ContactConfig c = base;
    c.seed = replica_seed(o.seed, i);
    return simulate_extinction(g, c);
  });
  if (!o.out.empty()) {
    auto out = open_out(o.out);
    write_tau_samples(out, samples);
  }
  SampleSummary s(samples);
  json j;
  j["vertices"] = g.vertex_count();
  j["edges"] = g.edge_count();
  j["lambda"] = o.lambda;
  j["tau"] = s;
  j["bounds"] = BoundReport::make(g.vertex_count(), g.edge_count(), o.lambda);
  emit_json(j, "-");
  return 0;
}

struct PercolationOpts {
  std::vector<std::size_t> dims{32, 32};
  double p = 0.75;
  std::uint64_t seed = 1;
  bool glue = false;
  std::string grid_out, path_out;
  std::size_t length = 16, horizon = 0, replicas = 1000;
  double q = 0.9;
};

int run_site(const PercolationOpts& o) {
  SiteGrid grid = sample_site_grid(o.dims, o.p, o.seed);
  json j;
  j["open_sites"] = grid.open_count();
  j["crossing"] = has_open_crossing(grid);
  SitePath path;
  if (o.glue) {
    GlueResult gr = glue_plane_paths(grid);
    path = gr.path;
    j["planes_visited"] = gr.planes_visited;
    j["nice_planes"] = gr.nice_planes_traversed;
    j["used_fallback"] = gr.used_fallback;
  } else {
    path = find_long_open_path(grid);
  }
  j["path_length"] = path.size();
  j["valid"] = is_valid_open_path(grid, path);
  if (!o.grid_out.empty()) {
    auto out = open_out(o.grid_out);
    write_site_grid(out, grid);
  }
  if (!o.path_out.empty()) {
    auto out = open_out(o.path_out);
    write_site_path(out, grid, path);
  }
  emit_json(j, "-");
  return 0;
}

int run_oriented(const PercolationOpts& o) {
  const std::size_t horizon = o.horizon ? o.horizon : 4 * o.length;
  std::vector<TauSample> steps;
  for (std::size_t r = 0; r < o.replicas; ++r) {
    const std::uint64_t seed = replica_seed(o.seed, r);
    auto ext = op_extinction_step(o.length, o.q, horizon, seed);
    steps.push_back({ext ? double(*ext) : double(horizon), !ext, seed, 0});
  }
  SurvivalCurve curve = survival_curve(steps);
  json j;
  j["length"] = o.length;
  j["q"] = o.q;
  j["horizon"] = horizon;
  j["replicas"] = o.replicas;
  SampleSummary s(steps);
  j["survived"] = s.censored();
  if (auto m = curve.median()) j["median_extinction_step"] = *m;
  auto fp = op_first_passage(o.length, o.q, o.seed);
  if (fp.step) j["first_passage_step"] = *fp.step;
  emit_json(j, "-");
  return 0;
}

struct EmbeddingOpts {
  double n = 10000.0, radius = 10.0;
  std::size_t dim = 2;
  std::string intensity = "constant:1";
  std::uint64_t seed = 1;
  std::string points;
};

int run_embedding_cmd(const EmbeddingOpts& o) {
  GeometryConfig geo{o.n, o.radius, o.dim, Intensity::parse(o.intensity, std::pow(o.n, 1.0 / double(o.dim)))};
  geo.validate();
  PointCloud cloud;
  if (o.points.empty()) {
    cloud = sample_poisson_points(geo, o.seed);
  } else {
    auto in = open_in(o.points);
    cloud = read_point_cloud(in, geo.side());
  }
  Graph g = build_rgg(cloud, o.radius);
  auto emb = find_caterpillar_embedding(cloud, geo);
  json j;
  j["points"] = cloud.size();
  j["found"] = emb.has_value();
  if (emb) {
    j["spine_length"] = emb->spine_length();
    j["clique_size"] = emb->clique_size();
    j["mu"] = emb->mu;
    j["box_side"] = emb->box_side;
    j["verified"] = verify_embedding(g, *emb);
  }
  emit_json(j, "-");
  return emb ? 0 : 1;
}

struct OracleOpts {
  std::string graph;
  std::size_t clique = 0;
  double lambda = 1.0;
  std::size_t max_vertices = 12;
};

int run_oracle(const OracleOpts& o) {
  json j;
  j["lambda"] = o.lambda;
  if (o.clique) {
    const double ln = log_exact_clique_extinction(o.clique, o.lambda);
    j["clique"] = o.clique;
    j["log_expected_tau"] = ln;
    if (std::isfinite(std::exp(ln))) j["expected_tau"] = std::exp(ln);
  } else {
    Graph g = load_graph(o.graph);
    j["vertices"] = g.vertex_count();
    j["edges"] = g.edge_count();
    j["expected_tau"] = exact_expected_extinction_ctmc(g, o.lambda, o.max_vertices);
    j["bounds"] = BoundReport::make(g.vertex_count(), g.edge_count(), o.lambda);
  }
  emit_json(j, "-");
  return 0;
}

struct ExperimentOpts {
  std::string config, out = "results";
  std::size_t workers = 0;
};

int run_experiment_cmd(const ExperimentOpts& o, bool level_given) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.workers) cfg.workers = o.workers;
  if (!level_given) g_level = parse_level(cfg.log_level);
  log(Level::info, "running " + std::string(to_string(cfg.kind)) + " with seed " + std::to_string(cfg.seed) +
                       " on " + std::to_string(cfg.workers) + " worker(s)");
  ExperimentResult res = run_experiment(cfg, o.out);
  for (const auto& f : res.files) log(Level::info, "wrote " + f.string());
  if (!res.success) log(Level::error, "experiment reported failure");
  return res.success ? 0 : 1;
}

struct PlotOpts {
  std::string table, x, out;
  std::vector<std::string> y;
};

int run_plot(const PlotOpts& o) {
  auto in = open_in(o.table);
  ResultTable t = read_csv(in);
  ResultTable plot = emit_plot_data(t, {o.x, o.y});
  if (o.out.empty()) {
    write_csv(std::cout, plot);
  } else {
    auto out = open_out(o.out);
    write_csv(out, plot);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact process on random geometric graphs"};
  app.require_subcommand(1);
  std::string level = "info";
  auto* level_opt = app.add_option("--log-level", level, "error|warn|info|debug");

  GenerateOpts gen;
  auto* generate = app.add_subcommand("generate", "Sample a graph and write it as an edge list");
  generate->add_option("--model", gen.model, "rgg|caterpillar|complete")->capture_default_str();
  generate->add_option("--n", gen.n, "volume n")->capture_default_str();
  generate->add_option("--R", gen.radius, "connection radius")->capture_default_str();
  generate->add_option("--d", gen.dim, "dimension")->capture_default_str();
  generate->add_option("--intensity", gen.intensity, "constant:<b> or gradient:<b>,<B>")->capture_default_str();
  generate->add_option("--spine", gen.spine, "caterpillar spine length")->capture_default_str();
  generate->add_option("--clique", gen.clique, "caterpillar clique size")->capture_default_str();
  generate->add_option("--size", gen.size, "complete graph size")->capture_default_str();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--edges", gen.edges, "edge-list output file");
  generate->add_option("--points", gen.points, "point-cloud output file (rgg)");

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "Extinction times of the contact process on a graph");
  simulate->add_option("--graph", sim.graph, "edge-list file")->required();
  simulate->add_option("--lambda", sim.lambda)->capture_default_str();
  simulate->add_option("--t-cap", sim.t_cap, "censoring horizon (0 = none)")->capture_default_str();
  simulate->add_option("--replicas", sim.replicas)->capture_default_str();
  simulate->add_option("--workers", sim.workers)->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--out", sim.out, "CSV of samples");

  PercolationOpts perc;
  auto* percolation = app.add_subcommand("percolation", "Site and oriented percolation");
  percolation->require_subcommand(1);
  auto* site = percolation->add_subcommand("site", "Long open path in a site-percolation box");
  site->add_option("--dims", perc.dims, "box extents")->delimiter(',')->capture_default_str();
  site->add_option("--p", perc.p)->capture_default_str();
  site->add_option("--seed", perc.seed)->capture_default_str();
  site->add_flag("--glue", perc.glue, "plane-gluing construction (d >= 3)");
  site->add_option("--grid-out", perc.grid_out);
  site->add_option("--path-out", perc.path_out);
  auto* oriented = percolation->add_subcommand("oriented", "Extinction of oriented percolation on [0, l]");
  oriented->add_option("--l", perc.length)->capture_default_str();
  oriented->add_option("--q", perc.q)->capture_default_str();
  oriented->add_option("--horizon", perc.horizon, "step cap (0 = 4l)")->capture_default_str();
  oriented->add_option("--replicas", perc.replicas)->capture_default_str();
  oriented->add_option("--seed", perc.seed)->capture_default_str();

  EmbeddingOpts emb;
  auto* embedding = app.add_subcommand("embedding", "Find a caterpillar inside a random geometric graph");
  embedding->add_option("--n", emb.n)->capture_default_str();
  embedding->add_option("--R", emb.radius)->capture_default_str();
  embedding->add_option("--d", emb.dim)->capture_default_str();
  embedding->add_option("--intensity", emb.intensity)->capture_default_str();
  embedding->add_option("--seed", emb.seed)->capture_default_str();
  embedding->add_option("--points", emb.points, "read points instead of sampling");

  OracleOpts orc;
  auto* oracle = app.add_subcommand("oracle", "Exact expected extinction time");
  auto* graph_opt = oracle->add_option("--graph", orc.graph, "edge-list file (CTMC solve)");
  auto* clique_opt = oracle->add_option("--clique", orc.clique, "clique size (birth-death formula)");
  graph_opt->excludes(clique_opt);
  oracle->add_option("--lambda", orc.lambda)->capture_default_str();
  oracle->add_option("--max-vertices", orc.max_vertices)->capture_default_str();

  ExperimentOpts exp;
  auto* experiment = app.add_subcommand("experiment", "Run a configured experiment");
  experiment->add_option("--config", exp.config)->required()->check(CLI::ExistingFile);
  experiment->add_option("--out", exp.out, "output directory")->capture_default_str();
  experiment->add_option("--workers", exp.workers, "override the config's worker count");

  PlotOpts plot;
  auto* plot_data = app.add_subcommand("plot-data", "Long-format (x, y, series) CSV from a result table");
  plot_data->add_option("--table", plot.table)->required()->check(CLI::ExistingFile);
  plot_data->add_option("--x", plot.x)->required();
  plot_data->add_option("--y", plot.y)->required()->delimiter(',');
  plot_data->add_option("--out", plot.out);

  CLI11_PARSE(app, argc, argv);

  try {
    g_level = parse_level(level);
    if (*generate) return run_generate(gen);
    if (*simulate) return run_simulate(sim);
    if (*site) return run_site(perc);
    if (*oriented) return run_oriented(perc);
    if (*embedding) return run_embedding_cmd(emb);
    if (*oracle) {
      if (orc.graph.empty() && orc.clique == 0) throw CLI::ValidationError("oracle", "give --graph or --clique");
      return run_oracle(orc);
    }
    if (*experiment) return run_experiment_cmd(exp, level_opt->count() > 0);
    if (*plot_data) return run_plot(plot);
  } catch (const std::exception& e) {
    log(Level::error, e.what());
    return 2;
  }
  return 0;
}
