#include "cprgg/rgg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cprgg/percolation.hpp"
#include "cprgg/random.hpp"

namespace cprgg {

Intensity::Intensity(Evaluator fn, double lower, double upper, std::string name)
    : fn_(std::move(fn)), lower_(lower), upper_(upper), name_(std::move(name)) {
  if (!fn_) throw std::invalid_argument("intensity: empty evaluator");
  if (!(lower > 0.0) || !(upper >= lower) || !std::isfinite(upper)) {
    throw std::invalid_argument("intensity: bounds must satisfy 0 < lower <= upper < inf");
  }
}

Intensity Intensity::constant(double value) {
  return Intensity([value](std::span<const double>) { return value; }, value, value,
                   "constant:" + std::to_string(value));
}

Intensity Intensity::parse(const std::string& spec, double side) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("intensity: expected '<kind>:<args>' in '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const std::string args = spec.substr(colon + 1);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("intensity: malformed number '" + s + "' in '" + spec + "'");
    return v;
  };
  if (kind == "constant") {
    Intensity g = constant(number(args));
    g.name_ = spec;
    return g;
  }
  if (kind == "gradient") {
    auto comma = args.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("intensity: gradient needs '<b>,<B>'");
    const double b = number(args.substr(0, comma));
    const double B = number(args.substr(comma + 1));
    if (!(side > 0.0)) throw std::invalid_argument("intensity: gradient needs a positive domain side");
    return Intensity(
        [b, B, side](std::span<const double> x) {
          double t = std::clamp(x[0] / side, 0.0, 1.0);
          return b + (B - b) * t;
        },
        std::min(b, B), std::max(b, B), spec);
  }
  throw std::invalid_argument("intensity: unknown kind '" + kind + "'");
}

double GeometryConfig::side() const { return std::pow(volume, 1.0 / double(dim)); }

void GeometryConfig::validate() const {
  if (!(volume > 0.0) || !std::isfinite(volume)) throw std::invalid_argument("geometry: n must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("geometry: R must be positive");
  if (dim == 0) throw std::invalid_argument("geometry: d must be at least 1");
}

bool PointCloud::within_domain() const {
  return std::all_of(coords.begin(), coords.end(), [&](double c) { return c >= 0.0 && c <= extent; });
}

namespace {

double checked_value(const Intensity& g, std::span<const double> x) {
  double v = g(x);
  if (!(v >= g.lower() && v <= g.upper())) {
    throw std::domain_error("intensity '" + g.name() + "' evaluated outside its declared bounds");
  }
  return v;
}

}  // namespace

PointCloud sample_poisson_points(const GeometryConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  PointCloud cloud;
  cloud.dim = cfg.dim;
  cloud.extent = cfg.side();
  Rng rng(seed);
  const double envelope = cfg.intensity.upper();
  const std::uint64_t proposals = rng.poisson(envelope * cfg.volume);
  std::vector<double> x(cfg.dim);
  cloud.coords.reserve(proposals * cfg.dim);
  for (std::uint64_t i = 0; i < proposals; ++i) {
    for (auto& c : x) c = rng.uniform() * cloud.extent;
    const double keep = cfg.intensity.is_constant() ? 1.0 : checked_value(cfg.intensity, x) / envelope;
    const double u = rng.uniform();
    if (u < keep) cloud.coords.insert(cloud.coords.end(), x.begin(), x.end());
  }
  return cloud;
}

PointCloud sample_binomial_points(std::size_t count, const Intensity& density, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("sample_binomial_points: d must be at least 1");
  PointCloud cloud;
  cloud.dim = dim;
  cloud.extent = 1.0;
  Rng rng(seed);
  std::vector<double> x(dim);
  cloud.coords.reserve(count * dim);
  while (cloud.size() < count) {
    for (auto& c : x) c = rng.uniform();
    const double keep = density.is_constant() ? 1.0 : checked_value(density, x) / density.upper();
    if (rng.uniform() < keep) cloud.coords.insert(cloud.coords.end(), x.begin(), x.end());
  }
  return cloud;
}

Graph build_rgg(const PointCloud& cloud, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("build_rgg: radius must be positive");
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim;
  if (n == 0) return Graph::from_edges(0, {});

  // cells of side extent/k >= radius, capped so the table stays O(n)
  std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(cloud.extent / radius)));
  const double cap = std::max(64.0, 4.0 * double(n));
  while (k > 1 && std::pow(double(k), double(d)) > cap) --k;
  const double cell = cloud.extent / double(k);

  std::size_t cells = 1;
  for (std::size_t a = 0; a < d; ++a) cells *= k;
  auto cell_of = [&](std::size_t i) {
    std::size_t id = 0;
    auto p = cloud.point(i);
    for (std::size_t a = 0; a < d; ++a) {
      auto c = static_cast<std::size_t>(std::max(0.0, std::floor(p[a] / cell)));
      id = id * k + std::min(c, k - 1);
    }
    return id;
  };

  // counting sort of points by cell
  std::vector<std::size_t> start(cells + 1, 0), owner(n);
  for (std::size_t i = 0; i < n; ++i) {
    owner[i] = cell_of(i);
    ++start[owner[i] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) start[c + 1] += start[c];
  std::vector<Vertex> order(n);
  {
    auto fill = start;
    for (std::size_t i = 0; i < n; ++i) order[fill[owner[i]]++] = static_cast<Vertex>(i);
  }

  const double r2 = radius * radius;
  std::vector<Edge> edges;
  std::vector<std::size_t> coord(d), probe(d);
  std::vector<int> offset(d);
  for (std::size_t c = 0; c < cells; ++c) {
    if (start[c] == start[c + 1]) continue;
    for (std::size_t a = d, rest = c; a-- > 0;) {
      coord[a] = rest % k;
      rest /= k;
    }
    std::fill(offset.begin(), offset.end(), -1);
    while (true) {
      bool inside = true;
      std::size_t other = 0;
      for (std::size_t a = 0; a < d; ++a) {
        long long v = static_cast<long long>(coord[a]) + offset[a];
        if (v < 0 || v >= static_cast<long long>(k)) {
          inside = false;
          break;
        }
        other = other * k + static_cast<std::size_t>(v);
      }
      if (inside && other >= c) {
        for (std::size_t s = start[c]; s < start[c + 1]; ++s) {
          const Vertex a = order[s];
          const auto pa = cloud.point(a);
          for (std::size_t t = (other == c ? s + 1 : start[other]); t < start[other + 1]; ++t) {
            const Vertex b = order[t];
            const auto pb = cloud.point(b);
            double dist2 = 0.0;
            for (std::size_t q = 0; q < d; ++q) {
              const double diff = pa[q] - pb[q];
              dist2 += diff * diff;
            }
            if (dist2 <= r2) edges.emplace_back(std::min(a, b), std::max(a, b));
          }
        }
      }
      std::size_t a = 0;
      while (a < d && offset[a] == 1) offset[a++] = -1;
      if (a == d) break;
      ++offset[a];
    }
  }
  return Graph::from_edges(n, edges);
}

std::vector<std::size_t> BoxLattice::box_coordinates(std::size_t box) const {
  std::vector<std::size_t> c(dims.size());
  for (std::size_t a = dims.size(); a-- > 0;) {
    c[a] = box % dims[a];
    box /= dims[a];
  }
  return c;
}

BoxLattice discretize_boxes(const PointCloud& cloud, double side, double open_threshold) {
  if (!(side > 0.0)) throw std::invalid_argument("discretize_boxes: side must be positive");
  if (cloud.dim == 0) throw std::invalid_argument("discretize_boxes: cloud has no dimension");
  BoxLattice lat;
  lat.side = side;
  lat.threshold = open_threshold;
  const auto per_axis = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cloud.extent / side)));
  lat.dims.assign(cloud.dim, per_axis);
  std::size_t boxes = 1;
  for (auto v : lat.dims) boxes *= v;
  lat.counts.assign(boxes, 0);
  std::vector<std::size_t> owner(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::size_t id = 0;
    auto p = cloud.point(i);
    for (std::size_t a = 0; a < cloud.dim; ++a) {
      auto c = static_cast<std::size_t>(std::max(0.0, std::floor(p[a] / side)));
      id = id * per_axis + std::min(c, per_axis - 1);
    }
    owner[i] = id;
    ++lat.counts[id];
  }
  lat.member_offsets.assign(boxes + 1, 0);
  for (std::size_t b = 0; b < boxes; ++b) lat.member_offsets[b + 1] = lat.member_offsets[b] + lat.counts[b];
  lat.members.resize(cloud.size());
  auto fill = lat.member_offsets;
  for (std::size_t i = 0; i < cloud.size(); ++i) lat.members[fill[owner[i]]++] = static_cast<Vertex>(i);
  lat.open.resize(boxes);
  for (std::size_t b = 0; b < boxes; ++b) lat.open[b] = double(lat.counts[b]) >= open_threshold ? 1 : 0;
  return lat;
}

std::optional<CaterpillarEmbedding> find_caterpillar_embedding(const PointCloud& cloud, const GeometryConfig& cfg) {
  cfg.validate();
  if (cloud.size() == 0) return std::nullopt;
  const double d = double(cloud.dim);
  CaterpillarEmbedding emb;
  emb.box_side = cfg.radius / (2.0 * std::sqrt(d));
  emb.mu = cfg.intensity.lower() * std::pow(emb.box_side, d);

  if (std::sqrt(d) * cloud.extent <= cfg.radius) {
    // every pair is within R
    emb.box_path = {0};
    emb.spine = {0};
    std::vector<Vertex> rest;
    for (Vertex v = 1; v < cloud.size(); ++v) rest.push_back(v);
    emb.blocks = {std::move(rest)};
    return emb;
  }

  const auto half = static_cast<std::size_t>(std::ceil(emb.mu / 2.0));
  const BoxLattice lat = discretize_boxes(cloud, emb.box_side, double(half + 1));
  const SiteGrid grid = SiteGrid::from_flags(lat.dims, lat.open);
  SitePath path = find_long_open_path(grid);
  if (path.size() < 2) return std::nullopt;

  emb.box_path = path;
  for (std::size_t box : path) {
    auto members = lat.box_members(box);
    emb.spine.push_back(members[0]);
    emb.blocks.emplace_back(members.begin() + 1, members.begin() + 1 + static_cast<std::ptrdiff_t>(half));
  }
  return emb;
}

bool verify_embedding(const Graph& g, const CaterpillarEmbedding& emb) {
  if (emb.spine.size() != emb.blocks.size() || emb.spine.empty()) return false;
  std::vector<char> used(g.vertex_count(), 0);
  auto claim = [&](Vertex v) {
    if (v >= g.vertex_count() || used[v]) return false;
    used[v] = 1;
    return true;
  };
  for (std::size_t i = 0; i < emb.spine.size(); ++i) {
    if (!claim(emb.spine[i])) return false;
    for (Vertex v : emb.blocks[i]) {
      if (!claim(v)) return false;
    }
  }
  auto joined = [&](std::span<const Vertex> a, std::span<const Vertex> b) {
    for (Vertex x : a) {
      for (Vertex y : b) {
        if (x != y && !g.has_edge(x, y)) return false;
      }
    }
    return true;
  };
  for (std::size_t i = 0; i < emb.spine.size(); ++i) {
    const Vertex x = emb.spine[i];
    if (!joined(emb.blocks[i], emb.blocks[i])) return false;
    if (!joined({&x, 1}, emb.blocks[i])) return false;
    if (i + 1 < emb.spine.size()) {
      if (!g.has_edge(x, emb.spine[i + 1])) return false;
      if (!joined(emb.blocks[i], emb.blocks[i + 1])) return false;
    }
  }
  return true;
}

void write_point_cloud(std::ostream& out, const PointCloud& cloud) {
  char buf[40];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto p = cloud.point(i);
    for (std::size_t a = 0; a < p.size(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", p[a]);
      out << (a ? " " : "") << buf;
    }
    out << '\n';
  }
}

PointCloud read_point_cloud(std::istream& in, double extent) {
  PointCloud cloud;
  cloud.extent = extent;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::vector<double> p;
    double v = 0.0;
    while (fields >> v) p.push_back(v);
    if (!fields.eof()) throw std::runtime_error("point cloud: line " + std::to_string(lineno) + ": malformed number");
    if (cloud.dim == 0) cloud.dim = p.size();
    if (p.size() != cloud.dim) {
      throw std::runtime_error("point cloud: line " + std::to_string(lineno) + ": expected " +
                               std::to_string(cloud.dim) + " coordinates");
    }
    cloud.coords.insert(cloud.coords.end(), p.begin(), p.end());
  }
  if (!cloud.within_domain()) throw std::runtime_error("point cloud: coordinates outside [0, extent]");
  return cloud;
}

}  // namespace cprgg
