#include "cprgg/graph.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cprgg/random.hpp"

namespace cprgg {

Graph Graph::from_edges(std::size_t vertex_count, std::span<const Edge> edges) {
  if (vertex_count > std::numeric_limits<Vertex>::max()) {
    throw std::invalid_argument("graph: vertex count exceeds 32-bit ids");
  }
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (auto [a, b] : edges) {
    if (a >= vertex_count || b >= vertex_count) {
      throw std::invalid_argument("graph: edge endpoint out of range");
    }
    if (a == b) throw std::invalid_argument("graph: self-loop on vertex " + std::to_string(a));
    directed.emplace_back(a, b);
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.offsets_.assign(vertex_count + 1, 0);
  for (auto [a, b] : directed) ++g.offsets_[a + 1];
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.neighbors_.resize(directed.size());
  // directed is sorted by (a, b), so a straight copy yields sorted rows
  for (std::size_t i = 0; i < directed.size(); ++i) g.neighbors_[i] = directed[i].second;
  return g;
}

bool Graph::has_edge(Vertex a, Vertex b) const {
  if (a >= vertex_count() || b >= vertex_count()) return false;
  auto row = neighbors(a);
  return std::binary_search(row.begin(), row.end(), b);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Vertex a = 0; a < vertex_count(); ++a) {
    for (Vertex b : neighbors(a)) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

std::uint64_t Graph::fingerprint() const {
  std::uint64_t h = mix64(vertex_count());
  for (Vertex a = 0; a < vertex_count(); ++a) {
    for (Vertex b : neighbors(a)) {
      if (a < b) h = mix64(h ^ ((static_cast<std::uint64_t>(a) << 32) | b));
    }
  }
  return h;
}

bool Graph::check_invariants() const {
  std::size_t total = 0;
  for (Vertex v = 0; v < vertex_count(); ++v) {
    auto row = neighbors(v);
    total += row.size();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] == v || row[i] >= vertex_count()) return false;
      if (i > 0 && row[i - 1] >= row[i]) return false;
      if (!has_edge(row[i], v)) return false;
    }
  }
  return total % 2 == 0 && total / 2 == edge_count();
}

Graph build_complete(std::size_t m) {
  if (m == 0) throw std::invalid_argument("build_complete: m must be at least 1");
  std::vector<Edge> edges;
  edges.reserve(m * (m - 1) / 2);
  for (Vertex a = 0; a < m; ++a) {
    for (Vertex b = a + 1; b < m; ++b) edges.emplace_back(a, b);
  }
  return Graph::from_edges(m, edges);
}

Caterpillar build_caterpillar(const CaterpillarSpec& spec, Attachment attachment) {
  if (spec.clique_size == 0) throw std::invalid_argument("build_caterpillar: clique size must be >= 1");
  const std::size_t spine = spec.spine_length + 1;
  const std::size_t extra = attachment == Attachment::adjacent ? spec.clique_size : spec.clique_size - 1;
  const std::size_t n = spine * (1 + extra);

  Caterpillar cat;
  cat.labels.attachment = attachment;
  std::vector<Edge> edges;
  for (Vertex i = 0; i < spine; ++i) {
    cat.labels.spine.push_back(i);
    if (i + 1 < spine) edges.emplace_back(i, i + 1);

    std::vector<Vertex> block;
    if (attachment == Attachment::member) block.push_back(i);
    for (std::size_t j = 0; j < extra; ++j) block.push_back(static_cast<Vertex>(spine + i * extra + j));
    for (std::size_t a = 0; a < block.size(); ++a) {
      for (std::size_t b = a + 1; b < block.size(); ++b) edges.emplace_back(block[a], block[b]);
    }
    if (attachment == Attachment::adjacent) {
      for (Vertex w : block) edges.emplace_back(i, w);
    }
    cat.labels.cliques.push_back(std::move(block));
  }
  cat.graph = Graph::from_edges(n, edges);
  return cat;
}

std::vector<std::vector<Vertex>> connected_components(const Graph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<char> seen(n, 0);
  std::vector<std::vector<Vertex>> comps;
  std::vector<Vertex> queue;
  for (Vertex s = 0; s < n; ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    queue.assign(1, s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (Vertex w : g.neighbors(queue[head])) {
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      }
    }
    std::sort(queue.begin(), queue.end());
    comps.push_back(queue);
  }
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

std::vector<std::size_t> bfs_distances(const Graph& g, Vertex source) {
  constexpr auto unreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.vertex_count(), unreached);
  std::vector<Vertex> queue{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Vertex v = queue[head];
    for (Vertex w : g.neighbors(v)) {
      if (dist[w] == unreached) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

namespace {

// BFS confined to vertices flagged in `inside`; returns (farthest vertex,
// eccentricity, reached count).
struct SweepResult {
  Vertex farthest;
  std::size_t eccentricity;
  std::size_t reached;
};

SweepResult restricted_bfs(const Graph& g, const std::vector<char>& inside, Vertex source,
                           std::vector<std::size_t>& dist, std::vector<Vertex>& queue) {
  constexpr auto unreached = std::numeric_limits<std::size_t>::max();
  queue.assign(1, source);
  dist[source] = 0;
  SweepResult r{source, 0, 0};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Vertex v = queue[head];
    if (dist[v] > r.eccentricity) r = {v, dist[v], 0};
    for (Vertex w : g.neighbors(v)) {
      if (inside[w] && dist[w] == unreached) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  r.reached = queue.size();
  for (Vertex v : queue) dist[v] = unreached;
  return r;
}

}  // namespace

std::size_t diameter(const Graph& g, std::span<const Vertex> component, DiameterMode mode) {
  if (component.empty()) throw std::invalid_argument("diameter: empty vertex set");
  std::vector<char> inside(g.vertex_count(), 0);
  std::size_t distinct = 0;
  for (Vertex v : component) {
    if (v >= g.vertex_count()) throw std::invalid_argument("diameter: vertex id out of range");
    if (!inside[v]) ++distinct;
    inside[v] = 1;
  }
  std::vector<std::size_t> dist(g.vertex_count(), std::numeric_limits<std::size_t>::max());
  std::vector<Vertex> queue;

  auto first = restricted_bfs(g, inside, component.front(), dist, queue);
  if (first.reached != distinct) throw std::invalid_argument("diameter: vertex set is not connected");

  if (mode == DiameterMode::double_sweep_lower_bound) {
    return restricted_bfs(g, inside, first.farthest, dist, queue).eccentricity;
  }
  std::size_t best = first.eccentricity;
  for (Vertex v : component) {
    best = std::max(best, restricted_bfs(g, inside, v, dist, queue).eccentricity);
  }
  return best;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "v=" << g.vertex_count() << '\n';
  for (auto [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  write_edge_list(out, g);
  return out.str();
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("v=", 0) != 0) {
    throw std::runtime_error("edge list: line 1: expected header 'v=<count>'");
  }
  std::size_t count = 0;
  try {
    std::size_t used = 0;
    count = std::stoull(line.substr(2), &used);
    if (used != line.size() - 2) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw std::runtime_error("edge list: line 1: malformed vertex count '" + line + "'");
  }
  std::vector<Edge> edges;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::uint64_t a = 0, b = 0;
    std::string rest;
    if (!(fields >> a >> b) || (fields >> rest)) {
      throw std::runtime_error("edge list: line " + std::to_string(lineno) + ": expected 'a b'");
    }
    if (a >= count || b >= count || a == b) {
      throw std::runtime_error("edge list: line " + std::to_string(lineno) + ": invalid edge");
    }
    edges.emplace_back(static_cast<Vertex>(a), static_cast<Vertex>(b));
  }
  return Graph::from_edges(count, edges);
}

}  // namespace cprgg
