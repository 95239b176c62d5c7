#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cprgg {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Immutable simple undirected graph in compressed adjacency form.
/// Neighbour lists are sorted; there are no self-loops or duplicate edges.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list. Duplicate edges (in either
  /// orientation) are merged; self-loops and out-of-range ids throw.
  static Graph from_edges(std::size_t vertex_count, std::span<const Edge> edges);

  std::size_t vertex_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return neighbors_.size() / 2; }
  bool empty() const { return vertex_count() == 0; }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(Vertex a, Vertex b) const;

  /// Edges as (a, b) with a < b in ascending lexicographic order.
  std::vector<Edge> edges() const;

  /// Stable 64-bit hash of the vertex count and edge list.
  std::uint64_t fingerprint() const;

  /// Re-checks symmetry, sortedness, loop-freeness and duplicate-freeness.
  bool check_invariants() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> neighbors_;
};

/// K_m; throws std::invalid_argument for m == 0.
Graph build_complete(std::size_t m);

struct CaterpillarSpec {
  std::size_t spine_length = 0;  // spine is x_0 .. x_spine_length
  std::size_t clique_size = 1;   // M
};

/// How a spine vertex relates to the clique C(x_i) attached to it.
enum class Attachment {
  /// x_i is joined to all M vertices of C(x_i) but is not one of them.
  adjacent,
  /// x_i is one of the M vertices of C(x_i).
  member,
};

/// Spine and clique labels carried beside the graph.
struct CaterpillarLabels {
  std::vector<Vertex> spine;
  /// cliques[i] = C(x_i); under Attachment::member it includes spine[i].
  std::vector<std::vector<Vertex>> cliques;
  Attachment attachment = Attachment::adjacent;

  std::size_t clique_size() const { return cliques.empty() ? 0 : cliques.front().size(); }
};

struct Caterpillar {
  Graph graph;
  CaterpillarLabels labels;
};

/// C(l, M): a path x_0 - ... - x_l with a complete graph of size M attached
/// at every spine vertex. Under Attachment::adjacent the spine occupies ids
/// 0..l and block i occupies (l+1) + i*M .. (l+1) + (i+1)*M - 1.
Caterpillar build_caterpillar(const CaterpillarSpec& spec,
                              Attachment attachment = Attachment::adjacent);

/// Connected components, largest first (ties by smallest member); each
/// component is sorted ascending.
std::vector<std::vector<Vertex>> connected_components(const Graph& g);

enum class DiameterMode {
  exact,                    // BFS from every vertex
  double_sweep_lower_bound  // two BFS passes; a lower bound on the diameter
};

/// Diameter of the subgraph induced by `component`. Throws
/// std::invalid_argument if the set is empty, has out-of-range ids, or is
/// not connected.
std::size_t diameter(const Graph& g, std::span<const Vertex> component,
                     DiameterMode mode = DiameterMode::exact);

/// BFS hop distances from `source`; unreachable vertices get SIZE_MAX.
std::vector<std::size_t> bfs_distances(const Graph& g, Vertex source);

// Edge-list text format: "v=<count>" then one "a b" line per edge, a < b,
// ascending.
void write_edge_list(std::ostream& out, const Graph& g);
std::string to_edge_list(const Graph& g);
Graph read_edge_list(std::istream& in);

}  // namespace cprgg
