#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cprgg/graph.hpp"

namespace cprgg {

/// Bounded intensity (or density) g on a box, with declared bounds
/// 0 < lower <= g <= upper < inf. Evaluations outside the bounds are
/// reported by the samplers as errors.
class Intensity {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  Intensity(Evaluator fn, double lower, double upper, std::string name = "custom");
  static Intensity constant(double value);

  /// Built-in evaluators by name:
  ///   "constant:<v>"
  ///   "gradient:<b>,<B>"  (linear from b to B along the first axis of [0, side]^d)
  /// `side` is the edge length of the domain box the evaluator lives on.
  static Intensity parse(const std::string& spec, double side);

  double operator()(std::span<const double> x) const { return fn_(x); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool is_constant() const { return lower_ == upper_; }
  const std::string& name() const { return name_; }

 private:
  Evaluator fn_;
  double lower_;
  double upper_;
  std::string name_;
};

/// Parameters of G(n, R, g): points in [0, n^{1/d}]^d.
struct GeometryConfig {
  double volume = 1.0;  // n
  double radius = 1.0;  // R
  std::size_t dim = 2;  // d
  Intensity intensity = Intensity::constant(1.0);

  double side() const;  // n^{1/d}
  void validate() const;
};

/// Points stored flat: point i occupies coords[i*dim .. i*dim + dim).
struct PointCloud {
  std::size_t dim = 0;
  double extent = 0.0;  // domain is [0, extent]^dim
  std::vector<double> coords;

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  bool within_domain() const;
};

/// Poisson process with intensity cfg.intensity on [0, n^{1/d}]^d, by
/// thinning a homogeneous process of rate B.
PointCloud sample_poisson_points(const GeometryConfig& cfg, std::uint64_t seed);

/// Exactly `count` i.i.d. points on [0,1]^d with the given density, by
/// rejection against the envelope B.
PointCloud sample_binomial_points(std::size_t count, const Intensity& density, std::size_t dim,
                                  std::uint64_t seed);

/// Edge between v != w iff ||v - w|| <= radius. Bucket grid with cells of
/// side >= radius, scanning the 3^d neighbouring cells.
Graph build_rgg(const PointCloud& cloud, double radius);

/// Box discretization of the domain into cubes of the given side. Boxes at
/// the far boundary may be partial.
struct BoxLattice {
  double side = 0.0;
  double threshold = 0.0;
  std::vector<std::size_t> dims;        // boxes per axis
  std::vector<std::uint32_t> counts;    // points per box
  std::vector<std::uint8_t> open;       // counts >= threshold
  std::vector<std::size_t> member_offsets;
  std::vector<Vertex> members;          // point ids grouped by box, ascending

  std::size_t box_count() const { return counts.size(); }
  std::span<const Vertex> box_members(std::size_t box) const {
    return {members.data() + member_offsets[box], members.data() + member_offsets[box + 1]};
  }
  std::vector<std::size_t> box_coordinates(std::size_t box) const;
};

BoxLattice discretize_boxes(const PointCloud& cloud, double side, double open_threshold);

/// Copy of C(spine_length, clique_size) inside a geometric graph.
struct CaterpillarEmbedding {
  std::vector<std::size_t> box_path;        // lattice box ids, face-adjacent in sequence
  std::vector<Vertex> spine;                // x_i, one point per box
  std::vector<std::vector<Vertex>> blocks;  // C(x_i), disjoint from the spine
  double box_side = 0.0;
  double mu = 0.0;  // b * box_side^d

  std::size_t spine_length() const { return spine.empty() ? 0 : spine.size() - 1; }
  std::size_t clique_size() const { return blocks.empty() ? 0 : blocks.front().size(); }
};

/// Finds a caterpillar in the RGG of `cloud` with radius cfg.radius.
///
/// Boxes have side R/(2 sqrt d), so any two points in one box or in
/// face-adjacent boxes are within distance R. A box hosts a spine vertex
/// plus a clique of ceil(mu/2) points, mu = b (R/(2 sqrt d))^d, so it is
/// open when it holds at least ceil(mu/2) + 1 points. A long simple path of
/// open boxes is extracted with the site-percolation heuristic.
///
/// If the whole domain has diameter <= R the graph is complete and the
/// result has spine length 0 with the remaining points as the clique.
/// Returns nullopt when the cloud is empty or fewer than two open boxes
/// can be chained.
std::optional<CaterpillarEmbedding> find_caterpillar_embedding(const PointCloud& cloud,
                                                               const GeometryConfig& cfg);

/// Checks that the embedding is a subgraph copy of C(l, M) in `g`: blocks
/// complete, x_i joined to all of C(x_i), consecutive spine vertices
/// adjacent, consecutive blocks completely joined, and all vertices
/// distinct.
bool verify_embedding(const Graph& g, const CaterpillarEmbedding& emb);

/// One point per line, coordinates space separated, 17 significant digits.
void write_point_cloud(std::ostream& out, const PointCloud& cloud);
/// Reads the point-cloud text format; `extent` declares the domain box.
PointCloud read_point_cloud(std::istream& in, double extent);

}  // namespace cprgg
