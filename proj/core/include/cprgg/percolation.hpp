#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cprgg/numeric.hpp"

namespace cprgg {

// ---------------------------------------------------------------------------
// Site percolation on a box of Z^d.

/// Box [0, dims[0]) x ... with row-major site ids (last axis fastest).
struct SiteGrid {
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> open;
  double p = 0.0;

  std::size_t size() const { return open.size(); }
  std::size_t dimension() const { return dims.size(); }
  std::size_t index(std::span<const std::size_t> coords) const;
  std::vector<std::size_t> coordinates(std::size_t site) const;
  bool is_open(std::size_t site) const { return open[site] != 0; }
  std::size_t open_count() const;

  /// Lattice neighbours (differ by one in exactly one coordinate).
  void neighbors(std::size_t site, std::vector<std::size_t>& out) const;
  bool adjacent(std::size_t a, std::size_t b) const;

  /// Grid with explicit open flags (p recorded as NaN).
  static SiteGrid from_flags(std::vector<std::size_t> dims, std::vector<std::uint8_t> open);
};

/// Site i is open iff U(seed, i) < p, with U a counter-based uniform; grids
/// sampled with one seed are therefore monotone in p.
SiteGrid sample_site_grid(std::vector<std::size_t> dims, double p, std::uint64_t seed);

using SitePath = std::vector<std::size_t>;

/// True iff the path is simple, every site is open, and consecutive sites
/// are lattice-adjacent. The empty path is valid.
bool is_valid_open_path(const SiteGrid& grid, std::span<const std::size_t> path);

/// Long simple open path (length = number of sites). Greedy depth-first
/// growth with fewest-exits ordering, repeated from double-sweep
/// endpoints inside the largest open cluster, then improved by endpoint
/// extension, rotations, detours through unused open regions, and
/// cut-and-regrow toward larger unused regions.
SitePath find_long_open_path(const SiteGrid& grid);

/// Exact longest simple open path length by branch and bound. Refuses
/// (BudgetExceeded) when more than `max_open_sites` sites are open.
std::size_t longest_open_path_exact(const SiteGrid& grid, std::size_t max_open_sites = 36);

struct GlueResult {
  SitePath path;
  std::size_t planes_visited = 0;
  std::size_t nice_planes_traversed = 0;
  std::size_t min_plane_segment = 0;  // shortest in-plane long-path segment used
  bool used_fallback = false;
};

/// Plane-gluing construction for d = 3 (d > 3 runs on the slice where the
/// extra coordinates are 0). Planes are slices along axis 0. `margin` is m
/// and `inner_margin` is m1; pass 0 to use m = ceil(n^{1/4}) and
/// m1 = floor((n - 4m)^{1/4}) with n = extent - 1.
/// Falls back to find_long_open_path when crossings are missing.
GlueResult glue_plane_paths(const SiteGrid& grid, std::size_t margin = 0,
                            std::size_t inner_margin = 0);

/// Whether an open path joins the face x_0 = 0 to the face x_0 = dims[0]-1.
bool has_open_crossing(const SiteGrid& grid, std::size_t axis = 0);

struct CrossingSweepPoint {
  double p;
  std::size_t crossings;
  std::size_t replicas;
  double frequency() const { return replicas == 0 ? 0.0 : double(crossings) / double(replicas); }
};

struct CrossingSweep {
  std::vector<CrossingSweepPoint> points;
  /// p where the crossing frequency first reaches 1/2 (linear
  /// interpolation), if the sweep brackets it.
  std::optional<double> threshold;
};

/// Crossing frequency of an n^d box along axis 0 for each p, on coupled
/// grids (replica r uses the same seed for every p).
CrossingSweep crossing_probability_sweep(std::vector<std::size_t> dims, std::span<const double> ps,
                                         std::size_t replicas, std::uint64_t seed);

/// Text dump: rows of 0/1 (last axis along a row); for d = 3 planes are
/// separated by a blank line.
void write_site_grid(std::ostream& out, const SiteGrid& grid);
/// One coordinate tuple per line.
void write_site_path(std::ostream& out, const SiteGrid& grid, std::span<const std::size_t> path);

// ---------------------------------------------------------------------------
// Bernoulli oriented percolation on [0, l] with arrows (i,k) -> (i+-1,k+1)
// for i + k even.

enum class Direction : std::uint8_t { left = 0, right = 1 };

/// Lazily evaluated arrow field; arrow (i, k, dir) is open iff
/// U(seed, i, k, dir) < q. Two fields with the same seed share arrows.
class ArrowField {
 public:
  ArrowField(std::size_t length, double q, std::uint64_t seed);
  bool open(std::size_t i, std::size_t k, Direction dir) const;
  std::size_t length() const { return length_; }
  double q() const { return q_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t length_;
  double q_;
  std::uint64_t seed_;
};

using SiteSet = std::vector<std::size_t>;  // sorted

struct EdgeTrack {
  // r_t and l_t per step; nullopt once extinct
  std::vector<std::optional<std::size_t>> right;
  std::vector<std::optional<std::size_t>> left;
};

struct OrientedPercRun {
  std::size_t length = 0;  // l
  double q = 0.0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::vector<SiteSet> occupancy;              // eta_0 .. eta_last
  std::optional<std::size_t> extinction_step;  // first t with eta_t empty
  EdgeTrack edges;
};

/// Even sites of [0, l]: the full starting configuration on the parity
/// lattice.
SiteSet full_start(std::size_t length);

/// One step of the dynamics from eta_t at time t.
SiteSet op_step(const ArrowField& arrows, const SiteSet& eta, std::size_t t);

/// Runs until `horizon` or extinction. Sites of `initial` must lie in
/// [0, l] and be even (parity lattice at t = 0); otherwise throws.
OrientedPercRun op_run(std::size_t length, double q, const SiteSet& initial, std::size_t horizon,
                       std::uint64_t seed);

struct FirstPassage {
  std::optional<std::size_t> step;  // sigma_l when <= horizon
  std::size_t horizon = 0;
  bool censored() const { return !step.has_value(); }
};

/// sigma_l = first t with l in eta^0_t, censored at 2l.
FirstPassage op_first_passage(std::size_t length, double q, std::uint64_t seed);

/// First extinction step of eta^1, or nullopt if it survives `horizon`
/// steps. Uses a bitset fast path for l < 64.
std::optional<std::size_t> op_extinction_step(std::size_t length, double q, std::size_t horizon,
                                              std::uint64_t seed);

/// Exact P(eta_t != empty) by transfer over subsets of [0, l]. Budget:
/// l <= 4, t <= 8.
double op_exact_survival(std::size_t length, double q, std::size_t steps, const SiteSet& initial);

struct MidDensityEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  std::size_t replicas = 0;
  std::size_t hits = 0;
};

/// Sites of the parity slice {x : x + step even} inside
/// [(1-beta) l/2, (1+beta) l/2].
std::size_t mid_window_capacity(std::size_t length, std::size_t step, double beta);

/// Whether eta (at `step`) occupies at least 3/4 of the parity-slice sites
/// in the mid window.
bool mid_window_dense(const SiteSet& eta, std::size_t length, std::size_t step, double beta);

/// Monte Carlo estimate of P(eta^1_s is dense in the mid window); replica r
/// uses arrows seeded by replica_seed(seed, r), so calls that differ only
/// in beta share arrows.
MidDensityEstimate op_mid_density(std::size_t length, double q, std::size_t step, double beta,
                                  std::size_t replicas, std::uint64_t seed);

}  // namespace cprgg
