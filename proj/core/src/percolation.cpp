#include "cprgg/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "cprgg/random.hpp"

namespace cprgg {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

}  // namespace

// ---------------------------------------------------------------------------
// SiteGrid

std::size_t SiteGrid::index(std::span<const std::size_t> coords) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + coords[k];
  return idx;
}

std::vector<std::size_t> SiteGrid::coordinates(std::size_t site) const {
  std::vector<std::size_t> c(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    c[k] = site % dims[k];
    site /= dims[k];
  }
  return c;
}

std::size_t SiteGrid::open_count() const {
  return static_cast<std::size_t>(std::count(open.begin(), open.end(), std::uint8_t{1}));
}

void SiteGrid::neighbors(std::size_t site, std::vector<std::size_t>& out) const {
  out.clear();
  std::size_t stride = 1;
  std::size_t rest = site;
  for (std::size_t k = dims.size(); k-- > 0;) {
    std::size_t c = rest % dims[k];
    rest /= dims[k];
    if (c > 0) out.push_back(site - stride);
    if (c + 1 < dims[k]) out.push_back(site + stride);
    stride *= dims[k];
  }
}

bool SiteGrid::adjacent(std::size_t a, std::size_t b) const {
  if (a >= size() || b >= size()) return false;
  auto ca = coordinates(a);
  auto cb = coordinates(b);
  std::size_t diff = 0;
  for (std::size_t k = 0; k < ca.size(); ++k) {
    std::size_t d = ca[k] > cb[k] ? ca[k] - cb[k] : cb[k] - ca[k];
    if (d > 1) return false;
    diff += d;
  }
  return diff == 1;
}

SiteGrid SiteGrid::from_flags(std::vector<std::size_t> dims, std::vector<std::uint8_t> open) {
  if (product(dims) != open.size()) throw std::invalid_argument("site grid: flag count does not match dims");
  SiteGrid g;
  g.dims = std::move(dims);
  g.open = std::move(open);
  for (auto& f : g.open) f = f ? 1 : 0;
  g.p = std::numeric_limits<double>::quiet_NaN();
  return g;
}

SiteGrid sample_site_grid(std::vector<std::size_t> dims, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_site_grid: p must lie in [0, 1]");
  for (auto d : dims) {
    if (d == 0) throw std::invalid_argument("sample_site_grid: dims must be positive");
  }
  SiteGrid g;
  g.dims = std::move(dims);
  g.p = p;
  g.open.resize(product(g.dims));
  for (std::size_t i = 0; i < g.open.size(); ++i) g.open[i] = counter_uniform(seed, i) < p ? 1 : 0;
  return g;
}

bool is_valid_open_path(const SiteGrid& grid, std::span<const std::size_t> path) {
  std::vector<char> seen(grid.size(), 0);
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::size_t s = path[i];
    if (s >= grid.size() || !grid.is_open(s) || seen[s]) return false;
    seen[s] = 1;
    if (i > 0 && !grid.adjacent(path[i - 1], s)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Long path heuristic

namespace {

// Open-site adjacency in compressed form.
struct OpenAdjacency {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> targets;

  explicit OpenAdjacency(const SiteGrid& grid) {
    offsets.assign(grid.size() + 1, 0);
    std::vector<std::size_t> nb;
    for (std::size_t s = 0; s < grid.size(); ++s) {
      if (grid.is_open(s)) {
        grid.neighbors(s, nb);
        for (auto w : nb) {
          if (grid.is_open(w)) targets.push_back(w);
        }
      }
      offsets[s + 1] = targets.size();
    }
  }

  std::span<const std::size_t> of(std::size_t s) const {
    return {targets.data() + offsets[s], targets.data() + offsets[s + 1]};
  }
};

std::vector<std::vector<std::size_t>> open_clusters(const SiteGrid& grid, const OpenAdjacency& adj) {
  std::vector<char> seen(grid.size(), 0);
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (!grid.is_open(s) || seen[s]) continue;
    std::vector<std::size_t> c{s};
    seen[s] = 1;
    for (std::size_t h = 0; h < c.size(); ++h) {
      for (auto w : adj.of(c[h])) {
        if (!seen[w]) {
          seen[w] = 1;
          c.push_back(w);
        }
      }
    }
    clusters.push_back(std::move(c));
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return clusters;
}

std::size_t farthest_from(const OpenAdjacency& adj, std::size_t n, std::size_t source) {
  std::vector<std::size_t> dist(n, npos);
  std::vector<std::size_t> queue{source};
  dist[source] = 0;
  std::size_t far = source;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    std::size_t v = queue[h];
    if (dist[v] > dist[far] || (dist[v] == dist[far] && v < far)) far = v;
    for (auto w : adj.of(v)) {
      if (dist[w] == npos) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return far;
}

// Path kept as a doubly linked list over site ids so insertions and
// segment reversals do not shift a vector.
class PathBuilder {
 public:
  PathBuilder(const OpenAdjacency& adj, std::size_t n)
      : adj_(adj),
        next_(n, npos),
        prev_(n, npos),
        in_path_(n, 0),
        label_(n, npos),
        parent_(n, npos),
        seen_(n, 0) {}

  SitePath build(std::size_t start) {
    head_ = tail_ = start;
    in_path_[start] = 1;
    length_ = 1;
    extend_ends();
    improve();
    std::size_t failures = 0;
    while (failures < kRegrowAttempts && regrow(failures)) improve();
    return release();
  }

 private:
  static constexpr std::size_t kRegrowAttempts = 24;

  std::size_t free_degree(std::size_t v) const {
    std::size_t c = 0;
    for (auto w : adj_.of(v)) c += in_path_[w] ? 0 : 1;
    return c;
  }

  // Fewest-onward-exits choice among unvisited neighbours of v; a dead end
  // is taken only when nothing else is left.
  std::size_t pick_next(std::size_t v) const {
    std::size_t best = npos, best_deg = npos;
    for (auto w : adj_.of(v)) {
      if (in_path_[w]) continue;
      std::size_t d = free_degree(w);
      if (d == 0) d = npos - 1;
      if (d < best_deg || (d == best_deg && w < best)) {
        best = w;
        best_deg = d;
      }
    }
    return best;
  }

  void append(std::size_t w) {
    next_[tail_] = w;
    prev_[w] = tail_;
    next_[w] = npos;
    tail_ = w;
    in_path_[w] = 1;
    ++length_;
  }

  bool grow_tail() {
    bool grew = false;
    for (std::size_t w = pick_next(tail_); w != npos; w = pick_next(tail_)) {
      append(w);
      grew = true;
    }
    return grew;
  }

  void extend_ends() {
    grow_tail();
    flip();
    grow_tail();
  }

  void improve() {
    bool changed = true;
    while (changed) {
      changed = insert_detours();
      changed |= rotate_and_extend();
      if (changed) extend_ends();
    }
  }

  // Reverses the orientation of the whole path.
  void flip() {
    std::size_t v = head_;
    while (v != npos) {
      std::size_t n = next_[v];
      std::swap(next_[v], prev_[v]);
      v = n;
    }
    std::swap(head_, tail_);
  }

  // Labels the components of open sites off the path; returns sizes.
  void label_free() {
    sizes_.clear();
    std::vector<std::size_t> queue;
    std::fill(label_.begin(), label_.end(), npos);
    for (std::size_t s = 0; s < label_.size(); ++s) {
      if (in_path_[s] || label_[s] != npos || adj_.offsets[s] == adj_.offsets[s + 1]) continue;
      const std::size_t id = sizes_.size();
      label_[s] = id;
      queue.assign(1, s);
      for (std::size_t h = 0; h < queue.size(); ++h) {
        for (auto w : adj_.of(queue[h])) {
          if (!in_path_[w] && label_[w] == npos) {
            label_[w] = id;
            queue.push_back(w);
          }
        }
      }
      sizes_.push_back(queue.size());
    }
  }

  // Shortest free path from u to any site flagged in `goal` (by stamp).
  std::vector<std::size_t> free_route(std::size_t u, std::size_t goal_stamp) {
    ++stamp_;
    std::vector<std::size_t> queue{u};
    seen_[u] = stamp_;
    parent_[u] = u;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const std::size_t v = queue[h];
      if (goal_[v] == goal_stamp) {
        std::vector<std::size_t> route;
        for (std::size_t x = v;; x = parent_[x]) {
          route.push_back(x);
          if (x == u) break;
        }
        std::reverse(route.begin(), route.end());
        return route;
      }
      for (auto w : adj_.of(v)) {
        if (in_path_[w] || seen_[w] == stamp_) continue;
        seen_[w] = stamp_;
        parent_[w] = v;
        queue.push_back(w);
      }
    }
    return {};
  }

  // Replaces a path edge (a, b) by a detour through free sites whenever a
  // free neighbour of a and one of b share a free component.
  bool insert_detours() {
    label_free();
    goal_.resize(label_.size(), 0);
    bool changed = false;
    std::size_t a = head_;
    while (a != npos && next_[a] != npos) {
      const std::size_t b = next_[a];
      bool inserted = false;
      ++goal_stamp_;
      for (auto w : adj_.of(b)) {
        if (!in_path_[w]) goal_[w] = goal_stamp_;
      }
      for (auto u : adj_.of(a)) {
        if (in_path_[u]) continue;
        bool shares = false;
        for (auto w : adj_.of(b)) shares |= !in_path_[w] && label_[w] == label_[u];
        if (!shares) continue;
        auto route = free_route(u, goal_stamp_);
        if (route.size() < 2) continue;
        std::size_t x = a;
        for (auto v : route) {
          next_[x] = v;
          prev_[v] = x;
          in_path_[v] = 1;
          x = v;
        }
        next_[x] = b;
        prev_[b] = x;
        length_ += route.size();
        inserted = true;
        break;
      }
      if (inserted) {
        changed = true;  // the new edge (a, route[0]) may take another detour
      } else {
        a = b;
      }
    }
    return changed;
  }

  // Rotation at the tail: if tail t is adjacent to a path site p whose
  // successor q has a free neighbour, reverse q..t so q becomes the tail.
  bool rotate_and_extend() {
    bool changed = false;
    for (int side = 0; side < 2; ++side) {
      bool progress = true;
      while (progress) {
        progress = false;
        std::size_t t = tail_;
        for (auto p : adj_.of(t)) {
          if (!in_path_[p] || p == prev_[t]) continue;
          std::size_t q = next_[p];
          if (q == npos || free_degree(q) == 0) continue;
          reverse_suffix(p);
          grow_tail();
          progress = changed = true;
          break;
        }
      }
      flip();
    }
    return changed;
  }

  // Reverses the segment after p, so the path becomes ..., p, tail, ..., q.
  void reverse_suffix(std::size_t p) {
    std::size_t q = next_[p];
    std::size_t old_tail = tail_;
    std::size_t v = q;
    while (v != npos) {
      std::size_t n = next_[v];
      std::swap(next_[v], prev_[v]);
      v = n;
    }
    next_[p] = old_tail;
    prev_[old_tail] = p;
    next_[q] = npos;
    tail_ = q;
  }

  SitePath order() const {
    SitePath out;
    out.reserve(length_);
    for (std::size_t v = head_; v != npos; v = next_[v]) out.push_back(v);
    return out;
  }

  void clear() {
    for (std::size_t v = head_; v != npos;) {
      std::size_t n = next_[v];
      next_[v] = prev_[v] = npos;
      in_path_[v] = 0;
      v = n;
    }
    head_ = tail_ = npos;
    length_ = 0;
  }

  void assign(const SitePath& path) {
    clear();
    head_ = tail_ = path.front();
    in_path_[head_] = 1;
    length_ = 1;
    for (std::size_t i = 1; i < path.size(); ++i) append(path[i]);
  }

  SitePath release() {
    SitePath out = order();
    clear();
    return out;
  }

  // Cut and regrow: at a path site c next to a free component larger than
  // the shorter side of the path at c, drop that side, step from c into
  // the component and grow greedily. Kept only if the path gets longer.
  bool regrow(std::size_t& failures) {
    label_free();
    const SitePath current = order();
    struct Candidate {
      std::size_t gain, index, entry;  // entry: first site in the component
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < current.size(); ++i) {
      std::size_t best = 0, entry = npos, entry_deg = npos;
      for (auto u : adj_.of(current[i])) {
        if (in_path_[u]) continue;
        const std::size_t size = sizes_[label_[u]], d = free_degree(u);
        if (size > best || (size == best && d < entry_deg)) {
          best = size;
          entry = u;
          entry_deg = d;
        }
      }
      const std::size_t drop = std::min(i, current.size() - 1 - i);
      if (best > drop + 1) candidates.push_back({best - drop, i, entry});
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.gain > b.gain; });
    for (const auto& cand : candidates) {
      if (failures >= kRegrowAttempts) return false;
      const std::size_t i = cand.index;
      SitePath kept;
      if (i >= current.size() - 1 - i) {
        kept.assign(current.begin(), current.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      } else {
        kept.assign(current.rbegin(), current.rbegin() + static_cast<std::ptrdiff_t>(current.size() - i));
      }
      assign(kept);
      append(cand.entry);
      grow_tail();
      improve();
      if (length_ > current.size()) return true;
      assign(current);
      ++failures;
    }
    return false;
  }

  const OpenAdjacency& adj_;
  std::vector<std::size_t> next_, prev_;
  std::vector<char> in_path_;
  std::vector<std::size_t> label_, sizes_;
  std::vector<std::size_t> parent_, seen_, goal_;
  std::size_t stamp_ = 0, goal_stamp_ = 0;
  std::size_t head_ = npos, tail_ = npos, length_ = 0;
};

constexpr int kSweeps = 3;

}  // namespace

SitePath find_long_open_path(const SiteGrid& grid) {
  if (grid.size() == 0) return {};
  OpenAdjacency adj(grid);
  auto clusters = open_clusters(grid, adj);
  if (clusters.empty()) return {};

  PathBuilder builder(adj, grid.size());
  SitePath best;
  const auto& giant = clusters.front();
  std::size_t start = farthest_from(adj, grid.size(), *std::min_element(giant.begin(), giant.end()));
  for (int sweep = 0; sweep < kSweeps; ++sweep) {
    SitePath path = builder.build(start);
    std::size_t end = path.back();
    if (path.size() > best.size()) best = std::move(path);
    if (best.size() == giant.size() || end == start) break;
    start = end;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Exact longest path

namespace {

class LongestPathSearch {
 public:
  LongestPathSearch(const SiteGrid& grid, const OpenAdjacency& adj)
      : grid_(grid), adj_(adj), used_(grid.size(), 0), mark_(grid.size(), 0) {}

  std::size_t solve(const std::vector<std::size_t>& cluster, std::size_t known) {
    best_ = known;
    std::size_t colour[2] = {0, 0};
    for (auto s : cluster) ++colour[parity(s)];
    // a path alternates colours
    cap_ = std::min(cluster.size(), 2 * std::min(colour[0], colour[1]) + (colour[0] != colour[1] ? 1 : 0));
    for (auto s : cluster) {
      if (best_ >= cap_) break;
      used_[s] = 1;
      dfs(s, 1);
      used_[s] = 0;
    }
    return best_;
  }

 private:
  std::size_t parity(std::size_t s) const {
    auto c = grid_.coordinates(s);
    return std::accumulate(c.begin(), c.end(), std::size_t{0}) % 2;
  }

  // Upper bound on sites that can still follow `tail`: reachable free sites,
  // limited by colour alternation.
  std::size_t bound(std::size_t tail) {
    ++stamp_;
    std::size_t colour[2] = {0, 0};
    stack_.assign(1, tail);
    mark_[tail] = stamp_;
    while (!stack_.empty()) {
      std::size_t v = stack_.back();
      stack_.pop_back();
      for (auto w : adj_.of(v)) {
        if (used_[w] || mark_[w] == stamp_) continue;
        mark_[w] = stamp_;
        ++colour[parity(w)];
        stack_.push_back(w);
      }
    }
    std::size_t other = colour[1 - parity(tail)], same = colour[parity(tail)];
    return std::min(2 * other, 2 * same + 1);
  }

  void dfs(std::size_t tail, std::size_t length) {
    if (length > best_) best_ = length;
    if (best_ >= cap_) return;
    if (length + bound(tail) <= best_) return;
    for (auto w : adj_.of(tail)) {
      if (used_[w]) continue;
      used_[w] = 1;
      dfs(w, length + 1);
      used_[w] = 0;
      if (best_ >= cap_) return;
    }
  }

  const SiteGrid& grid_;
  const OpenAdjacency& adj_;
  std::vector<char> used_;
  std::vector<std::size_t> mark_;
  std::vector<std::size_t> stack_;
  std::size_t stamp_ = 0;
  std::size_t best_ = 0;
  std::size_t cap_ = 0;
};

}  // namespace

std::size_t longest_open_path_exact(const SiteGrid& grid, std::size_t max_open_sites) {
  std::size_t open = grid.open_count();
  if (open > max_open_sites) {
    throw BudgetExceeded("longest_open_path_exact: " + std::to_string(open) + " open sites exceed budget " +
                         std::to_string(max_open_sites));
  }
  if (open == 0) return 0;
  OpenAdjacency adj(grid);
  LongestPathSearch search(grid, adj);
  std::size_t best = 0;
  for (const auto& cluster : open_clusters(grid, adj)) {
    if (cluster.size() <= best) break;
    best = std::max(best, search.solve(cluster, best));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Crossings

namespace {

// BFS over open sites accepted by `inside`; sources are the open sites with
// coords[axis] == from, targets those with coords[axis] == to. Returns a
// shortest crossing path or empty.
template <class Inside>
SitePath crossing_path(const SiteGrid& grid, std::size_t axis, std::size_t from, std::size_t to,
                       Inside&& inside) {
  std::vector<std::size_t> parent(grid.size(), npos);
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (grid.is_open(s) && inside(s) && grid.coordinates(s)[axis] == from) {
      parent[s] = s;
      queue.push_back(s);
    }
  }
  std::vector<std::size_t> nb;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    std::size_t v = queue[h];
    if (grid.coordinates(v)[axis] == to) {
      SitePath path;
      for (std::size_t x = v;; x = parent[x]) {
        path.push_back(x);
        if (parent[x] == x) break;
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    grid.neighbors(v, nb);
    for (auto w : nb) {
      if (parent[w] == npos && grid.is_open(w) && inside(w)) {
        parent[w] = v;
        queue.push_back(w);
      }
    }
  }
  return {};
}

}  // namespace

bool has_open_crossing(const SiteGrid& grid, std::size_t axis) {
  if (axis >= grid.dimension()) throw std::invalid_argument("has_open_crossing: axis out of range");
  if (grid.size() == 0) return false;
  return !crossing_path(grid, axis, 0, grid.dims[axis] - 1, [](std::size_t) { return true; }).empty();
}

CrossingSweep crossing_probability_sweep(std::vector<std::size_t> dims, std::span<const double> ps,
                                         std::size_t replicas, std::uint64_t seed) {
  CrossingSweep sweep;
  for (double p : ps) {
    CrossingSweepPoint pt{p, 0, replicas};
    for (std::size_t r = 0; r < replicas; ++r) {
      if (has_open_crossing(sample_site_grid(dims, p, replica_seed(seed, r)))) ++pt.crossings;
    }
    sweep.points.push_back(pt);
  }
  std::sort(sweep.points.begin(), sweep.points.end(), [](auto& a, auto& b) { return a.p < b.p; });
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    double f = sweep.points[i].frequency();
    if (f < 0.5) continue;
    if (i == 0) {
      sweep.threshold = sweep.points[0].p;
    } else {
      double f0 = sweep.points[i - 1].frequency();
      double p0 = sweep.points[i - 1].p, p1 = sweep.points[i].p;
      sweep.threshold = f == f0 ? p1 : p0 + (0.5 - f0) * (p1 - p0) / (f - f0);
    }
    break;
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Plane gluing (d = 3)

namespace {

struct Rect {
  std::size_t y0, y1, z0, z1;  // inclusive
  bool contains(std::size_t y, std::size_t z) const { return y >= y0 && y <= y1 && z >= z0 && z <= z1; }
};

class PlaneGluer {
 public:
  PlaneGluer(const SiteGrid& grid, std::size_t m, std::size_t m1) : g_(grid), m_(m), m1_(m1) {
    ny_ = grid.dims[1];
    nz_ = grid.dims[2];
    std::size_t n = std::min(ny_, nz_) - 1;
    left_ = {m, 2 * m, 0, nz_ - 1};
    right_ = {ny_ - 1 - 2 * m, ny_ - 1 - m, 0, nz_ - 1};
    inner_ = {2 * m + 1, ny_ - 2 - 2 * m, 2 * m, nz_ - 1 - 2 * m};
    left_wide_ = {m, 2 * m + m1, 0, nz_ - 1};
    right_wide_ = {ny_ - 1 - 2 * m - m1, ny_ - 1 - m, 0, nz_ - 1};
    valid_ = m >= 1 && n >= 4 * m + 2 && grid.dims[0] > 2 * m + 1;
  }

  bool valid() const { return valid_; }

  std::optional<GlueResult> run() {
    std::size_t first = m_, last = g_.dims[0] - 1 - m_;
    // crossings per plane; planes missing one are cut points of the schedule
    std::vector<SitePath> lc(g_.dims[0]), rc(g_.dims[0]);
    for (std::size_t i = first; i <= last; ++i) {
      lc[i] = crossing(i, left_);
      rc[i] = crossing(i, right_);
    }
    // longest run of consecutive planes with both crossings present
    std::size_t best_a = 0, best_len = 0;
    for (std::size_t i = first; i <= last;) {
      if (lc[i].empty() || rc[i].empty()) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 <= last && !lc[j + 1].empty() && !rc[j + 1].empty()) ++j;
      if (j - i + 1 > best_len) {
        best_len = j - i + 1;
        best_a = i;
      }
      i = j + 1;
    }
    if (best_len < 2) return std::nullopt;

    // jump points between consecutive planes
    std::size_t a = best_a, b = best_a + best_len - 1;
    std::vector<std::pair<std::size_t, std::size_t>> jump_left(g_.dims[0]), jump_right(g_.dims[0]);
    for (std::size_t i = a; i < b; ++i) {
      auto jl = meet(lc[i], lc[i + 1]);
      auto jr = meet(rc[i], rc[i + 1]);
      if (!jl || !jr) return std::nullopt;
      jump_left[i] = *jl;
      jump_right[i] = *jr;
    }

    GlueResult result;
    result.min_plane_segment = npos;
    bool on_left = true;
    std::optional<std::pair<std::size_t, std::size_t>> entry;
    for (std::size_t i = a; i <= b; ++i) {
      std::optional<std::pair<std::size_t, std::size_t>> exit_left, exit_right;
      if (i < b) {
        exit_left = jump_left[i];
        exit_right = jump_right[i];
      }
      std::vector<std::pair<std::size_t, std::size_t>> segment;
      std::size_t used = 0;
      bool traversed = false;
      if (nice(i)) {
        auto exit = on_left ? exit_right : exit_left;
        traversed = route_through(i, entry, exit, segment, used);
      }
      if (traversed) {
        on_left = !on_left;
        ++result.nice_planes_traversed;
        result.min_plane_segment = std::min(result.min_plane_segment, used);
      } else {
        segment = transit(on_left ? lc[i] : rc[i], i, entry, on_left ? exit_left : exit_right);
      }
      for (auto [y, z] : segment) result.path.push_back(site(i, y, z));
      if (i < b) entry = on_left ? jump_left[i] : jump_right[i];
      ++result.planes_visited;
    }
    if (result.nice_planes_traversed == 0) result.min_plane_segment = 0;
    return result;
  }

 private:
  std::size_t site(std::size_t i, std::size_t y, std::size_t z) const { return (i * ny_ + y) * nz_ + z; }
  bool open(std::size_t i, std::size_t y, std::size_t z) const { return g_.is_open(site(i, y, z)); }

  // 2D grid of plane i restricted to rect (outside sites closed).
  SiteGrid plane(std::size_t i, const Rect& r) const {
    std::vector<std::uint8_t> flags(ny_ * nz_, 0);
    for (std::size_t y = r.y0; y <= r.y1; ++y) {
      for (std::size_t z = r.z0; z <= r.z1; ++z) flags[y * nz_ + z] = open(i, y, z) ? 1 : 0;
    }
    return SiteGrid::from_flags({ny_, nz_}, std::move(flags));
  }

  // Odd planes cross bottom-top (z), even planes left-right (y).
  SitePath crossing(std::size_t i, const Rect& r) const {
    SiteGrid pg = plane(i, r);
    auto inside = [&](std::size_t s) { return r.contains(s / nz_, s % nz_); };
    if (i % 2 == 1) return crossing_path(pg, 1, r.z0, r.z1, inside);
    return crossing_path(pg, 0, r.y0, r.y1, inside);
  }

  static std::optional<std::pair<std::size_t, std::size_t>> split(std::size_t s, std::size_t nz) {
    return std::pair{s / nz, s % nz};
  }

  std::optional<std::pair<std::size_t, std::size_t>> meet(const SitePath& p, const SitePath& q) const {
    std::vector<char> on_p(ny_ * nz_, 0);
    for (auto s : p) on_p[s] = 1;
    for (auto s : q) {
      if (on_p[s]) return split(s, nz_);
    }
    return std::nullopt;
  }

  std::size_t clusters_larger_than(std::size_t i, const Rect& r, std::size_t size) const {
    SiteGrid pg = plane(i, r);
    OpenAdjacency adj(pg);
    std::size_t c = 0;
    for (const auto& cl : open_clusters(pg, adj)) {
      if (cl.size() > size) ++c;
    }
    return c;
  }

  bool nice(std::size_t i) {
    auto& cached = inner_path_[i];
    if (!cached) cached = find_long_open_path(plane(i, inner_));
    if (cached->size() <= m1_) return false;
    return clusters_larger_than(i, left_wide_, m1_) == 1 && clusters_larger_than(i, right_wide_, m1_) == 1;
  }

  // Sub-path of a crossing between entry and exit (either may be absent).
  std::vector<std::pair<std::size_t, std::size_t>> transit(
      const SitePath& cross, std::size_t, std::optional<std::pair<std::size_t, std::size_t>> entry,
      std::optional<std::pair<std::size_t, std::size_t>> exit) const {
    auto pos = [&](std::pair<std::size_t, std::size_t> yz) {
      std::size_t s = yz.first * nz_ + yz.second;
      return static_cast<std::size_t>(std::find(cross.begin(), cross.end(), s) - cross.begin());
    };
    std::size_t from = entry ? pos(*entry) : (exit ? pos(*exit) : 0);
    std::size_t to = exit ? pos(*exit) : from;
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (from <= to) {
      for (std::size_t k = from; k <= to; ++k) out.push_back(*split(cross[k], nz_));
    } else {
      for (std::size_t k = from + 1; k-- > to;) out.push_back(*split(cross[k], nz_));
    }
    return out;
  }

  // BFS over free open sites of plane i from `source`; returns parents and
  // the long-path indices adjacent to the reached region.
  struct Reach {
    std::vector<std::size_t> parent;
    std::vector<std::size_t> touch;  // per path index: reached site next to it, or npos
  };

  Reach reach_from(const SiteGrid& pg, const SitePath& path, const std::vector<std::size_t>& index_on_path,
                   const std::vector<char>& blocked, std::size_t source) const {
    Reach r{std::vector<std::size_t>(pg.size(), npos), std::vector<std::size_t>(path.size(), npos)};
    std::vector<std::size_t> queue{source};
    r.parent[source] = source;
    std::vector<std::size_t> nb;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      std::size_t v = queue[h];
      pg.neighbors(v, nb);
      for (auto w : nb) {
        if (!pg.is_open(w)) continue;
        if (index_on_path[w] != npos) {
          if (r.touch[index_on_path[w]] == npos) r.touch[index_on_path[w]] = v;
          continue;
        }
        if (blocked[w] || r.parent[w] != npos) continue;
        r.parent[w] = v;
        queue.push_back(w);
      }
    }
    return r;
  }

  static std::vector<std::size_t> unwind(const std::vector<std::size_t>& parent, std::size_t end) {
    std::vector<std::size_t> out;
    for (std::size_t x = end;; x = parent[x]) {
      out.push_back(x);
      if (parent[x] == x) break;
    }
    std::reverse(out.begin(), out.end());
    return out;  // source .. end
  }

  // entry -> long path segment -> exit inside plane i.
  bool route_through(std::size_t i, std::optional<std::pair<std::size_t, std::size_t>> entry,
                     std::optional<std::pair<std::size_t, std::size_t>> exit,
                     std::vector<std::pair<std::size_t, std::size_t>>& out, std::size_t& used) {
    const SitePath& lp = *inner_path_[i];
    SiteGrid pg = plane(i, {0, ny_ - 1, 0, nz_ - 1});
    std::vector<std::size_t> on_path(pg.size(), npos);
    for (std::size_t k = 0; k < lp.size(); ++k) on_path[lp[k]] = k;
    std::vector<char> blocked(pg.size(), 0);
    auto id = [&](std::pair<std::size_t, std::size_t> yz) { return yz.first * nz_ + yz.second; };

    std::vector<std::size_t> conn_in, conn_out;
    std::size_t j = npos, k = npos;
    const std::size_t last = lp.size() - 1;

    if (entry) {
      Reach r1 = reach_from(pg, lp, on_path, blocked, id(*entry));
      // enter where the longer remaining part starts
      std::size_t best_span = 0;
      for (std::size_t x = 0; x < lp.size(); ++x) {
        if (r1.touch[x] == npos) continue;
        std::size_t span = std::max(x, last - x);
        if (j == npos || span > best_span) {
          j = x;
          best_span = span;
        }
      }
      if (j == npos) return false;
      conn_in = unwind(r1.parent, r1.touch[j]);
      for (auto s : conn_in) blocked[s] = 1;
    }
    if (exit) {
      if (blocked[id(*exit)] || on_path[id(*exit)] != npos) return false;
      Reach r2 = reach_from(pg, lp, on_path, blocked, id(*exit));
      std::size_t best_span = 0;
      for (std::size_t x = 0; x < lp.size(); ++x) {
        if (r2.touch[x] == npos || x == j) continue;
        std::size_t span = j == npos ? std::max(x, last - x) : (x > j ? x - j : j - x);
        if (k == npos || span > best_span) {
          k = x;
          best_span = span;
        }
      }
      if (k == npos) return false;
      conn_out = unwind(r2.parent, r2.touch[k]);
      std::reverse(conn_out.begin(), conn_out.end());  // touch .. exit
    }
    if (j == npos && k == npos) {
      j = 0;
      k = last;
    } else if (j == npos) {
      j = k > last - k ? 0 : last;
    } else if (k == npos) {
      k = j > last - j ? 0 : last;
    }

    out.clear();
    auto push = [&](std::size_t s) { out.emplace_back(s / nz_, s % nz_); };
    for (auto s : conn_in) push(s);
    if (j <= k) {
      for (std::size_t x = j; x <= k; ++x) push(lp[x]);
    } else {
      for (std::size_t x = j + 1; x-- > k;) push(lp[x]);
    }
    for (auto s : conn_out) push(s);
    used = (j > k ? j - k : k - j) + 1;
    return true;
  }

  const SiteGrid& g_;
  std::size_t m_, m1_;
  std::size_t ny_ = 0, nz_ = 0;
  Rect left_{}, right_{}, inner_{}, left_wide_{}, right_wide_{};
  bool valid_ = false;
  std::unordered_map<std::size_t, std::optional<SitePath>> inner_path_;
};

}  // namespace

GlueResult glue_plane_paths(const SiteGrid& grid, std::size_t margin, std::size_t inner_margin) {
  if (grid.dimension() < 3) throw std::invalid_argument("glue_plane_paths: requires d >= 3");
  if (grid.dimension() > 3) {
    // slice with the extra coordinates fixed at 0
    std::vector<std::size_t> dims3(grid.dims.begin(), grid.dims.begin() + 3);
    std::size_t stride = 1;
    for (std::size_t k = 3; k < grid.dimension(); ++k) stride *= grid.dims[k];
    std::vector<std::uint8_t> flags(dims3[0] * dims3[1] * dims3[2]);
    for (std::size_t s = 0; s < flags.size(); ++s) flags[s] = grid.open[s * stride];
    GlueResult r = glue_plane_paths(SiteGrid::from_flags(dims3, std::move(flags)), margin, inner_margin);
    for (auto& s : r.path) s *= stride;
    return r;
  }
  std::size_t n = *std::min_element(grid.dims.begin(), grid.dims.end()) - 1;
  std::size_t m = margin ? margin : static_cast<std::size_t>(std::ceil(std::pow(double(n), 0.25)));
  std::size_t m1 = inner_margin;
  if (m1 == 0 && n > 4 * m) m1 = static_cast<std::size_t>(std::floor(std::pow(double(n - 4 * m), 0.25)));

  PlaneGluer gluer(grid, m, m1);
  if (gluer.valid()) {
    if (auto r = gluer.run()) return *r;
  }
  GlueResult fb;
  fb.path = find_long_open_path(grid);
  fb.used_fallback = true;
  return fb;
}

// ---------------------------------------------------------------------------
// Dumps

void write_site_grid(std::ostream& out, const SiteGrid& grid) {
  if (grid.size() == 0) return;
  std::size_t row = grid.dims.back();
  std::size_t block = grid.dimension() >= 3 ? row * grid.dims[grid.dimension() - 2] : grid.size();
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (s > 0 && s % block == 0) out << '\n';
    out << (grid.is_open(s) ? '1' : '0');
    if ((s + 1) % row == 0) out << '\n';
  }
}

void write_site_path(std::ostream& out, const SiteGrid& grid, std::span<const std::size_t> path) {
  for (auto s : path) {
    auto c = grid.coordinates(s);
    for (std::size_t k = 0; k < c.size(); ++k) out << (k ? " " : "") << c[k];
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Oriented percolation

ArrowField::ArrowField(std::size_t length, double q, std::uint64_t seed) : length_(length), q_(q), seed_(seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("oriented percolation: q must lie in [0, 1]");
}

namespace {

inline std::uint64_t step_key(std::uint64_t seed, std::size_t k) { return hash_keys(seed, k); }

inline bool arrow_open(std::uint64_t key, std::size_t i, Direction dir, double q) {
  return to_unit(mix64(key ^ mix64(2 * i + static_cast<std::uint64_t>(dir)))) < q;
}

}  // namespace

bool ArrowField::open(std::size_t i, std::size_t k, Direction dir) const {
  if (i > length_) return false;
  if (dir == Direction::left && i == 0) return false;
  if (dir == Direction::right && i == length_) return false;
  return arrow_open(step_key(seed_, k), i, dir, q_);
}

SiteSet full_start(std::size_t length) {
  SiteSet s;
  for (std::size_t i = 0; i <= length; i += 2) s.push_back(i);
  return s;
}

SiteSet op_step(const ArrowField& arrows, const SiteSet& eta, std::size_t t) {
  SiteSet next;
  const std::uint64_t key = step_key(arrows.seed(), t);
  const std::size_t l = arrows.length();
  for (auto i : eta) {
    if (i > 0 && arrow_open(key, i, Direction::left, arrows.q())) next.push_back(i - 1);
    if (i < l && arrow_open(key, i, Direction::right, arrows.q())) next.push_back(i + 1);
  }
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  return next;
}

namespace {

SiteSet checked_initial(std::size_t length, SiteSet initial) {
  std::sort(initial.begin(), initial.end());
  initial.erase(std::unique(initial.begin(), initial.end()), initial.end());
  for (auto i : initial) {
    if (i > length) throw std::invalid_argument("oriented percolation: initial site outside [0, l]");
    if (i % 2 != 0) {
      throw std::invalid_argument("oriented percolation: initial site " + std::to_string(i) +
                                  " violates parity (i + 0 must be even)");
    }
  }
  return initial;
}

}  // namespace

OrientedPercRun op_run(std::size_t length, double q, const SiteSet& initial, std::size_t horizon,
                       std::uint64_t seed) {
  ArrowField arrows(length, q, seed);
  OrientedPercRun run;
  run.length = length;
  run.q = q;
  run.horizon = horizon;
  run.seed = seed;
  SiteSet eta = checked_initial(length, initial);
  for (std::size_t t = 0;; ++t) {
    if (eta.empty()) {
      run.edges.left.emplace_back();
      run.edges.right.emplace_back();
      run.extinction_step = t;
    } else {
      run.edges.left.emplace_back(eta.front());
      run.edges.right.emplace_back(eta.back());
    }
    run.occupancy.push_back(eta);
    if (eta.empty() || t == horizon) break;
    eta = op_step(arrows, eta, t);
  }
  return run;
}

FirstPassage op_first_passage(std::size_t length, double q, std::uint64_t seed) {
  ArrowField arrows(length, q, seed);
  FirstPassage fp;
  fp.horizon = 2 * length;
  SiteSet eta{0};
  for (std::size_t t = 0; t <= fp.horizon && !eta.empty(); ++t) {
    if (eta.back() == length) {
      fp.step = t;
      break;
    }
    eta = op_step(arrows, eta, t);
  }
  return fp;
}

std::optional<std::size_t> op_extinction_step(std::size_t length, double q, std::size_t horizon,
                                              std::uint64_t seed) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("oriented percolation: q must lie in [0, 1]");
  if (length >= 64) {
    auto run = op_run(length, q, full_start(length), horizon, seed);
    return run.extinction_step;
  }
  std::uint64_t eta = 0;
  for (std::size_t i = 0; i <= length; i += 2) eta |= std::uint64_t{1} << i;
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::uint64_t key = step_key(seed, t);
    std::uint64_t next = 0;
    for (std::uint64_t rest = eta; rest; rest &= rest - 1) {
      auto i = static_cast<std::size_t>(__builtin_ctzll(rest));
      if (i > 0 && arrow_open(key, i, Direction::left, q)) next |= std::uint64_t{1} << (i - 1);
      if (i < length && arrow_open(key, i, Direction::right, q)) next |= std::uint64_t{1} << (i + 1);
    }
    eta = next;
    if (eta == 0) return t + 1;
  }
  return std::nullopt;
}

double op_exact_survival(std::size_t length, double q, std::size_t steps, const SiteSet& initial) {
  if (length > 4 || steps > 8) {
    throw BudgetExceeded("op_exact_survival: budget is l <= 4 and t <= 8");
  }
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("op_exact_survival: q must lie in [0, 1]");
  SiteSet init = checked_initial(length, initial);
  const std::size_t states = std::size_t{1} << (length + 1);
  std::vector<double> dist(states, 0.0), next(states, 0.0);
  std::size_t mask0 = 0;
  for (auto i : init) mask0 |= std::size_t{1} << i;
  dist[mask0] = 1.0;

  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t mask = 0; mask < states; ++mask) {
      if (dist[mask] == 0.0) continue;
      // in-range arrows leaving occupied sites, as target bits
      std::vector<std::size_t> targets;
      for (std::size_t i = 0; i <= length; ++i) {
        if (!(mask >> i & 1)) continue;
        if (i > 0) targets.push_back(i - 1);
        if (i < length) targets.push_back(i + 1);
      }
      const std::size_t a = targets.size();
      for (std::size_t pick = 0; pick < (std::size_t{1} << a); ++pick) {
        double pr = dist[mask];
        std::size_t out = 0;
        for (std::size_t b = 0; b < a; ++b) {
          if (pick >> b & 1) {
            pr *= q;
            out |= std::size_t{1} << targets[b];
          } else {
            pr *= 1.0 - q;
          }
        }
        next[out] += pr;
      }
    }
    std::swap(dist, next);
  }
  double alive = 0.0;
  for (std::size_t mask = 1; mask < states; ++mask) alive += dist[mask];
  return alive;
}

std::size_t mid_window_capacity(std::size_t length, std::size_t step, double beta) {
  const double lo = (1.0 - beta) * double(length) / 2.0;
  const double hi = (1.0 + beta) * double(length) / 2.0;
  std::size_t c = 0;
  for (std::size_t x = static_cast<std::size_t>(std::ceil(std::max(0.0, lo))); double(x) <= hi && x <= length; ++x) {
    if ((x + step) % 2 == 0) ++c;
  }
  return c;
}

bool mid_window_dense(const SiteSet& eta, std::size_t length, std::size_t step, double beta) {
  if (eta.empty()) return false;
  const double lo = (1.0 - beta) * double(length) / 2.0;
  const double hi = (1.0 + beta) * double(length) / 2.0;
  std::size_t inside = 0;
  for (auto x : eta) inside += (double(x) >= lo && double(x) <= hi) ? 1 : 0;
  return 4 * inside >= 3 * mid_window_capacity(length, step, beta);
}

MidDensityEstimate op_mid_density(std::size_t length, double q, std::size_t step, double beta,
                                  std::size_t replicas, std::uint64_t seed) {
  if (replicas == 0) throw std::invalid_argument("op_mid_density: replicas must be positive");
  if (!(beta > 0.0 && beta < 1.0 + 1e-12)) throw std::invalid_argument("op_mid_density: beta must lie in (0, 1]");
  MidDensityEstimate est;
  est.replicas = replicas;
  for (std::size_t r = 0; r < replicas; ++r) {
    ArrowField arrows(length, q, replica_seed(seed, r));
    SiteSet eta = full_start(length);
    for (std::size_t t = 0; t < step && !eta.empty(); ++t) eta = op_step(arrows, eta, t);
    if (mid_window_dense(eta, length, step, beta)) ++est.hits;
  }
  const double n = double(replicas);
  const double p = double(est.hits) / n;
  est.probability = p;
  est.standard_error = std::sqrt(p * (1.0 - p) / n);
  const double z = 1.959963984540054;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  est.wilson_low = std::clamp(centre - half, 0.0, p);
  est.wilson_high = std::clamp(centre + half, p, 1.0);
  return est;
}

}  // namespace cprgg
