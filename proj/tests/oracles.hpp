#pragma once

// Independent reference implementations used only by the tests. None of
// these share code paths with the library beyond the Graph/SiteGrid
// containers.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cprgg/contact.hpp"
#include "cprgg/graph.hpp"
#include "cprgg/percolation.hpp"
#include "cprgg/rgg.hpp"

namespace oracle {

using cprgg::Edge;
using cprgg::Graph;
using cprgg::Vertex;

inline std::vector<Edge> brute_force_rgg(const cprgg::PointCloud& cloud, double radius) {
  std::vector<Edge> out;
  const std::size_t n = cloud.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < cloud.dim; ++k) {
        const double d = cloud.point(a)[k] - cloud.point(b)[k];
        s += d * d;
      }
      if (s <= radius * radius) out.emplace_back(Vertex(a), Vertex(b));
    }
  }
  return out;
}

// Dense Gaussian elimination with partial pivoting, long double.
inline std::vector<long double> solve_dense(std::vector<std::vector<long double>> a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    if (a[c][c] == 0.0L) throw std::runtime_error("singular system");
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = a[r][c] / a[c][c];
      if (f == 0.0L) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// P(hit lower before upper) for a +-1 walk, by solving the first-step
// equations h_k = p h_{k+1} + (1-p) h_{k-1}, h_lower = 1, h_upper = 0.
inline double ruin_by_linear_solve(double p_up, long long lower, long long upper, long long start) {
  const std::size_t n = std::size_t(upper - lower - 1);
  std::vector<std::vector<long double>> a(n, std::vector<long double>(n, 0.0L));
  std::vector<long double> b(n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0L;
    if (i + 1 < n) a[i][i + 1] = -(long double)p_up;
    if (i > 0) {
      a[i][i - 1] = -(1.0L - p_up);
    } else {
      b[i] = 1.0L - p_up;
    }
  }
  return double(solve_dense(a, b)[std::size_t(start - lower - 1)]);
}

// E[tau | k = m] for the clique birth-death chain by a direct linear solve
// of the first-step equations on states 1..m.
inline long double clique_tau_by_linear_solve(std::size_t m, double lambda) {
  std::vector<std::vector<long double>> a(m, std::vector<long double>(m, 0.0L));
  std::vector<long double> b(m, 1.0L);
  for (std::size_t k = 1; k <= m; ++k) {
    const long double up = (long double)lambda * k * (m - k), down = k;
    const std::size_t i = k - 1;
    a[i][i] = up + down;
    if (k > 1) a[i][i - 1] = -down;
    if (k < m) a[i][i + 1] = -up;
  }
  return solve_dense(a, b)[m - 1];
}

// Same quantity as a sum of positive terms: the mean passage time from j
// down to j-1 unrolls to sum_{i>=j} prod_{k=j}^{i-1} (up_k / down_k) / down_i.
// No cancellation, so it stays accurate where the linear solve does not.
inline long double clique_tau_by_series(std::size_t m, double lambda) {
  long double total = 0.0L;
  for (std::size_t j = 1; j <= m; ++j) {
    long double prod = 1.0L, passage = 0.0L;
    for (std::size_t i = j; i <= m; ++i) {
      passage += prod / (long double)i;
      prod *= (long double)lambda * (long double)(m - i);
    }
    total += passage;
  }
  return total;
}

// Expected extinction time from full occupancy by dense elimination over
// all nonempty infected sets. Fine up to 7 vertices.
inline long double ctmc_tau_dense(const Graph& g, double lambda) {
  const std::size_t n = g.vertex_count();
  const std::size_t states = (std::size_t{1} << n) - 1;  // masks 1..2^n-1 -> rows 0..
  std::vector<std::vector<long double>> a(states, std::vector<long double>(states, 0.0L));
  std::vector<long double> b(states, 1.0L);
  for (std::size_t mask = 1; mask <= states; ++mask) {
    const std::size_t row = mask - 1;
    long double out = 0.0L;
    for (Vertex v = 0; v < n; ++v) {
      const std::size_t bit = std::size_t{1} << v;
      if (mask & bit) {
        out += 1.0L;
        if (mask != bit) a[row][(mask ^ bit) - 1] -= 1.0L;
      } else {
        std::size_t infected = 0;
        for (auto w : g.neighbors(v)) infected += (mask >> w) & 1u;
        if (infected == 0) continue;
        const long double rate = (long double)lambda * infected;
        out += rate;
        a[row][(mask | bit) - 1] -= rate;
      }
    }
    a[row][row] += out;
  }
  return solve_dense(a, b)[states - 1];
}

// Oriented percolation survival by brute enumeration over every arrow
// that can be reached from `initial` in `steps` steps.
inline double op_survival_by_enumeration(std::size_t length, double q, std::size_t steps,
                                         const std::vector<std::size_t>& initial) {
  struct Arrow {
    std::size_t i, k;
    int dir;
  };
  std::vector<Arrow> arrows;
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t i = 0; i <= length; ++i) {
      if ((i + k) % 2 != 0) continue;
      if (i > 0) arrows.push_back({i, k, -1});
      if (i < length) arrows.push_back({i, k, +1});
    }
  }
  if (arrows.size() > 26) throw std::runtime_error("enumeration too large");
  double total = 0.0;
  for (std::uint64_t cfg = 0; cfg < (std::uint64_t{1} << arrows.size()); ++cfg) {
    std::vector<char> occ(length + 1, 0);
    for (auto s : initial) occ[s] = 1;
    std::size_t a = 0;
    for (std::size_t k = 0; k < steps; ++k) {
      std::vector<char> next(length + 1, 0);
      for (; a < arrows.size() && arrows[a].k == k; ++a) {
        if ((cfg >> a) & 1u && occ[arrows[a].i]) next[std::size_t(long(arrows[a].i) + arrows[a].dir)] = 1;
      }
      occ = next;
    }
    if (std::find(occ.begin(), occ.end(), 1) == occ.end()) continue;
    const int open = std::popcount(cfg);
    total += std::pow(q, open) * std::pow(1.0 - q, int(arrows.size()) - open);
  }
  return total;
}

// Longest simple open path by unpruned DFS from every open site.
inline std::size_t longest_path_brute(const cprgg::SiteGrid& grid) {
  std::vector<char> used(grid.size(), 0);
  std::size_t best = 0;
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t v, std::size_t len) {
    best = std::max(best, len);
    std::vector<std::size_t> local;
    grid.neighbors(v, local);
    for (auto w : local) {
      if (!grid.is_open(w) || used[w]) continue;
      used[w] = 1;
      dfs(w, len + 1);
      used[w] = 0;
    }
  };
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (!grid.is_open(s)) continue;
    used[s] = 1;
    dfs(s, 1);
    used[s] = 0;
  }
  return best;
}

// Forward contact process on a recorded event list, written from the
// event semantics directly: recoveries clear, infection arrows copy.
inline std::vector<char> forward_replay(std::size_t n, const std::vector<cprgg::ClockEvent>& events, double threshold,
                                        const std::vector<Vertex>& start, double until) {
  std::vector<char> on(n, 0);
  for (auto v : start) on[v] = 1;
  for (const auto& e : events) {
    if (e.time > until) break;
    if (e.kind == cprgg::ClockEvent::Kind::recovery) {
      on[e.from] = 0;
    } else if (e.mark < threshold && on[e.from]) {
      on[e.to] = 1;
    }
  }
  return on;
}

}  // namespace oracle
