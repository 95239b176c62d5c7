#include "cprgg/contact.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>

#include "cprgg/numeric.hpp"

namespace cprgg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ContactConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("contact: lambda must be finite and >= 0");
  if (t_cap && !(*t_cap > 0.0)) throw std::invalid_argument("contact: t_cap must be positive");
}

// ---------------------------------------------------------------------------
// ContactEngine

ContactEngine::ContactEngine(const Graph& g, double lambda, std::uint64_t seed)
    : g_(g),
      lambda_(lambda),
      rng_(seed),
      slot_(g.vertex_count(), kHealthy),
      pressure_(g.vertex_count(), 0),
      tree_(g.vertex_count() + 1, 0) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("contact: lambda must be finite and >= 0");
  top_bit_ = g.vertex_count() == 0 ? 0 : std::bit_floor(g.vertex_count());
  infected_.reserve(g.vertex_count());
}

void ContactEngine::reset(std::span<const Vertex> initial) {
  for (Vertex v : infected_) slot_[v] = kHealthy;
  infected_.clear();
  std::fill(pressure_.begin(), pressure_.end(), 0);
  std::fill(tree_.begin(), tree_.end(), 0);
  weight_ = 0;
  time_ = 0.0;
  next_ = -1.0;
  events_ = 0;
  for (Vertex v : initial) {
    if (v >= g_.vertex_count()) throw std::invalid_argument("contact: initial vertex out of range");
    if (!is_infected(v)) infect(v);
  }
}

void ContactEngine::reset_full() {
  VertexSet all(g_.vertex_count());
  for (Vertex v = 0; v < all.size(); ++v) all[v] = v;
  reset(all);
}

void ContactEngine::fenwick_add(Vertex v, std::int64_t delta) {
  for (std::size_t i = std::size_t{v} + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
}

Vertex ContactEngine::fenwick_find(std::uint64_t target) const {
  std::size_t pos = 0;
  auto rest = static_cast<std::int64_t>(target);
  for (std::size_t step = top_bit_; step; step >>= 1) {
    if (pos + step < tree_.size() && tree_[pos + step] <= rest) {
      pos += step;
      rest -= tree_[pos];
    }
  }
  return static_cast<Vertex>(pos);
}

void ContactEngine::infect(Vertex v) {
  fenwick_add(v, -static_cast<std::int64_t>(pressure_[v]));
  weight_ -= pressure_[v];
  slot_[v] = static_cast<std::uint32_t>(infected_.size());
  infected_.push_back(v);
  for (Vertex w : g_.neighbors(v)) {
    ++pressure_[w];
    if (!is_infected(w)) {
      fenwick_add(w, 1);
      ++weight_;
    }
  }
}

void ContactEngine::recover(Vertex v) {
  std::uint32_t at = slot_[v];
  Vertex last = infected_.back();
  infected_[at] = last;
  slot_[last] = at;
  infected_.pop_back();
  slot_[v] = kHealthy;
  fenwick_add(v, pressure_[v]);
  weight_ += pressure_[v];
  for (Vertex w : g_.neighbors(v)) {
    --pressure_[w];
    if (!is_infected(w)) {
      fenwick_add(w, -1);
      --weight_;
    }
  }
}

bool ContactEngine::advance(double until) {
  while (!infected_.empty()) {
    const double recoveries = static_cast<double>(infected_.size());
    const double total = recoveries + lambda_ * static_cast<double>(weight_);
    if (next_ < 0.0) next_ = time_ + rng_.exponential(total);
    if (next_ > until) {
      time_ = until;
      return false;
    }
    time_ = next_;
    next_ = -1.0;
    if (rng_.uniform() * total < recoveries) {
      recover(infected_[rng_.below(infected_.size())]);
    } else {
      infect(fenwick_find(rng_.below(weight_)));
    }
    if (++events_ % audit_interval == 0) audit();
  }
  return true;
}

InfectionState ContactEngine::state() const {
  InfectionState s;
  s.infected = infected_;
  std::sort(s.infected.begin(), s.infected.end());
  s.infected_degree_sum = lambda_ * static_cast<double>(weight_);
  s.time = time_;
  return s;
}

void ContactEngine::audit() const {
  std::uint64_t w = 0;
  for (Vertex v = 0; v < g_.vertex_count(); ++v) {
    std::uint32_t p = 0;
    for (Vertex u : g_.neighbors(v)) p += is_infected(u) ? 1 : 0;
    if (p != pressure_[v]) throw std::logic_error("contact engine: pressure bookkeeping diverged");
    if (!is_infected(v)) w += p;
    // point value of the Fenwick tree at v
    std::int64_t point = tree_[v + 1];
    std::size_t i = v + 1;
    std::size_t stop = i - (i & (~i + 1));
    for (std::size_t j = i - 1; j > stop; j -= j & (~j + 1)) point -= tree_[j];
    if (point != (is_infected(v) ? 0 : static_cast<std::int64_t>(p))) {
      throw std::logic_error("contact engine: Fenwick bookkeeping diverged");
    }
  }
  if (w != weight_) throw std::logic_error("contact engine: rate sum bookkeeping diverged");
  for (std::size_t k = 0; k < infected_.size(); ++k) {
    if (slot_[infected_[k]] != k) throw std::logic_error("contact engine: infected list corrupted");
  }
}

TauSample simulate_extinction(const Graph& g, const ContactConfig& cfg,
                              std::optional<std::span<const Vertex>> initial) {
  cfg.validate();
  TauSample s;
  s.seed = cfg.seed;
  s.fingerprint = g.fingerprint();
  if (g.empty()) return s;
  ContactEngine engine(g, cfg.lambda, cfg.seed);
  if (initial) {
    engine.reset(*initial);
  } else {
    engine.reset_full();
  }
  if (engine.advance(cfg.t_cap.value_or(kInf))) {
    s.tau = engine.time();
  } else {
    s.tau = *cfg.t_cap;
    s.censored = true;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Graphical construction

namespace {

enum : std::uint64_t { kRecoveryTag = 1, kArrowTag = 2, kMarkTag = 3 };

struct DirectedEdges {
  std::vector<Vertex> from, to;
  explicit DirectedEdges(const Graph& g) {
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      for (Vertex w : g.neighbors(v)) {
        from.push_back(v);
        to.push_back(w);
      }
    }
  }
};

struct Ring {
  double time;
  ClockEvent::Kind kind;
  std::uint32_t id;  // vertex or directed edge
  std::uint64_t occurrence;
};

struct RingLater {
  bool operator()(const Ring& a, const Ring& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.id > b.id;
  }
};

double clock_gap(std::uint64_t seed, std::uint64_t tag, std::uint64_t id, std::uint64_t k, double rate) {
  return -std::log1p(-counter_uniform(seed, tag, id, k)) / rate;
}

}  // namespace

GraphicalConstruction::GraphicalConstruction(const Graph& g, double lambda_max, std::uint64_t seed)
    : g_(g), lambda_max_(lambda_max), seed_(seed) {
  if (!std::isfinite(lambda_max) || lambda_max < 0.0) {
    throw std::invalid_argument("graphical construction: lambda_max must be finite and >= 0");
  }
}

void GraphicalConstruction::replay(double horizon, const std::function<bool(const ClockEvent&)>& visit) const {
  DirectedEdges edges(g_);
  std::priority_queue<Ring, std::vector<Ring>, RingLater> queue;
  for (Vertex v = 0; v < g_.vertex_count(); ++v) {
    queue.push({clock_gap(seed_, kRecoveryTag, v, 0, 1.0), ClockEvent::Kind::recovery, v, 0});
  }
  if (lambda_max_ > 0.0) {
    for (std::uint32_t e = 0; e < edges.from.size(); ++e) {
      queue.push({clock_gap(seed_, kArrowTag, e, 0, lambda_max_), ClockEvent::Kind::infection, e, 0});
    }
  }
  while (!queue.empty() && queue.top().time <= horizon) {
    Ring r = queue.top();
    queue.pop();
    ClockEvent ev;
    ev.time = r.time;
    ev.kind = r.kind;
    const bool recovery = r.kind == ClockEvent::Kind::recovery;
    if (recovery) {
      ev.from = ev.to = r.id;
    } else {
      ev.from = edges.from[r.id];
      ev.to = edges.to[r.id];
      ev.mark = counter_uniform(seed_, kMarkTag, r.id, r.occurrence);
    }
    if (!visit(ev)) return;
    const std::uint64_t k = r.occurrence + 1;
    queue.push({r.time + clock_gap(seed_, recovery ? kRecoveryTag : kArrowTag, r.id, k, recovery ? 1.0 : lambda_max_),
                r.kind, r.id, k});
  }
}

std::vector<ClockEvent> GraphicalConstruction::record(double horizon) const {
  std::vector<ClockEvent> out;
  replay(horizon, [&](const ClockEvent& ev) {
    out.push_back(ev);
    return true;
  });
  return out;
}

namespace {

inline bool arrow_used(const ClockEvent& ev, double lambda, double lambda_max) {
  return lambda_max > 0.0 && ev.mark < lambda / lambda_max;
}

void check_rate(double lambda, double lambda_max) {
  if (!(lambda >= 0.0 && lambda <= lambda_max) && !(lambda == 0.0)) {
    throw std::invalid_argument("graphical construction: need 0 <= lambda <= lambda_max");
  }
}

std::vector<char> as_flags(std::size_t n, std::span<const Vertex> set, std::size_t& count) {
  std::vector<char> flags(n, 0);
  count = 0;
  for (Vertex v : set) {
    if (v >= n) throw std::invalid_argument("contact: vertex out of range");
    if (!flags[v]) ++count;
    flags[v] = 1;
  }
  return flags;
}

VertexSet from_flags(const std::vector<char>& flags) {
  VertexSet out;
  for (Vertex v = 0; v < flags.size(); ++v) {
    if (flags[v]) out.push_back(v);
  }
  return out;
}

}  // namespace

TauSample GraphicalConstruction::extinction(double lambda, std::span<const Vertex> initial, double t_cap) const {
  check_rate(lambda, lambda_max_);
  TauSample s;
  s.seed = seed_;
  s.fingerprint = g_.fingerprint();
  std::size_t count = 0;
  auto state = as_flags(g_.vertex_count(), initial, count);
  if (count == 0) return s;
  bool died = false;
  replay(t_cap, [&](const ClockEvent& ev) {
    if (ev.kind == ClockEvent::Kind::recovery) {
      if (state[ev.from]) {
        state[ev.from] = 0;
        if (--count == 0) {
          s.tau = ev.time;
          died = true;
          return false;
        }
      }
    } else if (state[ev.from] && !state[ev.to] && arrow_used(ev, lambda, lambda_max_)) {
      state[ev.to] = 1;
      ++count;
    }
    return true;
  });
  if (!died) {
    s.tau = t_cap;
    s.censored = true;
  }
  return s;
}

CoupledTrajectory simulate_coupled(const Graph& g, const ContactConfig& cfg, std::span<const Vertex> a,
                                   std::span<const Vertex> b) {
  cfg.validate();
  if (!cfg.t_cap) throw std::invalid_argument("simulate_coupled: t_cap is required");
  GraphicalConstruction gc(g, cfg.lambda, cfg.seed);
  CoupledTrajectory out;
  std::size_t na = 0, nb = 0;
  auto lower = as_flags(g.vertex_count(), a, na);
  auto upper = as_flags(g.vertex_count(), b, nb);
  out.nested = true;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (lower[v] && !upper[v]) out.nested = false;
  }
  out.points.push_back({0.0, na, nb});
  if (na == 0) out.tau_lower = 0.0;
  if (nb == 0) out.tau_upper = 0.0;
  if (na == 0 && nb == 0) return out;

  auto step = [&](std::vector<char>& st, std::size_t& n, const ClockEvent& ev) {
    if (ev.kind == ClockEvent::Kind::recovery) {
      if (st[ev.from]) {
        st[ev.from] = 0;
        --n;
        return true;
      }
    } else if (st[ev.from] && !st[ev.to] && arrow_used(ev, cfg.lambda, cfg.lambda)) {
      st[ev.to] = 1;
      ++n;
      return true;
    }
    return false;
  };
  gc.replay(*cfg.t_cap, [&](const ClockEvent& ev) {
    bool changed = step(lower, na, ev);
    changed |= step(upper, nb, ev);
    if (out.nested) {
      ++out.containment_checks;
      Vertex v = ev.kind == ClockEvent::Kind::recovery ? ev.from : ev.to;
      if (lower[v] && !upper[v]) {
        throw std::logic_error("simulate_coupled: containment violated at t=" + std::to_string(ev.time) +
                               " (seed " + std::to_string(cfg.seed) + ")");
      }
    }
    if (changed) out.points.push_back({ev.time, na, nb});
    if (na == 0 && !out.tau_lower) out.tau_lower = ev.time;
    if (nb == 0 && !out.tau_upper) out.tau_upper = ev.time;
    return na > 0 || nb > 0;
  });
  return out;
}

VertexSet forward_from_record(const Graph& g, std::span<const ClockEvent> events, double lambda,
                              double lambda_max, std::span<const Vertex> a, double t) {
  check_rate(lambda, lambda_max);
  std::size_t n = 0;
  auto st = as_flags(g.vertex_count(), a, n);
  for (const auto& ev : events) {
    if (ev.time > t) break;
    if (ev.kind == ClockEvent::Kind::recovery) {
      st[ev.from] = 0;
    } else if (st[ev.from] && arrow_used(ev, lambda, lambda_max)) {
      st[ev.to] = 1;
    }
  }
  return from_flags(st);
}

DualTrajectory dual_from_record(const Graph& g, std::span<const ClockEvent> events, double recorded_horizon,
                                double lambda, double lambda_max, std::span<const Vertex> target,
                                double window) {
  check_rate(lambda, lambda_max);
  if (window < 0.0) throw std::invalid_argument("dual: window must be >= 0");
  if (window > recorded_horizon) throw std::invalid_argument("dual: window exceeds the recorded stream");
  std::size_t n = 0;
  auto st = as_flags(g.vertex_count(), target, n);
  DualTrajectory out;
  out.window = window;
  out.points.push_back({0.0, from_flags(st)});
  auto end = std::upper_bound(events.begin(), events.end(), window,
                              [](double t, const ClockEvent& ev) { return t < ev.time; });
  for (auto it = std::make_reverse_iterator(end); it != events.rend(); ++it) {
    const ClockEvent& ev = *it;
    bool changed = false;
    if (ev.kind == ClockEvent::Kind::recovery) {
      changed = st[ev.from] != 0;
      st[ev.from] = 0;
    } else if (st[ev.to] && !st[ev.from] && arrow_used(ev, lambda, lambda_max)) {
      st[ev.from] = 1;
      changed = true;
    }
    if (changed) out.points.push_back({window - ev.time, from_flags(st)});
  }
  return out;
}

DualTrajectory simulate_dual(const Graph& g, const ContactConfig& cfg, Vertex target, double window) {
  cfg.validate();
  if (target >= g.vertex_count()) throw std::invalid_argument("simulate_dual: target vertex out of range");
  GraphicalConstruction gc(g, cfg.lambda, cfg.seed);
  auto events = gc.record(window);
  Vertex w[] = {target};
  return dual_from_record(g, events, window, cfg.lambda, cfg.lambda, w, window);
}

// ---------------------------------------------------------------------------
// Cliques

TauSample birth_death_clique_simulate(std::size_t m, double lambda, std::size_t initial, std::uint64_t seed,
                                      std::optional<double> t_cap) {
  if (m == 0) throw std::invalid_argument("birth_death_clique_simulate: m must be >= 1");
  if (initial > m) throw std::invalid_argument("birth_death_clique_simulate: initial exceeds m");
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("birth_death_clique_simulate: bad lambda");
  TauSample s;
  s.seed = seed;
  s.fingerprint = mix64(m);
  Rng rng(seed);
  const double cap = t_cap.value_or(kInf);
  double t = 0.0;
  std::size_t k = initial;
  while (k > 0) {
    const double down = static_cast<double>(k);
    const double up = lambda * down * static_cast<double>(m - k);
    const double total = up + down;
    const double dt = rng.exponential(total);
    if (t + dt > cap) {
      s.tau = cap;
      s.censored = true;
      return s;
    }
    t += dt;
    if (rng.uniform() * total < down) {
      --k;
    } else {
      ++k;
    }
  }
  s.tau = t;
  return s;
}

double log_exact_clique_extinction(std::size_t m, double lambda) {
  if (m == 0) throw std::invalid_argument("exact_clique_extinction: m must be >= 1");
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("exact_clique_extinction: bad lambda");
  // T_j: expected time from j to j-1; T_m = 1/m, T_j = 1/j + (lambda (m-j)) T_{j+1}
  const double log_lambda = lambda > 0.0 ? std::log(lambda) : -kInf;
  double log_t = -std::log(double(m));
  double log_sum = log_t;
  for (std::size_t j = m - 1; j >= 1; --j) {
    log_t = log_add_exp(-std::log(double(j)), log_lambda + std::log(double(m - j)) + log_t);
    log_sum = log_add_exp(log_sum, log_t);
  }
  return log_sum;
}

double exact_clique_extinction(std::size_t m, double lambda) {
  return checked_exp(log_exact_clique_extinction(m, lambda), "exact_clique_extinction");
}

double exact_expected_extinction_ctmc(const Graph& g, double lambda, std::size_t max_vertices) {
  if (max_vertices > 20) throw std::invalid_argument("exact_expected_extinction_ctmc: cap may not exceed 20");
  const std::size_t n = g.vertex_count();
  if (n > max_vertices) {
    throw BudgetExceeded("exact_expected_extinction_ctmc: " + std::to_string(n) + " vertices exceed cap " +
                              std::to_string(max_vertices));
  }
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("exact_expected_extinction_ctmc: bad lambda");
  if (n == 0) return 0.0;

  std::vector<std::uint32_t> nbr(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    for (Vertex w : g.neighbors(v)) nbr[v] |= 1u << w;
  }
  const std::size_t states = (std::size_t{1} << n) - 1;  // masks 1 .. 2^n - 1, row = mask - 1
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(states * (n + 1));
  for (std::uint32_t mask = 1; mask <= states; ++mask) {
    const auto row = static_cast<Eigen::Index>(mask - 1);
    double out = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const std::uint32_t bit = 1u << v;
      if (mask & bit) {
        out += 1.0;
        if (mask != bit) trips.emplace_back(row, Eigen::Index(mask ^ bit) - 1, 1.0);
      } else {
        double rate = lambda * std::popcount(nbr[v] & mask);
        if (rate > 0.0) {
          out += rate;
          trips.emplace_back(row, Eigen::Index(mask | bit) - 1, rate);
        }
      }
    }
    trips.emplace_back(row, row, -out);
  }
  Eigen::SparseMatrix<double> q(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  q.setFromTriplets(trips.begin(), trips.end());
  q.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(q);
  if (lu.info() != Eigen::Success) throw std::runtime_error("exact_expected_extinction_ctmc: factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(states), -1.0);
  Eigen::VectorXd h = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("exact_expected_extinction_ctmc: solve failed");
  return h[static_cast<Eigen::Index>(states - 1)];
}

// ---------------------------------------------------------------------------
// Lit snapshots

std::size_t LitSnapshot::lit_count() const {
  return static_cast<std::size_t>(std::count(lit.begin(), lit.end(), std::uint8_t{1}));
}

double default_lit_cadence(std::size_t clique_size, double lambda) {
  const double lm = lambda * double(clique_size);
  if (!(lm > 1.0)) throw std::invalid_argument("lit cadence: needs lambda * M > 1");
  return std::exp(double(clique_size) * std::log(lm) / 16.0);
}

std::vector<std::uint8_t> lit_flags(const CaterpillarLabels& labels, const ContactEngine& engine) {
  std::vector<std::uint8_t> flags(labels.spine.size(), 0);
  for (std::size_t i = 0; i < labels.cliques.size(); ++i) {
    std::size_t on = 0;
    for (Vertex v : labels.cliques[i]) on += engine.is_infected(v) ? 1 : 0;
    flags[i] = 4 * on >= labels.cliques[i].size() ? 1 : 0;
  }
  return flags;
}

std::vector<LitSnapshot> lit_snapshots(const Caterpillar& cat, const ContactConfig& cfg,
                                       std::optional<double> cadence,
                                       std::optional<std::span<const Vertex>> initial) {
  cfg.validate();
  const auto& labels = cat.labels;
  if (labels.spine.empty() || labels.cliques.size() != labels.spine.size()) {
    throw std::invalid_argument("lit_snapshots: graph carries no caterpillar labels");
  }
  const double step = cadence ? *cadence : default_lit_cadence(labels.clique_size(), cfg.lambda);
  if (!(step > 0.0)) throw std::invalid_argument("lit_snapshots: cadence must be positive");
  ContactEngine engine(cat.graph, cfg.lambda, cfg.seed);
  if (initial) {
    engine.reset(*initial);
  } else {
    engine.reset_full();
  }
  const double cap = cfg.t_cap.value_or(kInf);
  std::vector<LitSnapshot> out;
  for (std::size_t k = 0;; ++k) {
    const double t = double(k) * step;
    if (t > cap) break;
    if (engine.advance(t)) break;  // died before t
    out.push_back({t, lit_flags(labels, engine)});
  }
  return out;
}

void write_tau_samples(std::ostream& out, std::span<const TauSample> samples) {
  out << "seed,tau,censored\n";
  char buf[64];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%" PRIu64 ",%.17g,%d\n", s.seed, s.tau, s.censored ? 1 : 0);
    out << buf;
  }
}

}  // namespace cprgg
