#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cprgg/graph.hpp"
#include "cprgg/random.hpp"

namespace cprgg {

/// Infection rate per directed edge; recovery rate is 1.
struct ContactConfig {
  double lambda = 1.0;
  std::optional<double> t_cap;  // censoring horizon; none = run to extinction
  std::uint64_t seed = 0;

  /// lambda must be finite and >= 0 (0 is accepted for degenerate checks);
  /// t_cap, when set, must be positive.
  void validate() const;
};

using VertexSet = std::vector<Vertex>;

struct InfectionState {
  VertexSet infected;  // ascending
  /// lambda * sum over healthy v of (# infected neighbours of v)
  double infected_degree_sum = 0.0;
  double time = 0.0;
};

struct TauSample {
  double tau = 0.0;
  bool censored = false;  // censored => tau == t_cap
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;
};

/// Next-event simulator. Events are drawn with total rate
/// |infected| + lambda * W, W = sum of infected-neighbour counts over
/// healthy vertices; infections pick the target from a Fenwick tree over
/// those counts.
class ContactEngine {
 public:
  ContactEngine(const Graph& g, double lambda, std::uint64_t seed);
  ContactEngine(Graph&&, double, std::uint64_t) = delete;

  /// Resets to time 0 with the given infected set (duplicates ignored).
  void reset(std::span<const Vertex> initial);
  void reset_full();

  /// Processes events up to time `until`. Returns true if the process went
  /// extinct, in which case time() is the extinction time; otherwise
  /// time() == until and the pending event is kept, so splitting a run
  /// into several calls does not change the path.
  bool advance(double until);

  double time() const { return time_; }
  std::size_t infected_count() const { return infected_.size(); }
  bool is_infected(Vertex v) const { return slot_[v] != kHealthy; }
  std::uint64_t events() const { return events_; }
  /// Infected neighbour count of v.
  std::uint32_t pressure(Vertex v) const { return pressure_[v]; }
  InfectionState state() const;

  /// Recomputes pressures and the rate sum from scratch and compares;
  /// throws std::logic_error on mismatch. Runs automatically every
  /// `audit_interval` events.
  void audit() const;
  static constexpr std::uint64_t audit_interval = 1'000'000;

 private:
  static constexpr std::uint32_t kHealthy = 0xffffffffu;

  void infect(Vertex v);
  void recover(Vertex v);
  void fenwick_add(Vertex v, std::int64_t delta);
  Vertex fenwick_find(std::uint64_t target) const;

  const Graph& g_;
  double lambda_;
  Rng rng_;
  double time_ = 0.0;
  double next_ = -1.0;  // time of the drawn next event, negative if none
  std::uint64_t events_ = 0;
  std::vector<Vertex> infected_;       // unordered, O(1) pick / removal
  std::vector<std::uint32_t> slot_;    // position in infected_ or kHealthy
  std::vector<std::uint32_t> pressure_;
  std::vector<std::int64_t> tree_;     // Fenwick over healthy pressures
  std::uint64_t weight_ = 0;           // W
  std::size_t top_bit_ = 0;
};

/// tau = inf{t : xi_t empty} from `initial` (all of V when omitted).
/// An empty graph or empty start gives tau 0, uncensored.
TauSample simulate_extinction(const Graph& g, const ContactConfig& cfg,
                              std::optional<std::span<const Vertex>> initial = std::nullopt);

// ---------------------------------------------------------------------------
// Graphical construction

/// Clock event of the graphical construction. Recovery marks come first at
/// equal times.
struct ClockEvent {
  enum class Kind : std::uint8_t { recovery = 0, infection = 1 };
  double time = 0.0;
  Kind kind = Kind::recovery;
  Vertex from = 0;  // recovering vertex, or infection source
  Vertex to = 0;    // infection target (== from for recoveries)
  double mark = 0.0;  // thinning uniform for infection arrows
};

/// Lazily generated Harris construction: a rate-1 recovery clock per
/// vertex and a rate-lambda_max arrow clock per directed edge. The k-th
/// ring of each clock is drawn from the counter-based stream keyed by
/// (seed, object id, k), so the field does not depend on how far it is
/// consumed. An arrow with mark u is used at rate lambda iff
/// u < lambda / lambda_max, which makes runs monotone in lambda.
class GraphicalConstruction {
 public:
  GraphicalConstruction(const Graph& g, double lambda_max, std::uint64_t seed);

  const Graph& graph() const { return g_; }
  double lambda_max() const { return lambda_max_; }
  std::uint64_t seed() const { return seed_; }

  /// All events with time <= horizon, in processing order.
  std::vector<ClockEvent> record(double horizon) const;

  /// Extinction time at rate lambda <= lambda_max from `initial`, censored
  /// at t_cap.
  TauSample extinction(double lambda, std::span<const Vertex> initial, double t_cap) const;

  /// Visits events with time <= horizon in order until `visit` returns
  /// false.
  void replay(double horizon, const std::function<bool(const ClockEvent&)>& visit) const;

 private:
  const Graph& g_;
  double lambda_max_;
  std::uint64_t seed_;
};

struct CoupledPoint {
  double time = 0.0;
  std::size_t lower = 0;  // |xi^A|
  std::size_t upper = 0;  // |xi^B|
};

struct CoupledTrajectory {
  std::vector<CoupledPoint> points;  // after every state-changing event
  std::optional<double> tau_lower, tau_upper;
  std::uint64_t containment_checks = 0;
  bool nested = false;  // A subset of B, so containment was asserted
};

/// Runs xi^A and xi^B on one graphical construction until both die or
/// t_cap (required). When A is a subset of B, xi^A_t subset of xi^B_t is
/// checked after every event and a violation throws std::logic_error.
CoupledTrajectory simulate_coupled(const Graph& g, const ContactConfig& cfg, std::span<const Vertex> a,
                                   std::span<const Vertex> b);

/// Forward process over a recorded stream: xi^A at time t.
VertexSet forward_from_record(const Graph& g, std::span<const ClockEvent> events, double lambda,
                              double lambda_max, std::span<const Vertex> a, double t);

struct DualPoint {
  double s = 0.0;  // reversed time
  VertexSet set;
};

struct DualTrajectory {
  double window = 0.0;
  std::vector<DualPoint> points;  // s = 0 first, then after each change
  const VertexSet& final_set() const { return points.back().set; }
};

/// Dual xi-hat^{B,t}_s, s in [0, t], by reverse processing of a recorded
/// stream. `recorded_horizon` is the horizon the stream was recorded to;
/// a window beyond it throws std::invalid_argument.
DualTrajectory dual_from_record(const Graph& g, std::span<const ClockEvent> events, double recorded_horizon,
                                double lambda, double lambda_max, std::span<const Vertex> target,
                                double window);

/// Records the construction over [0, window] and runs the dual from
/// {target}.
DualTrajectory simulate_dual(const Graph& g, const ContactConfig& cfg, Vertex target, double window);

// ---------------------------------------------------------------------------
// Cliques

/// Extinction of the infected count on K_m (up-rate lambda k (m-k),
/// down-rate k), from `initial` infected.
TauSample birth_death_clique_simulate(std::size_t m, double lambda, std::size_t initial, std::uint64_t seed,
                                      std::optional<double> t_cap = std::nullopt);

/// ln E[tau] on K_m from full occupancy, exact.
double log_exact_clique_extinction(std::size_t m, double lambda);
/// exp of the above; throws std::domain_error if it overflows a double.
double exact_clique_extinction(std::size_t m, double lambda);

/// E[tau] from full occupancy by solving Q_TT h = -1 over the
/// 2^|V| - 1 transient states. Refuses graphs above `max_vertices`
/// (which itself may not exceed 20).
double exact_expected_extinction_ctmc(const Graph& g, double lambda, std::size_t max_vertices = 12);

// ---------------------------------------------------------------------------
// Lit spine vertices on caterpillars

struct LitSnapshot {
  double time = 0.0;
  std::vector<std::uint8_t> lit;  // per spine vertex
  std::size_t lit_count() const;
};

/// Default snapshot cadence exp(M ln(lambda M) / 16); needs lambda M > 1.
double default_lit_cadence(std::size_t clique_size, double lambda);

/// Spine vertex i is lit when at least M/4 of C(x_i) are infected.
std::vector<std::uint8_t> lit_flags(const CaterpillarLabels& labels, const ContactEngine& engine);

/// Snapshots at 0, T, 2T, ... while the process is alive and within t_cap.
/// Rejects a caterpillar without labels.
std::vector<LitSnapshot> lit_snapshots(const Caterpillar& cat, const ContactConfig& cfg,
                                       std::optional<double> cadence = std::nullopt,
                                       std::optional<std::span<const Vertex>> initial = std::nullopt);

/// CSV: seed,tau,censored
void write_tau_samples(std::ostream& out, std::span<const TauSample> samples);

}  // namespace cprgg
