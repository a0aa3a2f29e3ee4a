#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treespike/arena.hpp"
#include "treespike/config.hpp"
#include "treespike/topology.hpp"

namespace treespike {

enum class EngineKind { gillespie, graphical };
enum class EventKind { spike, leak };

enum class StopReason {
  horizon,             // ran to T
  extinct,             // absorbed in the empty configuration
  certified_survival,  // survival to T certified up to SimParams::certify_eps
  max_events,
  max_support,
};

std::string to_string(EngineKind e);
std::string to_string(EventKind e);
std::string to_string(StopReason r);
EngineKind parse_engine(const std::string& s);

struct SafetyCaps {
  std::uint64_t max_events = 1'000'000'000;
  std::uint64_t max_support = 10'000'000;
};

/// Deletes potential that reaches levels above `max_level` and accumulates,
/// per window [a, b], an upper bound on the expected number of root spikes
/// inside the window that the deletion can suppress. The pruned process is a
/// pathwise lower bound of the full one, so for the local proxy
///   p_pruned <= p <= p_pruned + E[budget].
struct LevelPruning {
  int max_level = 12;
  std::vector<std::pair<double, double>> windows;
};

struct SimParams {
  TreeSpec spec;
  double gamma = 0.0;
  double horizon = 1.0;
  EngineKind engine = EngineKind::gillespie;
  Mode mode;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  SafetyCaps caps;

  /// Sample times, sorted, in [0, horizon]. Empty means {horizon}.
  std::vector<double> grid;
  /// When > 0, samples also carry nu_rho of the configuration.
  double rho = 0.0;
  bool record_events = false;

  /// When > 0, stop as soon as some level holds enough active neurons that the
  /// embedded branching processes keep the run alive at T except with
  /// probability <= certify_eps.
  double certify_eps = 0.0;
  std::optional<LevelPruning> pruning;

  /// Throws std::invalid_argument with a readable message.
  void validate() const;
  std::vector<double> effective_grid() const;
};

struct Sample {
  double t = 0.0;
  std::uint64_t total_potential = 0;
  std::uint64_t active_count = 0;
  std::uint64_t root_potential = 0;
  std::uint64_t root_spikes = 0;  // cumulative, spikes at the root in (0, t]
  double nu = 0.0;                // nu_rho when requested
};

struct EventRecord {
  double time = 0.0;
  NeuronId neuron;
  EventKind kind = EventKind::spike;
};

struct Trajectory {
  /// One sample per grid time up to the stopping time. Runs that go extinct
  /// are filled to the end of the grid (the empty state is absorbing); runs
  /// stopped for any other reason only carry samples at times <= end_time.
  std::vector<Sample> samples;
  std::vector<EventRecord> events;
  StopReason reason = StopReason::horizon;
  bool terminated_early = false;  // safety cap hit
  double end_time = 0.0;
  std::uint64_t event_count = 0;
  std::uint64_t final_total = 0;
  std::uint64_t final_active = 0;
  std::uint64_t root_spikes = 0;
  std::vector<double> root_spike_times;
  std::vector<double> prune_budget;  // one per pruning window
  std::uint64_t pruned_units = 0;
  double certify_error = 0.0;        // bound on P(extinction after certification)

  bool alive_at_end() const { return reason != StopReason::extinct; }
  /// Global proxy: potential present at the horizon (certified runs count as alive).
  bool survives() const { return reason == StopReason::horizon || reason == StopReason::certified_survival; }
  std::uint64_t root_spikes_in(double t0, double t1) const;
};

/// Read-only view handed to observers after each event.
class StateView {
 public:
  virtual ~StateView() = default;
  virtual std::uint64_t total_potential() const = 0;
  virtual std::uint64_t active_count() const = 0;
  virtual std::uint64_t potential(Vertex v) const = 0;
  virtual int level(Vertex v) const = 0;
  /// Calls fn(vertex, level, potential) for every active vertex.
  template <class Fn>
  void for_each(Fn&& fn) const {
    for (Vertex v : active_vertices()) fn(v, level(v), potential(v));
  }
  virtual std::vector<Vertex> active_vertices() const = 0;
};

struct EventView {
  double time = 0.0;
  Vertex vertex = 0;
  int level = 0;
  EventKind kind = EventKind::spike;
  std::uint64_t potential_before = 0;
  std::uint64_t total_before = 0;
};

class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_event(const EventView& ev, const StateView& state) = 0;
};

/// Exact simulation on T_d from `initial` (default e_o).
Trajectory run(const SimParams& params, const PotentialConfig& initial = PotentialConfig::single_root(),
               Observer* observer = nullptr);

/// Exact simulation on a small finite graph; `initial[i]` is the potential of vertex i.
/// Level-based features (rho, pruning, certification) are not available here.
Trajectory run_on_graph(const FiniteGraph& graph, const SimParams& params, const std::vector<std::uint32_t>& initial,
                        Observer* observer = nullptr);

/// Per-replicate number of root spikes inside [t0, T], replicates 0..n_runs-1 of params.seed.
struct CensusResult {
  std::vector<std::uint64_t> counts;
  std::uint64_t flagged_runs = 0;  // safety-capped before T; counts are partial
  double mean = 0.0;
  double fraction_positive = 0.0;
};
CensusResult run_root_spike_census(const SimParams& params, const PotentialConfig& initial, double t0,
                                   std::size_t n_runs);

}  // namespace treespike
