#pragma once

#include <algorithm>
#include <optional>
#include <tuple>
#include <vector>

#include "detail/common.hpp"

namespace treespike::detail {

/// One process driven by the shared marks of a coupled run.
struct LegSpec {
  Mode mode;
  double accept = 1.0;           // chance that a leak mark applies to this leg
  std::uint32_t spike_salt = 0;  // 0 = shared spike marks; 1 = an independent family
  bool zeta = false;             // tree-embedded branching process (children only, no reactivation)
  double certify_eps = 0.0;
  double leg_gamma = 0.0;        // effective leak rate, for the certificate
};

/// Pathwise requirement potential(high) <= potential(low) at every vertex.
struct DominationCheck {
  int low = 0;
  int high = 1;
};

struct MultiRun {
  std::vector<Trajectory> legs;
  std::uint64_t violations = 0;
  std::optional<EventRecord> first_violation;
  std::vector<std::uint64_t> violations_at_sample;  // cumulative, per grid time
  std::uint64_t zeta_reactivations = 0;             // blocked attempts, for diagnostics
};

/// State and event rules shared by the engines that run several legs on one
/// set of marks. The engines only decide which mark comes next.
template <class Arena>
class MultiLegCore {
 public:
  MultiLegCore(Arena& arena, const SimParams& p, std::vector<LegSpec> legs, std::vector<DominationCheck> checks)
      : arena_(arena), p_(p), specs_(std::move(legs)), checks_(std::move(checks)), grid_(p.effective_grid()) {
    const std::size_t n = specs_.size();
    legs_.resize(n);
    out_.legs.resize(n);
    done_.assign(n, false);
    for (std::size_t j = 0; j < n; ++j) {
      cursors_.emplace_back(grid_);
      certs_.push_back(specs_[j].certify_eps > 0.0 && !specs_[j].zeta
                           ? make_certificate(p.spec, specs_[j].leg_gamma, specs_[j].certify_eps, p.horizon)
                           : Certificate{});
      if (certs_.back().threshold) legs_[j].track_levels(certs_.back().threshold);
    }
  }

  void set_initial(int leg, Vertex v, std::uint32_t pot) {
    const auto j = static_cast<std::size_t>(leg);
    grow();
    legs_[j].set(v, std::min(pot, limit(j)), arena_.level(v));
    if (specs_[j].zeta) zeta_seen(v) = 1;
    initial_.push_back(v);
  }

  void set_observer(Observer* obs) { observer_ = obs; }

 protected:
  std::uint32_t limit(std::size_t j) const { return specs_[j].zeta ? 1u : specs_[j].mode.limit(); }

  void grow() {
    const std::size_t n = arena_.size();
    for (auto& l : legs_) l.ensure(n);
    if (zeta_seen_.size() < n) zeta_seen_.resize(n, 0);
    on_grow(n);
  }
  virtual void on_grow(std::size_t) {}
  virtual ~MultiLegCore() = default;

  std::uint8_t& zeta_seen(Vertex v) { return zeta_seen_[static_cast<std::size_t>(v)]; }

  bool all_done() const {
    return std::all_of(done_.begin(), done_.end(), [](bool b) { return b; });
  }

  /// Spike mark of family `salt` at v; appends every vertex whose potential may have changed.
  void apply_spike(Vertex v, std::uint32_t salt, double t, std::vector<Vertex>& touched) {
    const int lv = arena_.level(v);
    bool neighbors_loaded = false;
    for (std::size_t j = 0; j < legs_.size(); ++j) {
      if (done_[j] || specs_[j].spike_salt != salt) continue;
      auto& leg = legs_[j];
      const std::uint32_t before = leg.get(v);
      if (before == 0) continue;
      const std::uint64_t total_before = leg.total();
      note_event(j, t, v, EventKind::spike);
      leg.set(v, 0, lv);
      if (v == arena_.root()) {
        ++out_.legs[j].root_spikes;
        out_.legs[j].root_spike_times.push_back(t);
      }
      if (specs_[j].zeta) {
        auto ch = arena_.children(v);
        edges_.assign(ch.begin(), ch.end());
        neighbors_loaded = false;
        grow();
        for (const Edge& e : edges_) {
          if (zeta_seen(e.to)) {
            ++out_.zeta_reactivations;
            continue;
          }
          zeta_seen(e.to) = 1;
          leg.set(e.to, 1, lv + 1);
          touched.push_back(e.to);
        }
        continue;
      }
      if (!neighbors_loaded) {
        auto nb = arena_.neighbors(v);
        edges_.assign(nb.begin(), nb.end());
        grow();
        neighbors_loaded = true;
      }
      const std::uint32_t cap = limit(j);
      for (const Edge& e : edges_) {
        if (e.weight == 0) continue;
        const std::uint64_t sum = static_cast<std::uint64_t>(leg.get(e.to)) + e.weight;
        leg.set(e.to, static_cast<std::uint32_t>(std::min<std::uint64_t>(cap, sum)), arena_.level(e.to));
        touched.push_back(e.to);
      }
      if (observer_ && j == 0) emit_observer({t, v, lv, EventKind::spike, before, total_before});
    }
    std::sort(touched.begin() + 1, touched.end());
    touched.erase(std::unique(touched.begin() + 1, touched.end()), touched.end());
  }

  /// Leak mark k at v. `acceptance()` supplies the mark's uniform on first use.
  template <class Uniform>
  void apply_leak(Vertex v, std::uint32_t k, Uniform&& acceptance, double t) {
    const int lv = arena_.level(v);
    std::optional<double> u;
    for (std::size_t j = 0; j < legs_.size(); ++j) {
      if (done_[j]) continue;
      auto& leg = legs_[j];
      const std::uint32_t before = leg.get(v);
      if (before < k) continue;
      if (specs_[j].accept < 1.0) {
        if (!u) u = acceptance();
        if (!(*u < specs_[j].accept)) continue;
      }
      note_event(j, t, v, EventKind::leak);
      const std::uint64_t total_before = leg.total();
      leg.set(v, before - 1, lv);
      if (observer_ && j == 0) emit_observer({t, v, lv, EventKind::leak, before, total_before});
    }
  }

  void check(const std::vector<Vertex>& touched, double t, EventKind kind) {
    for (const auto& c : checks_) {
      const auto lo = static_cast<std::size_t>(c.low), hi = static_cast<std::size_t>(c.high);
      if (done_[lo] || done_[hi]) continue;
      bool bad = false;
      Vertex where = touched.front();
      for (Vertex x : touched) {
        if (legs_[hi].get(x) > legs_[lo].get(x)) {
          bad = true;
          where = x;
          break;
        }
      }
      // Population counts: a zeta leg is compared by active neurons, the rest by total potential.
      const auto size = [&](std::size_t j) { return specs_[j].zeta ? legs_[j].active() : legs_[j].total(); };
      if (size(hi) > size(lo)) bad = true;
      if (bad) {
        ++out_.violations;
        violation_times_.push_back(t);
        if (!out_.first_violation) out_.first_violation = EventRecord{t, arena_.id(where), kind};
      }
    }
  }

  void check_leg_status(std::size_t j, double t) {
    if (done_[j]) return;
    auto& leg = legs_[j];
    if (leg.active() == 0)
      finish(j, StopReason::extinct, t, false);
    else if (leg.reached_threshold()) {
      out_.legs[j].certify_error = certs_[j].error;
      finish(j, StopReason::certified_survival, t, false);
    } else if (leg.active() > p_.caps.max_support)
      finish(j, StopReason::max_support, t, true);
  }

  void finish(std::size_t j, StopReason reason, double t, bool flagged) {
    auto& tr = out_.legs[j];
    tr.reason = reason;
    tr.terminated_early = flagged;
    tr.end_time = t;
    tr.final_total = legs_[j].total();
    tr.final_active = legs_[j].active();
    if (reason == StopReason::extinct || reason == StopReason::horizon)
      cursors_[j].emit_rest(legs_[j], arena_, arena_.root(), tr.root_spikes, p_.rho, tr);
    done_[j] = true;
    on_finish(j);
  }
  virtual void on_finish(std::size_t) {}

  void emit_samples_before(double t) {
    for (std::size_t j = 0; j < legs_.size(); ++j)
      if (!done_[j])
        cursors_[j].emit_before(t, legs_[j], arena_, arena_.root(), out_.legs[j].root_spikes, p_.rho, out_.legs[j]);
  }

  void stop_all(StopReason reason, double t, bool flagged) {
    for (std::size_t j = 0; j < legs_.size(); ++j)
      if (!done_[j]) finish(j, reason, t, flagged);
  }

  MultiRun collect() {
    out_.violations_at_sample.resize(grid_.size());
    std::size_t vi = 0;
    for (std::size_t g = 0; g < grid_.size(); ++g) {
      while (vi < violation_times_.size() && violation_times_[vi] <= grid_[g]) ++vi;
      out_.violations_at_sample[g] = vi;
    }
    for (std::size_t j = 0; j < legs_.size(); ++j) {
      auto& tr = out_.legs[j];
      tr.event_count = leg_events_.empty() ? 0 : leg_events_[j];
      tr.events.reserve(logs_.size());
      for (auto [time, leg, v, kind] : logs_)
        if (leg == j) tr.events.push_back({time, arena_.id(v), kind});
    }
    return std::move(out_);
  }

  Arena& arena_;
  const SimParams& p_;
  std::vector<LegSpec> specs_;
  std::vector<DominationCheck> checks_;
  std::vector<double> grid_;

  std::vector<LegState> legs_;
  std::vector<SampleCursor> cursors_;
  std::vector<Certificate> certs_;
  std::vector<bool> done_;
  std::vector<Vertex> initial_;
  std::uint64_t mark_count_ = 0;  // marks processed, for the max_events cap

 private:
  void note_event(std::size_t j, double t, Vertex v, EventKind kind) {
    if (leg_events_.empty()) leg_events_.assign(legs_.size(), 0);
    ++leg_events_[j];
    if (p_.record_events) logs_.emplace_back(t, j, v, kind);
  }

  void emit_observer(const EventView& ev) {
    LegView<Arena> view(legs_[0], arena_);
    observer_->on_event(ev, view);
  }

  std::vector<std::uint8_t> zeta_seen_;
  std::vector<Edge> edges_;
  std::vector<std::tuple<double, std::size_t, Vertex, EventKind>> logs_;
  std::vector<std::uint64_t> leg_events_;
  std::vector<double> violation_times_;
  Observer* observer_ = nullptr;
  MultiRun out_;
};

}  // namespace treespike::detail
