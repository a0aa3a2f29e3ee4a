#pragma once

#include <vector>

#include "detail/multi_leg.hpp"
#include "treespike/rng.hpp"

namespace treespike::detail {

/// Direct-method version of the shared-mark construction. Only marks that
/// can change some leg matter: spike marks of family f at vertices where a
/// leg of that family is active, and leak marks k <= max_j potential_j(v).
/// By memorylessness the next such mark is found by racing their total rate,
/// which gives the same joint law as the per-vertex clocks at a fraction of
/// the cost. Draws come from one stream per replicate.
template <class Arena>
class DirectEngine : public MultiLegCore<Arena> {
  using Core = MultiLegCore<Arena>;

 public:
  DirectEngine(Arena& arena, const SimParams& p, double clock_gamma, std::vector<LegSpec> legs,
               std::vector<DominationCheck> checks)
      : Core(arena, p, std::move(legs), std::move(checks)),
        clock_gamma_(clock_gamma),
        draws_(rng::replicate_key(p.seed, p.replicate), rng::clock_stream(0, rng::ClockKind::gillespie, 1)) {}

  MultiRun run() {
    for (Vertex v : this->initial_) refresh(v);
    for (std::size_t j = 0; j < this->legs_.size(); ++j) this->check_leg_status(j, 0.0);

    std::vector<Vertex> touched;
    double t = 0.0;
    while (!this->all_done()) {
      const double a0 = static_cast<double>(spike_env_[0].active());
      const double a1 = static_cast<double>(spike_env_[1].active());
      const double leak = clock_gamma_ * static_cast<double>(leak_env_.total());
      const double rate = a0 + a1 + leak;
      if (rate <= 0.0) break;
      const double t_next = t + draws_.exponential(rate);
      this->emit_samples_before(t_next);
      if (t_next > this->p_.horizon) break;
      if (this->mark_count_ >= this->p_.caps.max_events) {
        this->stop_all(StopReason::max_events, t, true);
        break;
      }
      t = t_next;
      ++this->mark_count_;

      const double u = draws_.uniform() * rate;
      EventKind kind;
      if (u < a0 + a1) {
        const std::uint32_t salt = u < a0 ? 0 : 1;
        const Vertex v = spike_env_[salt].pick_active(draws_.uniform());
        touched.assign(1, v);
        this->apply_spike(v, salt, t, touched);
        kind = EventKind::spike;
      } else {
        std::uint32_t k = 0;
        const Vertex v = leak_env_.pick_unit(draws_.uniform(), k);
        touched.assign(1, v);
        this->apply_leak(v, k, [&] { return draws_.uniform(); }, t);
        kind = EventKind::leak;
      }
      this->check(touched, t, kind);
      for (Vertex v : touched) refresh(v);
      for (std::size_t j = 0; j < this->legs_.size(); ++j) this->check_leg_status(j, t);
    }
    this->stop_all(StopReason::horizon, this->p_.horizon, false);
    return this->collect();
  }

 private:
  void on_grow(std::size_t n) override {
    leak_env_.ensure(n);
    spike_env_[0].ensure(n);
    spike_env_[1].ensure(n);
  }

  void on_finish(std::size_t j) override {
    for (Vertex v : this->legs_[j].active_vertices()) refresh(v);
  }

  void refresh(Vertex v) {
    std::uint32_t top = 0;
    std::uint32_t active[2] = {0, 0};
    for (std::size_t j = 0; j < this->legs_.size(); ++j) {
      if (this->done_[j]) continue;
      const std::uint32_t pot = this->legs_[j].get(v);
      if (pot == 0) continue;
      top = std::max(top, pot);
      active[this->specs_[j].spike_salt] = 1;
    }
    const int lv = this->arena_.level(v);
    leak_env_.set(v, top, lv);
    spike_env_[0].set(v, active[0], lv);
    spike_env_[1].set(v, active[1], lv);
  }

  double clock_gamma_;
  rng::StreamRng draws_;
  LegState leak_env_;
  LegState spike_env_[2];
};

}  // namespace treespike::detail
