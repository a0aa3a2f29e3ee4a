#pragma once

#include <array>
#include <queue>
#include <vector>

#include "detail/multi_leg.hpp"
#include "treespike/rng.hpp"

namespace treespike::detail {

/// Graphical-representation engine. Every vertex owns a rate-1 spike clock
/// and leak clocks k = 1, 2, ... of rate `clock_gamma`; arrivals are realized
/// by random-access Poisson clocks keyed on the vertex hash, so all legs see
/// the same marks and every draw is a function of (seed, replicate, vertex,
/// clock kind, k). Each vertex keeps one heap entry holding its earliest
/// relevant arrival; entries are invalidated by a per-vertex version.
template <class Arena>
class GraphicalEngine : public MultiLegCore<Arena> {
  using Core = MultiLegCore<Arena>;

 public:
  GraphicalEngine(Arena& arena, const SimParams& p, double clock_gamma, std::vector<LegSpec> legs,
                  std::vector<DominationCheck> checks)
      : Core(arena, p, std::move(legs), std::move(checks)),
        clock_gamma_(clock_gamma),
        key_(rng::replicate_key(p.seed, p.replicate)),
        heap_(Later{&arena}) {}

  MultiRun run() {
    for (Vertex v : this->initial_) schedule(v, 0.0);
    for (std::size_t j = 0; j < this->legs_.size(); ++j) this->check_leg_status(j, 0.0);

    std::vector<Vertex> touched;
    while (!this->all_done() && !heap_.empty()) {
      const Entry top = heap_.top();
      const auto& s = sched_[static_cast<std::size_t>(top.v)];
      if (s.version != top.version) {
        heap_.pop();
        continue;
      }
      const double t = top.time;
      if (t > this->p_.horizon) break;
      heap_.pop();
      this->emit_samples_before(t);
      if (this->mark_count_ >= this->p_.caps.max_events) {
        this->stop_all(StopReason::max_events, now_, true);
        break;
      }
      now_ = t;
      ++this->mark_count_;
      touched.assign(1, top.v);
      const Pending ev = s.pending;
      if (ev.is_spike) {
        this->apply_spike(top.v, ev.salt, t, touched);
      } else {
        auto accept = [&] {
          return rng::arrival_uniform(key_, rng::clock_stream(this->arena_.hash(top.v), rng::ClockKind::accept, ev.k),
                                      ev.arrival);
        };
        this->apply_leak(top.v, ev.k, accept, t);
      }
      this->check(touched, t, ev.is_spike ? EventKind::spike : EventKind::leak);
      for (Vertex v : touched) schedule(v, t);
      for (std::size_t j = 0; j < this->legs_.size(); ++j) this->check_leg_status(j, t);
    }
    this->stop_all(StopReason::horizon, this->p_.horizon, false);
    return this->collect();
  }

 private:
  struct Pending {
    bool is_spike = true;
    std::uint32_t salt = 0;
    std::uint32_t k = 0;
    rng::Arrival arrival;
  };
  struct Sched {
    std::uint32_t version = 0;
    std::array<rng::Arrival, 2> spike{rng::Arrival{-INFINITY}, rng::Arrival{-INFINITY}};
    std::vector<rng::Arrival> leak;
    Pending pending;
  };
  struct Entry {
    double time;
    Vertex v;
    std::uint32_t version;
  };
  struct Later {
    const Arena* arena;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time != b.time) return a.time > b.time;
      return arena->precedes(b.v, a.v);
    }
  };

  void on_grow(std::size_t n) override {
    if (sched_.size() < n) sched_.resize(n);
  }

  rng::Arrival refresh(rng::Arrival& cached, std::uint64_t stream, double rate, double t) {
    if (!(cached.time > t)) cached = rng::PoissonClock(key_, stream, rate).next_after(t);
    return cached;
  }

  void schedule(Vertex v, double t) {
    this->grow();
    auto& s = sched_[static_cast<std::size_t>(v)];
    ++s.version;
    std::uint32_t max_k = 0;
    bool salt_used[2] = {false, false};
    for (std::size_t j = 0; j < this->legs_.size(); ++j) {
      if (this->done_[j]) continue;
      const std::uint32_t pot = this->legs_[j].get(v);
      if (pot == 0) continue;
      salt_used[this->specs_[j].spike_salt] = true;
      max_k = std::max(max_k, pot);
    }
    Pending best;
    double best_time = INFINITY;
    const std::uint64_t h = this->arena_.hash(v);
    for (std::uint32_t salt = 0; salt < 2; ++salt) {
      if (!salt_used[salt]) continue;
      auto a = refresh(s.spike[salt], rng::clock_stream(h, rng::ClockKind::spike, 0, salt), 1.0, t);
      if (a.time < best_time) {
        best_time = a.time;
        best = {true, salt, 0, a};
      }
    }
    if (clock_gamma_ > 0.0) {
      if (s.leak.size() < max_k) s.leak.resize(max_k, rng::Arrival{-INFINITY});
      for (std::uint32_t k = 1; k <= max_k; ++k) {
        auto a = refresh(s.leak[k - 1], rng::clock_stream(h, rng::ClockKind::leak, k), clock_gamma_, t);
        if (a.time < best_time) {  // strict: spikes win exact ties, then lower k
          best_time = a.time;
          best = {false, 0, k, a};
        }
      }
    }
    if (best_time < INFINITY) {
      s.pending = best;
      heap_.push({best_time, v, s.version});
    }
  }

  double clock_gamma_;
  rng::Key key_;
  std::vector<Sched> sched_;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  double now_ = 0.0;
};

}  // namespace treespike::detail
