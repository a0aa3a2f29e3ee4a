#pragma once

#include <algorithm>
#include <tuple>
#include <utility>
#include <vector>

#include "detail/common.hpp"
#include "treespike/rng.hpp"

namespace treespike::detail {

/// Direct-method simulation: the next event comes after Exponential(A + gamma P);
/// it is a spike at a uniform active neuron with probability A / (A + gamma P),
/// otherwise a leak at a neuron drawn proportionally to its potential.
template <class Arena>
Trajectory run_gillespie(Arena& arena, const SimParams& p, const std::vector<std::pair<Vertex, std::uint32_t>>& initial,
                         Observer* observer, const Certificate& cert, const PruneBudget* budget) {
  Trajectory out;
  LegState leg;
  leg.ensure(arena.size());
  if (cert.threshold) leg.track_levels(cert.threshold);
  for (auto [v, pot] : initial) leg.set(v, std::min(pot, p.mode.limit()), arena.level(v));

  const Vertex root = arena.root();
  const std::uint32_t limit = p.mode.limit();
  const int prune_above = p.pruning ? p.pruning->max_level : INT32_MAX;
  if (budget) out.prune_budget.assign(budget->windows(), 0.0);

  rng::StreamRng draws(rng::replicate_key(p.seed, p.replicate), rng::clock_stream(0, rng::ClockKind::gillespie, 0));
  SampleCursor cursor(p.effective_grid());
  LegView<Arena> view(leg, arena);
  std::vector<std::tuple<double, Vertex, EventKind>> log;

  double t = 0.0;
  for (;;) {
    if (leg.active() == 0) {
      out.reason = StopReason::extinct;
      out.end_time = t;
      cursor.emit_rest(leg, arena, root, out.root_spikes, p.rho, out);
      break;
    }
    if (leg.reached_threshold()) {
      out.reason = StopReason::certified_survival;
      out.certify_error = cert.error;
      out.end_time = t;
      break;
    }
    const double spike_rate = static_cast<double>(leg.active());
    const double total_rate = spike_rate + p.gamma * static_cast<double>(leg.total());
    const double t_next = t + draws.exponential(total_rate);
    cursor.emit_before(t_next, leg, arena, root, out.root_spikes, p.rho, out);
    if (t_next > p.horizon) {
      out.reason = StopReason::horizon;
      out.end_time = p.horizon;
      break;
    }
    if (out.event_count >= p.caps.max_events) {
      out.reason = StopReason::max_events;
      out.terminated_early = true;
      out.end_time = t;
      break;
    }
    t = t_next;

    const bool is_spike = draws.uniform() * total_rate < spike_rate;
    const Vertex v = is_spike ? leg.pick_active(draws.uniform()) : leg.pick_weighted(draws.uniform());
    EventView ev{t, v, arena.level(v), is_spike ? EventKind::spike : EventKind::leak, leg.get(v), leg.total()};

    if (is_spike) {
      leg.set(v, 0, ev.level);
      if (v == root) {
        ++out.root_spikes;
        out.root_spike_times.push_back(t);
      }
      for (const Edge& e : arena.neighbors(v)) {
        if (e.weight == 0) continue;
        leg.ensure(arena.size());
        const int lj = arena.level(e.to);
        if (lj > prune_above) {
          out.pruned_units += e.weight;
          for (std::size_t w = 0; w < out.prune_budget.size(); ++w)
            out.prune_budget[w] += e.weight * budget->per_unit(t, w);
          continue;
        }
        const std::uint64_t sum = static_cast<std::uint64_t>(leg.get(e.to)) + e.weight;
        leg.set(e.to, static_cast<std::uint32_t>(std::min<std::uint64_t>(limit, sum)), lj);
      }
    } else {
      leg.set(v, ev.potential_before - 1, ev.level);
    }
    ++out.event_count;
    if (p.record_events) log.emplace_back(t, v, ev.kind);
    if (observer) observer->on_event(ev, view);
    if (leg.active() > p.caps.max_support) {
      out.reason = StopReason::max_support;
      out.terminated_early = true;
      out.end_time = t;
      break;
    }
  }
  out.final_total = leg.total();
  out.final_active = leg.active();
  out.events.reserve(log.size());
  for (auto [time, v, kind] : log) out.events.push_back({time, arena.id(v), kind});
  return out;
}

}  // namespace treespike::detail
