#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "detail/leg_state.hpp"
#include "treespike/dynamics.hpp"

namespace treespike::detail {

/// Grid cursor: emits samples for every grid time strictly before `t`.
class SampleCursor {
 public:
  explicit SampleCursor(std::vector<double> grid) : grid_(std::move(grid)) {}

  template <class Arena>
  void emit_before(double t, const LegState& leg, Arena& arena, Vertex root, std::uint64_t root_spikes, double rho,
                   Trajectory& out) {
    while (next_ < grid_.size() && grid_[next_] < t) {
      out.samples.push_back(snapshot(grid_[next_], leg, arena, root, root_spikes, rho));
      ++next_;
    }
  }

  /// Emits every remaining sample from the (absorbing) current state.
  template <class Arena>
  void emit_rest(const LegState& leg, Arena& arena, Vertex root, std::uint64_t root_spikes, double rho,
                 Trajectory& out) {
    emit_before(INFINITY, leg, arena, root, root_spikes, rho, out);
  }

  template <class Arena>
  static Sample snapshot(double t, const LegState& leg, Arena& arena, Vertex root, std::uint64_t root_spikes,
                         double rho) {
    Sample s;
    s.t = t;
    s.total_potential = leg.total();
    s.active_count = leg.active();
    s.root_potential = leg.get(root);
    s.root_spikes = root_spikes;
    if (rho > 0.0) {
      double nu = 0.0;
      leg.for_each_active([&](Vertex v, std::uint32_t p) { nu += p * std::pow(rho, arena.level(v)); });
      s.nu = nu;
    }
    return s;
  }

 private:
  std::vector<double> grid_;
  std::size_t next_ = 0;
};

/// Survival certificate: number of same-level active neurons after which the
/// embedded branching processes rooted there are all extinct by `horizon`
/// with probability at most eps.
struct Certificate {
  std::uint64_t threshold = 0;  // 0 = unavailable
  double error = 0.0;
};
Certificate make_certificate(const TreeSpec& spec, double gamma, double eps, double horizon);

/// Rigorous per-unit bound on the expected root-spike deficit caused by
/// deleting one unit of potential at level `level` at time s, for each window.
class PruneBudget {
 public:
  PruneBudget(const TreeSpec& spec, double gamma, int level, std::vector<std::pair<double, double>> windows,
              double horizon);
  double per_unit(double s, std::size_t window) const;
  std::size_t windows() const { return windows_.size(); }

 private:
  std::vector<std::pair<double, double>> windows_;
  double step_ = 0.0;
  std::vector<double> cumulative_;  // upper bounds on the integral of the Green bound over [0, i * step]
};

template <class Arena>
class LegView final : public StateView {
 public:
  LegView(const LegState& leg, Arena& arena) : leg_(leg), arena_(arena) {}
  std::uint64_t total_potential() const override { return leg_.total(); }
  std::uint64_t active_count() const override { return leg_.active(); }
  std::uint64_t potential(Vertex v) const override { return leg_.get(v); }
  int level(Vertex v) const override { return arena_.level(v); }
  std::vector<Vertex> active_vertices() const override { return leg_.active_vertices(); }

 private:
  const LegState& leg_;
  Arena& arena_;
};

}  // namespace treespike::detail
