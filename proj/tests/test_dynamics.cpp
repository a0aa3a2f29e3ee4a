#include "doctest.h"

#include <stdexcept>

#include <cmath>
#include <map>

#include "treespike/dynamics.hpp"

using namespace treespike;

namespace {

SimParams base(double gamma, double horizon, EngineKind engine = EngineKind::gillespie) {
  SimParams p;
  p.gamma = gamma;
  p.horizon = horizon;
  p.engine = engine;
  return p;
}

PotentialConfig replay(const PotentialConfig& init, const std::vector<EventRecord>& events, double t,
                       const SimParams& p) {
  PotentialConfig x = init;
  for (const auto& e : events) {
    if (e.time > t) break;
    x = e.kind == EventKind::spike ? apply_spike(x, e.neuron, p.spec, p.mode) : apply_leak(x, e.neuron);
  }
  return x;
}

// Checks the per-event ledgers of total potential and of nu_rho.
class LedgerObserver : public Observer {
 public:
  LedgerObserver(const SimParams& p, double rho) : p_(p), rho_(rho) {}
  void on_event(const EventView& ev, const StateView& state) override {
    const auto lam = static_cast<std::int64_t>(lambda(p_.spec));
    const auto delta = static_cast<std::int64_t>(state.total_potential()) - static_cast<std::int64_t>(ev.total_before);
    if (ev.kind == EventKind::spike)
      bad += p_.mode.kind == ModeKind::unbounded && delta != lam - static_cast<std::int64_t>(ev.potential_before);
    else
      bad += delta != -1;
    double nu = 0.0;
    state.for_each([&](Vertex, int level, std::uint64_t pot) {
      nu += static_cast<double>(pot) * std::pow(rho_, level);
      max_pot = std::max(max_pot, pot);
    });
    if (p_.mode.kind == ModeKind::unbounded) {
      const double l = ev.level;
      const double expect = ev.kind == EventKind::spike
                                ? p_.spec.w_up * std::pow(rho_, l - 1) +
                                      (p_.spec.d - 1) * p_.spec.w_down * std::pow(rho_, l + 1) -
                                      static_cast<double>(ev.potential_before) * std::pow(rho_, l)
                                : -std::pow(rho_, l);
      bad_nu += std::abs(nu - last_nu - expect) > 1e-9 * std::max(1.0, std::abs(nu));
    }
    last_nu = nu;
    ++events;
  }
  int bad = 0, bad_nu = 0;
  std::uint64_t events = 0, max_pot = 0;
  double last_nu = 0.0;

 private:
  SimParams p_;
  double rho_;
};

}  // namespace

TEST_CASE("empty initial configuration is absorbing") {
  for (auto engine : {EngineKind::gillespie, EngineKind::graphical}) {
    auto p = base(0.7, 5.0, engine);
    p.grid = {1, 2, 3, 4, 5};
    auto tr = run(p, PotentialConfig{});
    CHECK(tr.event_count == 0);
    CHECK(tr.reason == StopReason::extinct);
    REQUIRE(tr.samples.size() == 5);
    for (const auto& s : tr.samples) CHECK(s.total_potential == 0);
  }
}

TEST_CASE("zero-weight neuron dies at its first event") {
  for (auto engine : {EngineKind::gillespie, EngineKind::graphical}) {
    auto p = base(1.0, 50.0, engine);
    p.spec = {3, 0, 0, true};
    p.record_events = true;
    double sum = 0.0;
    int alive_at_half = 0;
    const int n = 20000;
    for (int r = 0; r < n; ++r) {
      p.replicate = static_cast<std::uint64_t>(r);
      auto tr = run(p);
      REQUIRE(tr.events.size() == 1);
      CHECK(tr.reason == StopReason::extinct);
      sum += tr.events[0].time;
      alive_at_half += tr.events[0].time > 0.5;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.03));
    CHECK(static_cast<double>(alive_at_half) / n == doctest::Approx(std::exp(-1.0)).epsilon(0.03));
  }
}

TEST_CASE("leakless tree from a single unit never loses potential") {
  for (auto engine : {EngineKind::gillespie, EngineKind::graphical}) {
    auto p = base(0.0, 4.0, engine);
    p.grid = {0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4};
    for (std::uint64_t r = 0; r < 30; ++r) {
      p.replicate = r;
      auto tr = run(p);
      CHECK(tr.reason == StopReason::horizon);
      for (std::size_t i = 1; i < tr.samples.size(); ++i)
        CHECK(tr.samples[i].total_potential >= tr.samples[i - 1].total_potential);
    }
  }
}

TEST_CASE("samples agree with replaying the event log") {
  for (auto engine : {EngineKind::gillespie, EngineKind::graphical})
    for (auto mode : {Mode::unbounded(), Mode::capped(2), Mode::binary()}) {
      auto p = base(0.6, 3.0, engine);
      p.spec = {3, 1, 1};
      p.mode = mode;
      p.record_events = true;
      p.grid = {0, 0.75, 1.5, 2.25, 3};
      PotentialConfig init;
      init.set(root(), std::min<std::uint64_t>(2, mode.limit()));
      init.set(NeuronId{1, {}}, 1);
      for (std::uint64_t r = 0; r < 20; ++r) {
        p.replicate = r;
        auto tr = run(p, init);
        for (std::size_t i = 1; i < tr.events.size(); ++i) CHECK(tr.events[i].time > tr.events[i - 1].time);
        for (const auto& s : tr.samples) {
          auto x = replay(init, tr.events, s.t, p);
          CHECK(x.total_potential() == s.total_potential);
          CHECK(x.active_count() == s.active_count);
          CHECK(x[root()] == s.root_potential);
        }
      }
    }
}

TEST_CASE("per-event ledgers and mode bounds") {
  for (auto engine : {EngineKind::gillespie, EngineKind::graphical}) {
    auto p = base(0.9, 3.0, engine);
    p.spec = {4, 2, 1};
    for (auto mode : {Mode::unbounded(), Mode::capped(3), Mode::binary()}) {
      p.mode = mode;
      LedgerObserver obs(p, 0.7);
      for (std::uint64_t r = 0; r < 10; ++r) {
        p.replicate = r;
        obs.last_nu = 1.0;  // nu of e_o
        run(p, PotentialConfig::single_root(), &obs);
      }
      CHECK(obs.events > 0);
      CHECK(obs.bad == 0);
      CHECK(obs.bad_nu == 0);
      if (mode.kind != ModeKind::unbounded) CHECK(obs.max_pot <= mode.limit());
    }
  }
}

TEST_CASE("identical parameters give identical trajectories") {
  for (auto engine : {EngineKind::gillespie, EngineKind::graphical}) {
    auto p = base(0.5, 4.0, engine);
    p.record_events = true;
    p.seed = 99;
    p.replicate = 3;
    p.grid = {1, 2, 3, 4};
    p.rho = 0.5;
    auto a = run(p), b = run(p);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      CHECK(a.events[i].time == b.events[i].time);
      CHECK(a.events[i].neuron == b.events[i].neuron);
    }
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].nu == b.samples[i].nu);
  }
}

TEST_CASE("safety caps flag the run") {
  auto p = base(0.0, 100.0);
  p.caps.max_support = 50;
  auto tr = run(p);
  CHECK(tr.terminated_early);
  CHECK(tr.reason == StopReason::max_support);
  p.caps = {};
  p.caps.max_events = 10;
  tr = run(p);
  CHECK(tr.terminated_early);
  CHECK(tr.reason == StopReason::max_events);
  CHECK(tr.event_count == 10);
}

TEST_CASE("parameter validation") {
  auto p = base(-1.0, 1.0);
  CHECK_THROWS_WITH_AS(p.validate(), "gamma must be ≥ 0", std::invalid_argument);
  p = base(1.0, 0.0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = base(1.0, 2e6);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = base(1.0, 2.0);
  p.grid = {1.0, 0.5};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.grid = {0.5, 3.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = base(1.0, 2.0, EngineKind::graphical);
  p.pruning = LevelPruning{};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_engine("tau"), std::invalid_argument);
  p = base(1.0, 2.0);
  p.mode = Mode::binary();
  PotentialConfig two;
  two.set(root(), 2);
  CHECK_THROWS_AS(run(p, two), std::invalid_argument);
}

TEST_CASE("nu_rho samples") {
  auto p = base(0.5, 2.0);
  p.rho = 1.0;
  p.grid = {0, 1, 2};
  auto tr = run(p);
  CHECK(tr.samples[0].nu == 1.0);
  for (const auto& s : tr.samples) CHECK(s.nu == doctest::Approx(static_cast<double>(s.total_potential)));
}

TEST_CASE("survival certificate stops supercritical runs early") {
  auto p = base(0.5, 60.0);
  p.certify_eps = 1e-9;
  int certified = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    p.replicate = r;
    auto tr = run(p);
    CHECK(tr.reason != StopReason::horizon);
    if (tr.reason == StopReason::certified_survival) {
      ++certified;
      CHECK(tr.certify_error <= 1e-9);
      CHECK(tr.end_time < 60.0);
    }
  }
  CHECK(certified > 10);
}

TEST_CASE("level pruning gives a bracketing budget") {
  auto p = base(3.8, 10.0);
  p.spec = {6, 1, 1};
  p.pruning = LevelPruning{3, {{5.0, 10.0}}};
  for (std::uint64_t r = 0; r < 20; ++r) {
    p.replicate = r;
    auto tr = run(p);
    REQUIRE(tr.prune_budget.size() == 1);
    CHECK(tr.prune_budget[0] >= 0.0);
    if (tr.pruned_units == 0) CHECK(tr.prune_budget[0] == 0.0);
  }
  PotentialConfig high;
  high.set(NeuronId{0, {1, 1, 1, 1}}, 1);
  CHECK_THROWS_AS(run(p, high), std::invalid_argument);
}

TEST_CASE("finite graphs") {
  auto p = base(0.7, 1.0, EngineKind::graphical);
  p.mode = Mode::binary();
  auto g = FiniteGraph::path(3);
  auto tr = run_on_graph(g, p, {1, 0, 0});
  CHECK(tr.samples.size() == 1);
  CHECK_THROWS_AS(run_on_graph(g, p, {1, 0}), std::invalid_argument);
  p.rho = 0.5;
  CHECK_THROWS_AS(run_on_graph(g, p, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("root spike census") {
  auto p = base(0.0, 6.0);
  auto c = run_root_spike_census(p, PotentialConfig::single_root(), 3.0, 40);
  CHECK(c.counts.size() == 40);
  CHECK(c.mean > 0.0);

  p = base(1.0, 20.0);
  p.spec = {3, 0, 0, true};
  c = run_root_spike_census(p, PotentialConfig::single_root(), 10.0, 200);
  CHECK(c.mean == 0.0);

  p = base(10.0, 40.0);
  p.spec = {2, 1, 1};
  c = run_root_spike_census(p, PotentialConfig::single_root(), 20.0, 200);
  CHECK(c.fraction_positive == 0.0);
  CHECK_THROWS(run_root_spike_census(p, PotentialConfig::single_root(), 40.0, 10));
}
