#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "treespike/coupling.hpp"
#include "treespike/oracle.hpp"
#include "treespike/stats.hpp"

using namespace treespike;

namespace {

SimParams base(int d, double horizon, std::uint64_t seed, std::uint64_t replicate = 0,
               EngineKind engine = EngineKind::graphical) {
  SimParams p;
  p.spec.d = d;
  p.horizon = horizon;
  p.seed = seed;
  p.replicate = replicate;
  p.engine = engine;
  return p;
}

bool same_events(const Trajectory& a, const Trajectory& b) {
  if (a.events.size() != b.events.size()) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i)
    if (a.events[i].time != b.events[i].time || !(a.events[i].neuron == b.events[i].neuron) ||
        a.events[i].kind != b.events[i].kind)
      return false;
  return true;
}

}  // namespace

TEST_CASE("equal gammas give identical legs") {
  for (auto engine : {EngineKind::graphical, EngineKind::gillespie}) {
    auto p = base(3, 4.0, 21, 0, engine);
    p.record_events = true;
    auto pair = run_gamma_pair(0.8, 0.8, p);
    CHECK(pair.violation_count == 0);
    CHECK(same_events(pair.traj_low, pair.traj_high));
    CHECK(pair.traj_low.final_total == pair.traj_high.final_total);
  }
}

TEST_CASE("gamma pair keeps the order at every event") {
  for (auto engine : {EngineKind::graphical, EngineKind::gillespie}) {
    std::uint64_t violations = 0;
    for (std::uint64_t r = 0; r < 40; ++r) {
      auto p = base(3, 6.0, 4, r, engine);
      p.grid = {1, 2, 3, 4, 5, 6};
      auto pair = run_gamma_pair(0.5, 1.0, p);
      violations += pair.violation_count;
      for (std::size_t i = 0; i < pair.traj_high.samples.size() && i < pair.traj_low.samples.size(); ++i)
        CHECK(pair.traj_high.samples[i].total_potential <= pair.traj_low.samples[i].total_potential);
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("fault injection is detected") {
  std::uint64_t violations = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    auto pair = run_gamma_pair(0.5, 1.0, base(3, 6.0, 4, r), true);
    violations += pair.violation_count;
    if (pair.violation_count) {
      REQUIRE(pair.first_violation.has_value());
      CHECK(pair.first_violation->time > 0.0);
      CHECK(pair.violations_at_sample.back() == pair.violation_count);
    }
  }
  CHECK(violations > 0);
}

TEST_CASE("coupled legs keep the solo marginals") {
  // |xi_T| of the low leg against independent solo runs at the same gamma.
  std::vector<double> coupled, solo;
  for (std::uint64_t r = 0; r < 1500; ++r) {
    auto pair = run_gamma_pair(0.8, 1.6, base(3, 2.0, 8, r, EngineKind::gillespie));
    coupled.push_back(static_cast<double>(pair.traj_low.final_total));
    auto p = base(3, 2.0, 9, r, EngineKind::gillespie);
    p.gamma = 0.8;
    solo.push_back(static_cast<double>(run(p).final_total));
  }
  CHECK(stats::ks_two_sample(coupled, solo).p_value > 0.01);
}

TEST_CASE("gamma chain") {
  auto p = base(3, 5.0, 2, 0, EngineKind::gillespie);
  auto chain = run_gamma_chain({0.5, 1.0, 1.5, 2.0}, p);
  CHECK(chain.legs.size() == 4);
  CHECK(chain.violation_count == 0);
  for (std::size_t j = 0; j + 1 < chain.legs.size(); ++j) CHECK(chain.legs[j].final_total >= chain.legs[j + 1].final_total);
  CHECK_THROWS_AS(run_gamma_chain({1.0, 0.5}, p), std::invalid_argument);
  CHECK_THROWS_AS(run_gamma_chain({}, p), std::invalid_argument);
  CHECK_THROWS_AS(run_gamma_pair(1.0, 0.5, p), std::invalid_argument);
}

TEST_CASE("xi dominates eta") {
  std::uint64_t violations = 0;
  for (std::uint64_t r = 0; r < 30; ++r) {
    auto p = base(3, 4.0, 6, r);
    p.gamma = 0.7;
    auto pair = run_xi_eta_pair(p);
    violations += pair.violation_count;
    CHECK(pair.traj_high.final_total <= pair.traj_low.final_total);
  }
  CHECK(violations == 0);

  auto p = base(3, 4.0, 6);
  p.mode = Mode::binary();
  CHECK_THROWS_AS(run_xi_eta_pair(p), std::invalid_argument);
}

TEST_CASE("zero weights: xi and eta die together") {
  auto p = base(3, 10.0, 1);
  p.spec.w_up = 0;
  p.spec.w_down = 0;
  p.spec.allow_zero_weights = true;
  p.gamma = 1.0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    p.replicate = r;
    auto pair = run_xi_eta_pair(p);
    CHECK(pair.traj_low.end_time == pair.traj_high.end_time);
    CHECK(pair.traj_low.reason == StopReason::extinct);
  }
}

TEST_CASE("zeta <= eta <= xi") {
  for (auto engine : {EngineKind::graphical, EngineKind::gillespie}) {
    std::uint64_t violations = 0;
    for (std::uint64_t r = 0; r < 20; ++r) {
      auto p = base(4, 3.0, 12, r, engine);
      p.gamma = 1.0;
      auto t = run_zeta_eta_xi_triple(p);
      violations += t.violation_count;
      CHECK(t.zeta.final_active <= t.eta.final_total);
      CHECK(t.eta.final_total <= t.xi.final_total);
    }
    CHECK(violations == 0);
  }
  auto p = base(4, 3.0, 12);
  p.spec.w_up = 0;
  CHECK_THROWS_AS(run_zeta_eta_xi_triple(p), std::invalid_argument);
}

TEST_CASE("branching process zeta") {
  SUBCASE("no leak: never dies") {
    auto tr = run_zeta({3, 0.0}, 3.0, 1, 0);
    CHECK(tr.reason == StopReason::horizon);
    CHECK(tr.final_total >= 1);
  }
  SUBCASE("subcritical: survival frequency near zero") {
    int alive = 0;
    for (std::uint64_t r = 0; r < 500; ++r) alive += run_zeta({3, 2.0}, 30.0, 2, r).survives();
    CHECK(alive <= 5);
  }
  SUBCASE("d = 3, gamma = 0.5: survival near 1 - q = 0.5") {
    const int n = 4000;
    int alive = 0;
    for (std::uint64_t r = 0; r < n; ++r) alive += run_zeta({3, 0.5}, 60.0, 3, r, {}, 1e-9).survives();
    const double p = static_cast<double>(alive) / n;
    CHECK(std::abs(p - 0.5) <= stats::proportion_half_width(alive, n));
  }
  SUBCASE("samples and certification") {
    auto tr = run_zeta({4, 0.2}, 10.0, 4, 0, {0.0, 5.0, 10.0}, 1e-9);
    CHECK(tr.samples.front().total_potential == 1);
    if (tr.reason == StopReason::certified_survival) CHECK(tr.certify_error <= 1e-9);
  }
  CHECK_THROWS_AS(run_zeta({1, 0.5}, 1.0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(run_zeta({3, -0.5}, 1.0, 0, 0), std::invalid_argument);
}
