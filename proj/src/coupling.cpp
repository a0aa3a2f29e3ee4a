#include "treespike/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detail/direct_engine.hpp"
#include "detail/graphical_engine.hpp"
#include "treespike/oracle.hpp"

namespace treespike {

void BranchingParams::validate() const {
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be ≥ 0");
}

namespace {

detail::MultiRun run_legs(const SimParams& p, double clock_gamma, std::vector<detail::LegSpec> legs,
                          std::vector<detail::DominationCheck> checks) {
  TreeArena arena(p.spec);
  const Vertex o = arena.intern(root());
  auto go = [&](auto& engine) {
    for (std::size_t j = 0; j < legs.size(); ++j) engine.set_initial(static_cast<int>(j), o, 1);
    return engine.run();
  };
  if (p.engine == EngineKind::graphical) {
    detail::GraphicalEngine<TreeArena> engine(arena, p, clock_gamma, legs, checks);
    return go(engine);
  }
  detail::DirectEngine<TreeArena> engine(arena, p, clock_gamma, legs, checks);
  return go(engine);
}

void check_coupled_params(const SimParams& p) {
  p.validate();
  if (p.pruning) throw std::invalid_argument("level pruning is not available for coupled runs");
}

CoupledPair to_pair(detail::MultiRun run) {
  CoupledPair out;
  out.traj_low = std::move(run.legs[0]);
  out.traj_high = std::move(run.legs[1]);
  out.violation_count = run.violations;
  out.first_violation = std::move(run.first_violation);
  out.violations_at_sample = std::move(run.violations_at_sample);
  return out;
}

}  // namespace

CoupledChain run_gamma_chain(const std::vector<double>& gammas, const SimParams& params) {
  check_coupled_params(params);
  if (gammas.empty()) throw std::invalid_argument("gamma list is empty");
  if (!std::is_sorted(gammas.begin(), gammas.end())) throw std::invalid_argument("gammas must be non-decreasing");
  if (!(gammas.front() >= 0.0)) throw std::invalid_argument("gamma must be ≥ 0");
  if (params.engine == EngineKind::graphical && gammas.back() * params.horizon > 1e9)
    throw std::invalid_argument("gamma * T too large for the graphical engine clocks");
  const double top = gammas.back();
  std::vector<detail::LegSpec> legs;
  std::vector<detail::DominationCheck> checks;
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    legs.push_back({params.mode, top > 0.0 ? gammas[j] / top : 1.0, 0, false, params.certify_eps, gammas[j]});
    if (j) checks.push_back({static_cast<int>(j - 1), static_cast<int>(j)});
  }
  auto run = run_legs(params, top, legs, checks);
  CoupledChain out;
  out.gammas = gammas;
  out.legs = std::move(run.legs);
  out.violation_count = run.violations;
  out.first_violation = std::move(run.first_violation);
  return out;
}

CoupledPair run_gamma_pair(double gamma_low, double gamma_high, const SimParams& params, bool inject_fault) {
  check_coupled_params(params);
  if (!(gamma_low >= 0.0)) throw std::invalid_argument("gamma must be ≥ 0");
  if (gamma_high < gamma_low) throw std::invalid_argument("gamma_low must not exceed gamma_high");
  const double accept = gamma_high > 0.0 ? gamma_low / gamma_high : 1.0;
  std::vector<detail::LegSpec> legs{
      {params.mode, accept, 0, false, params.certify_eps, gamma_low},
      {params.mode, 1.0, inject_fault ? 1u : 0u, false, params.certify_eps, gamma_high},
  };
  return to_pair(run_legs(params, gamma_high, legs, {{0, 1}}));
}

CoupledPair run_xi_eta_pair(const SimParams& params) {
  check_coupled_params(params);
  if (params.mode.kind != ModeKind::unbounded) throw std::invalid_argument("the xi leg must run in unbounded mode");
  std::vector<detail::LegSpec> legs{
      {Mode::unbounded(), 1.0, 0, false, 0.0, params.gamma},
      {Mode::binary(), 1.0, 0, false, 0.0, params.gamma},
  };
  return to_pair(run_legs(params, params.gamma, legs, {{0, 1}}));
}

CoupledTriple run_zeta_eta_xi_triple(const SimParams& params) {
  check_coupled_params(params);
  if (params.spec.w_up < 1 || params.spec.w_down < 1)
    throw std::invalid_argument("the zeta/eta/xi triple needs w_up >= 1 and w_down >= 1");
  std::vector<detail::LegSpec> legs{
      {Mode::binary(), 1.0, 0, true, 0.0, params.gamma},
      {Mode::binary(), 1.0, 0, false, 0.0, params.gamma},
      {Mode::unbounded(), 1.0, 0, false, 0.0, params.gamma},
  };
  auto run = run_legs(params, params.gamma, legs, {{1, 0}, {2, 1}});
  CoupledTriple out;
  out.zeta = std::move(run.legs[0]);
  out.eta = std::move(run.legs[1]);
  out.xi = std::move(run.legs[2]);
  out.violation_count = run.violations;
  out.first_violation = std::move(run.first_violation);
  out.blocked_reactivations = run.zeta_reactivations;
  out.violations_at_sample = std::move(run.violations_at_sample);
  return out;
}

Trajectory run_zeta(const BranchingParams& bp, double horizon, std::uint64_t seed, std::uint64_t replicate,
                    const std::vector<double>& grid, double certify_eps) {
  bp.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon T must be > 0");
  if (!std::is_sorted(grid.begin(), grid.end()) || (!grid.empty() && (grid.front() < 0.0 || grid.back() > horizon)))
    throw std::invalid_argument("sample grid must be sorted within [0, T]");
  std::uint64_t threshold = 0;
  double error = 0.0;
  if (certify_eps > 0.0 && bp.d >= 3) {
    const double f = oracle::gw_extinction_by(bp.d, bp.gamma, horizon);
    if (f <= 0.0) {
      threshold = 1;
    } else if (f < 1.0) {
      const double n = std::ceil(std::log(certify_eps) / std::log(f));
      if (n < 1e15) threshold = static_cast<std::uint64_t>(std::max(1.0, n));
    }
    if (threshold) error = std::pow(std::max(f, 0.0), static_cast<double>(threshold));
  }

  rng::StreamRng draws(rng::replicate_key(seed, replicate), rng::clock_stream(0, rng::ClockKind::branching, 0));
  const std::vector<double> times = grid.empty() ? std::vector<double>{horizon} : grid;
  Trajectory out;
  auto sample = [&](double t, std::uint64_t n) {
    Sample s;
    s.t = t;
    s.total_potential = n;
    s.active_count = n;
    out.samples.push_back(s);
  };
  std::size_t next = 0;
  std::uint64_t n = 1;
  double t = 0.0;
  const double death = bp.p0();
  for (;;) {
    if (n == 0) {
      out.reason = StopReason::extinct;
      out.end_time = t;
      while (next < times.size()) sample(times[next++], 0);
      break;
    }
    if (threshold && n >= threshold) {
      out.reason = StopReason::certified_survival;
      out.certify_error = error;
      out.end_time = t;
      break;
    }
    const double t_next = t + draws.exponential(static_cast<double>(n) * (1.0 + bp.gamma));
    while (next < times.size() && times[next] < t_next) sample(times[next++], n);
    if (t_next > horizon) {
      out.reason = StopReason::horizon;
      out.end_time = horizon;
      break;
    }
    t = t_next;
    ++out.event_count;
    if (draws.uniform() < death)
      --n;
    else
      n += static_cast<std::uint64_t>(bp.d - 2);
  }
  out.final_total = n;
  out.final_active = n;
  return out;
}

}  // namespace treespike
