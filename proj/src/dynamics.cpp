#include "treespike/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detail/gillespie_engine.hpp"
#include "detail/graphical_engine.hpp"
#include "treespike/batch.hpp"
#include "treespike/oracle.hpp"

namespace treespike {

std::string to_string(EngineKind e) { return e == EngineKind::gillespie ? "gillespie" : "graphical"; }
std::string to_string(EventKind e) { return e == EventKind::spike ? "spike" : "leak"; }

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::horizon: return "horizon";
    case StopReason::extinct: return "extinct";
    case StopReason::certified_survival: return "certified_survival";
    case StopReason::max_events: return "max_events";
    case StopReason::max_support: return "max_support";
  }
  return "unknown";
}

EngineKind parse_engine(const std::string& s) {
  if (s == "gillespie") return EngineKind::gillespie;
  if (s == "graphical") return EngineKind::graphical;
  throw std::invalid_argument("engine must be 'gillespie' or 'graphical', got '" + s + "'");
}

void SimParams::validate() const {
  spec.validate();
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be ≥ 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon T must be > 0");
  if (horizon > 1e6) throw std::invalid_argument("horizon T must be <= 1e6");
  if (engine == EngineKind::graphical && gamma * horizon > 1e9)
    throw std::invalid_argument("gamma * T too large for the graphical engine clocks");
  if (mode.kind == ModeKind::capped && mode.cap < 1) throw std::invalid_argument("cap must be >= 1");
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("sample grid must be sorted");
  if (!grid.empty() && (grid.front() < 0.0 || grid.back() > horizon))
    throw std::invalid_argument("sample grid must lie within [0, T]");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be > 0 (or 0 to disable)");
  if (!(certify_eps >= 0.0 && certify_eps < 1.0)) throw std::invalid_argument("certify_eps must be in [0, 1)");
  if (caps.max_events == 0 || caps.max_support == 0) throw std::invalid_argument("safety caps must be positive");
  if (pruning) {
    if (engine != EngineKind::gillespie) throw std::invalid_argument("level pruning needs the gillespie engine");
    if (certify_eps > 0.0) throw std::invalid_argument("level pruning and certification cannot be combined");
    if (pruning->max_level < 0) throw std::invalid_argument("pruning max_level must be >= 0");
    for (auto [a, b] : pruning->windows)
      if (!(0.0 <= a && a < b && b <= horizon)) throw std::invalid_argument("pruning windows must satisfy 0 <= a < b <= T");
  }
}

std::vector<double> SimParams::effective_grid() const {
  if (grid.empty()) return {horizon};
  return grid;
}

std::uint64_t Trajectory::root_spikes_in(double t0, double t1) const {
  auto lo = std::lower_bound(root_spike_times.begin(), root_spike_times.end(), t0);
  auto hi = std::upper_bound(root_spike_times.begin(), root_spike_times.end(), t1);
  return static_cast<std::uint64_t>(hi - lo);
}

namespace detail {

Certificate make_certificate(const TreeSpec& spec, double gamma, double eps, double horizon) {
  // N active neurons on one level root disjoint subtrees; each carries an
  // independent copy of the embedded branching process, which needs w_down >= 1.
  // Extinction by the horizon is at most as likely from any later start.
  if (!(eps > 0.0) || spec.w_down < 1 || spec.d < 3) return {};
  const double q = oracle::gw_extinction_by(spec.d, gamma, horizon);
  if (q >= 1.0) return {};
  if (q <= 0.0) return {1, 0.0};
  const double n = std::ceil(std::log(eps) / std::log(q));
  if (n > 1e9) return {};
  const auto threshold = static_cast<std::uint64_t>(std::max(1.0, n));
  return {threshold, std::pow(q, static_cast<double>(threshold))};
}

namespace {

// min over rho of rho^level * exp(kappa(rho) u), returned with its minimizer.
std::pair<double, double> best_rho(const TreeSpec& spec, double gamma, int level, double u) {
  const double w1 = spec.w_up;
  const double c = static_cast<double>(spec.w_down) * (spec.d - 1);
  const double l = level;
  double rho;
  if (c == 0.0)
    rho = u * w1 / l;
  else
    rho = (-l + std::sqrt(l * l + 4.0 * u * u * c * w1)) / (2.0 * u * c);
  return {rho, w1 / rho + c * rho - 1.0 - gamma};
}

}  // namespace

PruneBudget::PruneBudget(const TreeSpec& spec, double gamma, int level,
                         std::vector<std::pair<double, double>> windows, double horizon)
    : windows_(std::move(windows)) {
  constexpr std::size_t cells = 1 << 16;
  step_ = horizon / cells;
  cumulative_.assign(cells + 1, 0.0);
  if (level < 1) throw std::invalid_argument("pruned level must be >= 1");
  if (spec.w_up == 0) return;  // potential above the root's level never travels back down
  for (std::size_t i = 0; i < cells; ++i) {
    const double u0 = step_ * static_cast<double>(i), u1 = u0 + step_;
    auto [rho, kappa] = best_rho(spec, gamma, level, 0.5 * (u0 + u1));
    const double scale = std::pow(rho, level);
    const double cell = kappa == 0.0 ? scale * step_ : scale * (std::exp(kappa * u1) - std::exp(kappa * u0)) / kappa;
    cumulative_[i + 1] = cumulative_[i] + cell;
  }
}

double PruneBudget::per_unit(double s, std::size_t window) const {
  const auto [a, b] = windows_[window];
  if (s >= b) return 0.0;
  const double lo = std::max(a - s, 0.0), hi = b - s;
  const auto last = static_cast<double>(cumulative_.size() - 1);
  const auto i0 = static_cast<std::size_t>(std::min(last, std::floor(lo / step_)));
  const auto i1 = static_cast<std::size_t>(std::min(last, std::ceil(hi / step_)));
  return cumulative_[i1] - cumulative_[i0];
}

}  // namespace detail

namespace {

template <class Arena>
Trajectory dispatch(Arena& arena, const SimParams& p, const std::vector<std::pair<Vertex, std::uint32_t>>& initial,
                    Observer* observer, bool tree) {
  const auto cert = tree ? detail::make_certificate(p.spec, p.gamma, p.certify_eps, p.horizon) : detail::Certificate{};
  if (p.engine == EngineKind::gillespie) {
    std::optional<detail::PruneBudget> budget;
    if (p.pruning) budget.emplace(p.spec, p.gamma, p.pruning->max_level + 1, p.pruning->windows, p.horizon);
    return detail::run_gillespie(arena, p, initial, observer, cert, budget ? &*budget : nullptr);
  }
  detail::LegSpec leg{p.mode, 1.0, 0, false, tree ? p.certify_eps : 0.0, p.gamma};
  detail::GraphicalEngine<Arena> engine(arena, p, p.gamma, {leg}, {});
  for (auto [v, pot] : initial) engine.set_initial(0, v, pot);
  engine.set_observer(observer);
  auto out = engine.run();
  return std::move(out.legs.front());
}

std::uint32_t checked_initial(std::uint64_t pot, const Mode& mode) {
  if (pot > mode.limit()) throw std::invalid_argument("initial potential exceeds the mode's cap");
  return static_cast<std::uint32_t>(pot);
}

}  // namespace

Trajectory run(const SimParams& params, const PotentialConfig& initial, Observer* observer) {
  params.validate();
  TreeArena arena(params.spec);
  std::vector<std::pair<Vertex, std::uint32_t>> init;
  for (const auto& [id, pot] : initial.support()) {
    const Vertex v = arena.intern(id);
    if (params.pruning && arena.level(v) > params.pruning->max_level)
      throw std::invalid_argument("initial configuration lies above the pruning level");
    init.emplace_back(v, checked_initial(pot, params.mode));
  }
  return dispatch(arena, params, init, observer, true);
}

Trajectory run_on_graph(const FiniteGraph& graph, const SimParams& params, const std::vector<std::uint32_t>& initial,
                        Observer* observer) {
  params.validate();
  graph.validate();
  if (params.rho > 0.0 || params.pruning || params.certify_eps > 0.0)
    throw std::invalid_argument("rho, pruning and certification need the tree");
  if (initial.size() != static_cast<std::size_t>(graph.size()))
    throw std::invalid_argument("initial configuration size does not match the graph");
  GraphArena arena(graph);
  std::vector<std::pair<Vertex, std::uint32_t>> init;
  for (std::size_t i = 0; i < initial.size(); ++i)
    if (checked_initial(initial[i], params.mode)) init.emplace_back(static_cast<Vertex>(i), initial[i]);
  return dispatch(arena, params, init, observer, false);
}

CensusResult run_root_spike_census(const SimParams& params, const PotentialConfig& initial, double t0,
                                   std::size_t n_runs) {
  params.validate();
  if (!(t0 >= 0.0 && t0 < params.horizon)) throw std::invalid_argument("census window needs 0 <= t0 < T");
  struct One {
    std::uint64_t count = 0;
    bool flagged = false;
  };
  auto runs = parallel_map(n_runs, [&](std::size_t r) {
    SimParams p = params;
    p.replicate = r;
    p.record_events = false;
    const Trajectory tr = run(p, initial);
    return One{tr.root_spikes_in(t0, p.horizon), tr.terminated_early};
  });
  CensusResult out;
  std::size_t positive = 0;
  double sum = 0.0;
  for (const auto& one : runs) {
    out.counts.push_back(one.count);
    out.flagged_runs += one.flagged;
    sum += static_cast<double>(one.count);
    positive += one.count > 0;
  }
  if (n_runs) {
    out.mean = sum / static_cast<double>(n_runs);
    out.fraction_positive = static_cast<double>(positive) / static_cast<double>(n_runs);
  }
  return out;
}

}  // namespace treespike
