#include "treespike/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treespike/batch.hpp"
#include "treespike/coupling.hpp"
#include "treespike/stats.hpp"

namespace treespike {

std::string to_string(Proxy p) { return p == Proxy::global ? "global" : "local"; }

Proxy parse_proxy(const std::string& s) {
  if (s == "global") return Proxy::global;
  if (s == "local") return Proxy::local;
  throw std::invalid_argument("proxy must be 'global' or 'local', got '" + s + "'");
}

double nu_rho(const PotentialConfig& config, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be > 0");
  double sum = 0.0;
  for (const auto& [id, pot] : config.support()) sum += static_cast<double>(pot) * std::pow(rho, level(id));
  return sum;
}

namespace {

// inf over rho > 0 of w1 / rho + w2 (d - 1) rho - 1 - gamma.
double best_kappa(const TreeSpec& s, double gamma) {
  return 2.0 * std::sqrt(static_cast<double>(s.w_up) * s.w_down * (s.d - 1)) - 1.0 - gamma;
}

double integral_exp(double kappa, double a, double b) {
  if (kappa == 0.0) return b - a;
  return (std::exp(kappa * b) - std::exp(kappa * a)) / kappa;
}

void check_runs(std::size_t n_runs, std::size_t at_least) {
  if (n_runs < at_least)
    throw std::invalid_argument("n_runs must be >= " + std::to_string(at_least));
}

void require_uncertified(const SimParams& p, const char* what) {
  if (p.certify_eps > 0.0)
    throw std::invalid_argument(std::string("certification stops runs early; disable it for ") + what);
}

SimParams replicate_params(const SimParams& params, std::size_t r) {
  SimParams p = params;
  p.replicate = r;
  p.record_events = false;
  return p;
}

}  // namespace

double phi_gamma(double rho, double gamma, const TreeSpec& spec) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be > 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be ≥ 0");
  const double w1 = spec.w_up, c = static_cast<double>(spec.w_down) * (spec.d - 1);
  const double value = std::exp(w1 / rho + c * rho - 1.0 - gamma);
  if (rho == 1.0) {
    const double other = std::exp(static_cast<double>(lambda(spec)) - 1.0 - gamma);
    if (std::abs(value - other) > 1e-12 * std::max(1.0, other)) throw std::logic_error("phi_gamma branches disagree at rho = 1");
  }
  return value;
}

double rho_star(const TreeSpec& spec) {
  if (spec.d < 2) throw std::invalid_argument("d must be >= 2");
  if (spec.w_down == 0) throw std::invalid_argument("rho* is undefined for w_down = 0");
  if (spec.w_up == 0) throw std::invalid_argument("rho* is 0 for w_up = 0, outside rho > 0");
  return std::sqrt(static_cast<double>(spec.w_up) / (static_cast<double>(spec.w_down) * (spec.d - 1)));
}

double local_upper_bound(const TreeSpec& spec) { return best_kappa(spec, 0.0); }
double global_lower_bound(const TreeSpec& spec) { return spec.d - 2.0; }
double global_upper_bound(const TreeSpec& spec) { return static_cast<double>(lambda(spec)) - 1.0; }

bool proxy_event(const Trajectory& tr, Proxy proxy, double horizon) {
  if (proxy == Proxy::local) return tr.root_spikes_in(0.5 * horizon, horizon) > 0;
  return tr.survives();
}

namespace {

struct Outcome {
  bool success = false;
  bool flagged = false;
  bool certified = false;
  double certify_error = 0.0;
};

Outcome outcome_of(const Trajectory& tr, Proxy proxy, double horizon) {
  return {proxy_event(tr, proxy, horizon), tr.terminated_early, tr.reason == StopReason::certified_survival,
          tr.certify_error};
}

SurvivalEstimate summarize_outcomes(const std::vector<Outcome>& runs, Proxy proxy, double horizon) {
  SurvivalEstimate out;
  out.proxy = proxy;
  out.horizon = horizon;
  out.n_runs = runs.size();
  for (const auto& o : runs) {
    out.successes += o.success;
    out.flagged_runs += o.flagged;
    out.certified_runs += o.certified;
    out.certify_error = std::max(out.certify_error, o.certify_error);
  }
  if (out.n_runs) {
    out.p_hat = static_cast<double>(out.successes) / static_cast<double>(out.n_runs);
    out.ci_half_width = stats::proportion_half_width(out.successes, out.n_runs);
  }
  return out;
}

}  // namespace

SurvivalEstimate summarize(const std::vector<Trajectory>& runs, Proxy proxy, double horizon) {
  std::vector<Outcome> outcomes;
  outcomes.reserve(runs.size());
  for (const auto& tr : runs) outcomes.push_back(outcome_of(tr, proxy, horizon));
  return summarize_outcomes(outcomes, proxy, horizon);
}

SurvivalEstimate estimate_survival(const SimParams& params, Proxy proxy, std::size_t n_runs) {
  params.validate();
  check_runs(n_runs, 100);
  if (proxy == Proxy::local) require_uncertified(params, "the local proxy");
  auto outcomes = parallel_map(n_runs, [&](std::size_t r) {
    return outcome_of(run(replicate_params(params, r)), proxy, params.horizon);
  });
  return summarize_outcomes(outcomes, proxy, params.horizon);
}

double first_moment_root_bound(const TreeSpec& spec, double gamma, double a, double b) {
  if (!(0.0 <= a && a <= b)) throw std::invalid_argument("window must satisfy 0 <= a <= b");
  return integral_exp(best_kappa(spec, gamma), a, b);
}

LocalBracketResult local_survival_bracket(const SimParams& params, const std::vector<double>& horizons,
                                          int max_level, std::size_t n_runs) {
  check_runs(n_runs, 100);
  if (horizons.empty()) throw std::invalid_argument("horizon list is empty");
  if (!std::is_sorted(horizons.begin(), horizons.end()) || !(horizons.front() > 0.0))
    throw std::invalid_argument("horizons must be positive and sorted");
  SimParams p = params;
  p.engine = EngineKind::gillespie;
  p.horizon = horizons.back();
  p.certify_eps = 0.0;
  p.grid.clear();
  p.pruning = LevelPruning{max_level, {}};
  for (double t : horizons) p.pruning->windows.emplace_back(0.5 * t, t);
  p.validate();

  struct One {
    std::vector<bool> hit;
    std::vector<double> budget;
    bool flagged = false;
  };
  auto runs = parallel_map(n_runs, [&](std::size_t r) {
    const Trajectory tr = run(replicate_params(p, r));
    One one;
    one.flagged = tr.terminated_early;
    for (std::size_t w = 0; w < horizons.size(); ++w) {
      one.hit.push_back(tr.root_spikes_in(0.5 * horizons[w], horizons[w]) > 0);
      one.budget.push_back(tr.prune_budget[w]);
    }
    return one;
  });

  LocalBracketResult out;
  out.n_runs = n_runs;
  out.max_level = max_level;
  for (const auto& one : runs) out.flagged_runs += one.flagged;
  for (std::size_t w = 0; w < horizons.size(); ++w) {
    stats::Welford lower, upper, budget;
    for (const auto& one : runs) {
      const double hit = one.hit[w] ? 1.0 : 0.0;
      lower.add(hit);
      budget.add(one.budget[w]);
      upper.add(hit + one.budget[w]);
    }
    LocalBracket b;
    b.horizon = horizons[w];
    b.p_lower = lower.mean();
    b.ci_lower = stats::kZ * lower.standard_error();
    b.budget_mean = budget.mean();
    b.p_upper = upper.mean();
    b.ci_upper = stats::kZ * upper.standard_error();
    b.first_moment_bound = first_moment_root_bound(p.spec, p.gamma, 0.5 * horizons[w], horizons[w]);
    out.points.push_back(b);
  }
  return out;
}

std::vector<CurvePoint> mean_potential_curve(const SimParams& params, const std::vector<double>& grid,
                                             std::size_t n_runs) {
  check_runs(n_runs, 1);
  require_uncertified(params, "mean curves");
  SimParams p = params;
  p.grid = grid;
  p.validate();
  auto totals = parallel_map(n_runs, [&](std::size_t r) {
    const Trajectory tr = run(replicate_params(p, r));
    std::vector<double> v;
    for (const auto& s : tr.samples) v.push_back(static_cast<double>(s.total_potential));
    return v;
  });
  const double d = p.spec.d, lam = static_cast<double>(lambda(p.spec));
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    stats::Welford acc;
    for (const auto& v : totals)
      if (i < v.size()) acc.add(v[i]);
    CurvePoint c;
    c.t = grid[i];
    c.mean = acc.mean();
    c.ci = stats::kZ * acc.standard_error();
    c.n = acc.count();
    c.lower_envelope = std::exp((d - 2.0 - p.gamma) * c.t);
    c.upper_envelope = std::exp((lam - 1.0 - p.gamma) * c.t);
    out.push_back(c);
  }
  return out;
}

SupermartingaleProbe supermartingale_probe(const SimParams& params, const std::vector<double>& grid,
                                           std::size_t n_runs) {
  check_runs(n_runs, 2);
  require_uncertified(params, "the supermartingale probe");
  SimParams p = params;
  p.grid = grid;
  p.rho = rho_star(p.spec);
  p.validate();
  const double log_phi = std::log(phi_gamma(p.rho, p.gamma, p.spec));
  auto values = parallel_map(n_runs, [&](std::size_t r) {
    const Trajectory tr = run(replicate_params(p, r));
    std::vector<double> v;
    for (const auto& s : tr.samples) v.push_back(s.t == 0.0 ? s.nu : s.nu * std::exp(-log_phi * s.t));
    return v;
  });
  SupermartingaleProbe out;
  out.assertion_applies = p.gamma > local_upper_bound(p.spec);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    stats::Welford acc;
    for (const auto& v : values)
      if (i < v.size()) acc.add(v[i]);
    out.points.push_back({grid[i], acc.mean(), acc.standard_error(), stats::kZ * acc.standard_error()});
  }
  for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
    const auto& a = out.points[i];
    const auto& b = out.points[i + 1];
    if (b.mean - a.mean > 2.0 * std::hypot(a.standard_error, b.standard_error)) out.flagged_pairs.push_back(i);
  }
  return out;
}

CriticalBracket theory_bracket(Proxy target, const TreeSpec& spec) {
  CriticalBracket b;
  b.target = target;
  if (target == Proxy::local) {
    b.theory_lower = 0.0;
    b.theory_upper = local_upper_bound(spec);
  } else {
    b.theory_lower = global_lower_bound(spec);
    b.theory_upper = global_upper_bound(spec);
  }
  return b;
}

ScanResult bracket_from(Proxy target, const TreeSpec& spec, std::vector<double> gammas,
                        std::vector<SurvivalEstimate> estimates) {
  if (gammas.size() != estimates.size()) throw std::invalid_argument("one estimate per gamma is required");
  ScanResult out;
  out.bracket = theory_bracket(target, spec);
  std::optional<std::size_t> lo;
  for (std::size_t i = 0; i < estimates.size(); ++i)
    if (estimates[i].lower() > 0.0) lo = i;
  if (lo) {
    for (std::size_t i = *lo + 1; i < estimates.size(); ++i) {
      if (estimates[i].lower() <= 0.0) {
        out.bracket.found = true;
        out.bracket.gamma_lo = gammas[*lo];
        out.bracket.gamma_hi = gammas[i];
        break;
      }
    }
  }
  for (std::size_t i = 0; i + 1 < estimates.size(); ++i)
    if (estimates[i + 1].lower() > estimates[i].upper()) out.non_monotone.push_back(i);
  out.gammas = std::move(gammas);
  out.estimates = std::move(estimates);
  return out;
}

ScanResult gamma_scan(Proxy target, const SimParams& params, const std::vector<double>& gamma_grid,
                      std::size_t n_runs) {
  if (gamma_grid.empty()) throw std::invalid_argument("gamma grid is empty");
  if (!std::is_sorted(gamma_grid.begin(), gamma_grid.end())) throw std::invalid_argument("gamma grid must be sorted");
  std::vector<SurvivalEstimate> estimates;
  for (double g : gamma_grid) {
    SimParams p = params;
    p.gamma = g;
    estimates.push_back(estimate_survival(p, target, n_runs));
  }
  return bracket_from(target, params.spec, gamma_grid, std::move(estimates));
}

ChainedEstimate chained_survival(const std::vector<double>& gammas, const SimParams& params, Proxy proxy,
                                 std::size_t n_runs) {
  check_runs(n_runs, 100);
  if (proxy == Proxy::local) require_uncertified(params, "the local proxy");
  struct One {
    std::vector<Outcome> legs;
    std::uint64_t violations = 0;
  };
  auto runs = parallel_map(n_runs, [&](std::size_t r) {
    const CoupledChain chain = run_gamma_chain(gammas, replicate_params(params, r));
    One one;
    one.violations = chain.violation_count;
    for (const auto& leg : chain.legs) one.legs.push_back(outcome_of(leg, proxy, params.horizon));
    return one;
  });
  ChainedEstimate out;
  out.gammas = gammas;
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    std::vector<Outcome> leg;
    for (const auto& one : runs) leg.push_back(one.legs[j]);
    out.estimates.push_back(summarize_outcomes(leg, proxy, params.horizon));
  }
  for (const auto& one : runs) {
    out.pathwise_violations += one.violations;
    bool bad = false;
    for (std::size_t j = 0; j + 1 < one.legs.size(); ++j) bad |= one.legs[j + 1].success && !one.legs[j].success;
    out.non_monotone_runs += bad;
  }
  return out;
}

GrowthProbe growth_on_survival_probe(const SimParams& params, const std::vector<double>& horizons,
                                     std::size_t n_runs) {
  check_runs(n_runs, 1);
  require_uncertified(params, "the growth probe");
  if (horizons.empty()) throw std::invalid_argument("horizon list is empty");
  SimParams p = params;
  p.horizon = horizons.back();
  p.grid = horizons;
  p.validate();
  auto totals = parallel_map(n_runs, [&](std::size_t r) {
    const Trajectory tr = run(replicate_params(p, r));
    std::vector<double> v;
    for (const auto& s : tr.samples) v.push_back(static_cast<double>(s.total_potential));
    return v;
  });
  GrowthProbe out;
  out.increasing = true;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    stats::Welford acc;
    for (const auto& v : totals)
      if (i < v.size() && v[i] > 0.0) acc.add(v[i]);
    GrowthPoint g{horizons[i], acc.count(), acc.mean(), stats::kZ * acc.standard_error()};
    if (g.survivors == 0) out.degenerate = true;
    if (i && !(g.conditional_mean > out.points.back().conditional_mean)) out.increasing = false;
    out.points.push_back(g);
  }
  if (out.degenerate) out.increasing = false;
  return out;
}

}  // namespace treespike
