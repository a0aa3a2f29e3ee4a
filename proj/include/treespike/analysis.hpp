#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treespike/dynamics.hpp"

namespace treespike {

enum class Proxy {
  global,  // total potential >= 1 at T (certified runs count as alive)
  local,   // at least one root spike in [T/2, T]
};
std::string to_string(Proxy p);
Proxy parse_proxy(const std::string& s);

/// sum_i xi(i) rho^level(i); rho must be > 0.
double nu_rho(const PotentialConfig& config, double rho);

/// exp(w1 / rho + w2 (d - 1) rho - 1 - gamma). At rho = 1 this equals
/// exp(lambda - 1 - gamma), which is asserted.
double phi_gamma(double rho, double gamma, const TreeSpec& spec);

/// sqrt(w1 / (w2 (d - 1))); throws std::invalid_argument when w_down = 0 or w_up = 0.
double rho_star(const TreeSpec& spec);

/// Known bounds on the critical leak rates.
double local_upper_bound(const TreeSpec& spec);  // 2 sqrt(w1 w2 (d - 1)) - 1
double global_lower_bound(const TreeSpec& spec);  // d - 2
double global_upper_bound(const TreeSpec& spec);  // lambda - 1

struct SurvivalEstimate {
  double p_hat = 0.0;
  double ci_half_width = 0.0;  // 3 sigma, normal approximation
  std::uint64_t n_runs = 0;
  std::uint64_t successes = 0;
  double horizon = 0.0;
  Proxy proxy = Proxy::global;
  std::uint64_t flagged_runs = 0;    // safety-capped; counted as failures
  std::uint64_t certified_runs = 0;  // stopped early by the survival certificate
  double certify_error = 0.0;        // upper bound on the bias from certification (per run)

  double lower() const { return p_hat - ci_half_width; }
  double upper() const { return p_hat + ci_half_width; }
};

/// Monte Carlo estimate over replicates 0..n_runs-1 of params.seed (n_runs >= 100).
SurvivalEstimate estimate_survival(const SimParams& params, Proxy proxy, std::size_t n_runs);

/// Estimates built from one proxy outcome per run.
SurvivalEstimate summarize(const std::vector<Trajectory>& runs, Proxy proxy, double horizon);
bool proxy_event(const Trajectory& tr, Proxy proxy, double horizon);

/// Local proxy at several horizons from level-pruned runs to max(horizons).
/// The pruned process is a pathwise lower bound, and each run carries a
/// budget bounding the expected number of root spikes the pruning removed,
/// so  p_lower - ci <= p <= p_upper + ci_upper  (up to Monte Carlo error).
struct LocalBracket {
  double horizon = 0.0;
  double p_lower = 0.0;
  double ci_lower = 0.0;
  double budget_mean = 0.0;
  double p_upper = 0.0;  // mean of indicator + budget; may exceed 1
  double ci_upper = 0.0;
  double first_moment_bound = 0.0;  // analytic: integral over [T/2, T] of min_rho exp(kappa(rho) t)
};
struct LocalBracketResult {
  std::vector<LocalBracket> points;
  std::uint64_t n_runs = 0;
  std::uint64_t flagged_runs = 0;
  int max_level = 0;
};
LocalBracketResult local_survival_bracket(const SimParams& params, const std::vector<double>& horizons,
                                          int max_level, std::size_t n_runs);

/// Integral over [a, b] of min over rho of exp(kappa(rho) t): a bound on the
/// expected number of root spikes in [a, b] from e_o.
double first_moment_root_bound(const TreeSpec& spec, double gamma, double a, double b);

struct CurvePoint {
  double t = 0.0;
  double mean = 0.0;
  double ci = 0.0;  // 3 sigma
  double lower_envelope = 0.0;
  double upper_envelope = 0.0;
  std::uint64_t n = 0;
};
/// Mean total potential on `grid` with the envelopes exp((d - 2 - gamma) t) and exp((lambda - 1 - gamma) t).
std::vector<CurvePoint> mean_potential_curve(const SimParams& params, const std::vector<double>& grid,
                                             std::size_t n_runs);

struct MartingalePoint {
  double t = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
  double ci = 0.0;  // 3 sigma
};
struct SupermartingaleProbe {
  std::vector<MartingalePoint> points;
  bool assertion_applies = false;  // gamma above the local bound
  std::vector<std::size_t> flagged_pairs;  // i where mean[i+1] - mean[i] > 2 sqrt(se_i^2 + se_{i+1}^2)
  bool non_increasing() const { return flagged_pairs.empty(); }
};
/// E[nu_rho*(xi_t) / phi_gamma(rho*)^t] on the grid.
SupermartingaleProbe supermartingale_probe(const SimParams& params, const std::vector<double>& grid,
                                           std::size_t n_runs);

struct CriticalBracket {
  Proxy target = Proxy::global;
  bool found = false;
  double gamma_lo = 0.0;  // largest gamma whose estimate is significantly > 0
  double gamma_hi = 0.0;  // smallest gamma whose interval reaches 0
  double theory_lower = 0.0;
  double theory_upper = 0.0;
};
struct ScanResult {
  std::vector<double> gammas;
  std::vector<SurvivalEstimate> estimates;
  CriticalBracket bracket;
  std::vector<std::size_t> non_monotone;  // i where estimate i+1 exceeds estimate i beyond both intervals
};
/// Theory annotation only (no simulation).
CriticalBracket theory_bracket(Proxy target, const TreeSpec& spec);
ScanResult gamma_scan(Proxy target, const SimParams& params, const std::vector<double>& gamma_grid,
                      std::size_t n_runs);
/// Bracket and monotonicity report from estimates already computed.
ScanResult bracket_from(Proxy target, const TreeSpec& spec, std::vector<double> gammas,
                        std::vector<SurvivalEstimate> estimates);

/// Shared-seed estimates at increasing gammas through one coupled chain per run.
struct ChainedEstimate {
  std::vector<double> gammas;
  std::vector<SurvivalEstimate> estimates;
  std::uint64_t pathwise_violations = 0;    // domination breaches inside the coupled runs
  std::uint64_t non_monotone_runs = 0;      // runs where a higher gamma survived and a lower one did not
};
ChainedEstimate chained_survival(const std::vector<double>& gammas, const SimParams& params, Proxy proxy,
                                 std::size_t n_runs);

struct GrowthPoint {
  double horizon = 0.0;
  std::uint64_t survivors = 0;
  double conditional_mean = 0.0;
  double ci = 0.0;
};
struct GrowthProbe {
  std::vector<GrowthPoint> points;
  bool degenerate = false;  // some horizon had no surviving runs
  bool increasing = false;  // conditional means strictly increase along the grid
};
GrowthProbe growth_on_survival_probe(const SimParams& params, const std::vector<double>& horizons,
                                     std::size_t n_runs);

}  // namespace treespike
