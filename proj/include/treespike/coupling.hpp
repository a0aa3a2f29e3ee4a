#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "treespike/dynamics.hpp"

namespace treespike {

/// Two legs on shared marks; the high leg must stay below the low leg at every vertex.
struct CoupledPair {
  Trajectory traj_low;
  Trajectory traj_high;
  std::uint64_t violation_count = 0;
  std::optional<EventRecord> first_violation;
  std::vector<std::uint64_t> violations_at_sample;  // cumulative, per grid time
};

/// Legs for increasing gamma; each consecutive pair is checked like a CoupledPair.
struct CoupledChain {
  std::vector<double> gammas;
  std::vector<Trajectory> legs;
  std::uint64_t violation_count = 0;
  std::optional<EventRecord> first_violation;
};

struct CoupledTriple {
  Trajectory zeta;
  Trajectory eta;
  Trajectory xi;
  std::uint64_t violation_count = 0;
  std::optional<EventRecord> first_violation;
  std::uint64_t blocked_reactivations = 0;  // zeta spikes that reached an already used neuron
  std::vector<std::uint64_t> violations_at_sample;
};

/// Offspring law p(0) = gamma / (1 + gamma), p(d - 1) = 1 / (1 + gamma).
struct BranchingParams {
  int d = 3;
  double gamma = 0.0;

  double p0() const { return gamma / (1.0 + gamma); }
  double p_branch() const { return 1.0 / (1.0 + gamma); }
  double mean_offspring() const { return (d - 1) / (1.0 + gamma); }
  void validate() const;
};

/// Runs the pair (gamma_low, gamma_high) from e_o. Spike marks are shared;
/// leak marks run at gamma_high and each one applies to the low leg only when
/// its acceptance uniform is below gamma_low / gamma_high. params.gamma is
/// ignored; params.engine picks per-vertex clocks (graphical) or the direct
/// method on the same marks (gillespie). With `inject_fault` the high leg
/// gets its own spike marks, which breaks the coupling on purpose.
CoupledPair run_gamma_pair(double gamma_low, double gamma_high, const SimParams& params, bool inject_fault = false);

/// Same construction for a sorted list of gammas, all driven by leak marks at the largest one.
CoupledChain run_gamma_chain(const std::vector<double>& gammas, const SimParams& params);

/// xi (params.mode, must be unbounded) with the binary process eta on the same
/// marks; eta only ever sees the k = 1 leak mark. Low leg = xi, high leg = eta.
CoupledPair run_xi_eta_pair(const SimParams& params);

/// Non-spatial branching process from one individual: each individual lives
/// Exponential(1 + gamma) and then leaves d - 1 children with probability
/// 1 / (1 + gamma), none otherwise. Samples carry the population as both
/// total_potential and active_count. With certify_eps > 0 the run stops once
/// the population is large enough that extinction before T has probability
/// <= certify_eps.
Trajectory run_zeta(const BranchingParams& bp, double horizon, std::uint64_t seed, std::uint64_t replicate,
                    const std::vector<double>& grid = {}, double certify_eps = 0.0);

/// zeta (tree-embedded: spikes activate the children only, a neuron is used at
/// most once), eta and xi from e_o on shared marks. Checks zeta <= eta <= xi
/// at every touched neuron and in population size. Needs w_up, w_down >= 1.
CoupledTriple run_zeta_eta_xi_triple(const SimParams& params);

}  // namespace treespike
