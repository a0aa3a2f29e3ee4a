#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "treespike/arena.hpp"
#include "treespike/config.hpp"

namespace treespike::oracle {

/// Extinction probability q of the Galton-Watson process with offspring law
/// p(0) = gamma / (1 + gamma), p(d - 1) = 1 / (1 + gamma).
struct GwExtinction {
  double q = 1.0;
  double survival = 0.0;
};

/// Smallest fixed point of q = (gamma + q^(d-1)) / (1 + gamma) in [0, 1] by
/// bisection to 1e-12; exactly 1 when (d - 1) / (1 + gamma) <= 1.
GwExtinction gw_extinction(int d, double gamma);

/// Upper bound on the probability that the continuous-time version (lifetime
/// Exponential(1 + gamma)) started from one individual is extinct by time t.
/// Solves F' = gamma + F^(d-1) - (1 + gamma) F, F(0) = 0 with RK4 and adds a
/// 1e-9 margin; never exceeds q.
double gw_extinction_by(int d, double gamma, double t);

/// 1 - q: a lower bound for global survival from e_o (zeta <= eta <= xi).
double survival_lower_bound(int d, double gamma);

/// States of a finite graph with potentials in {0..cap}, encoded mixed radix
/// (vertex 0 is the least significant digit).
struct StateSpace {
  int n = 0;
  std::uint32_t cap = 1;
  std::uint64_t count = 0;

  std::vector<std::uint32_t> decode(std::uint64_t s) const;
  std::uint64_t encode(const std::vector<std::uint32_t>& x) const;
  std::string label(std::uint64_t s) const;
};

/// Off-diagonal rate a + gamma * b with integer a, b.
struct RateEntry {
  std::uint64_t to = 0;
  std::int64_t a = 0;
  std::int64_t b = 0;
};

struct Generator {
  StateSpace space;
  double gamma = 0.0;
  std::vector<std::vector<RateEntry>> rows;  // off-diagonal entries per state
  std::vector<RateEntry> diagonal;           // .to == row index; a, b <= 0

  double rate(const RateEntry& e) const { return static_cast<double>(e.a) + gamma * static_cast<double>(e.b); }
  /// Integer check: every row's (a, b) coefficients sum to exactly zero.
  bool rows_sum_to_zero() const;
  /// Dense matrix (row-major); only for small spaces.
  std::vector<double> dense() const;
};

inline constexpr std::uint64_t kMaxOracleStates = 10'000'000;

/// Exact generator of the saturating dynamics on `graph`. Binary mode leaks
/// at rate gamma per active neuron; capped(C) at rate gamma * potential.
/// Throws std::invalid_argument for unbounded mode or more than kMaxOracleStates states.
Generator enumerate_and_build(const FiniteGraph& graph, double gamma, Mode mode);

struct TransientDistribution {
  double t = 0.0;
  double eps = 0.0;
  std::vector<double> probabilities;
  double truncation_error = 0.0;  // 1 - (Poisson mass kept); <= eps
  std::uint64_t terms = 0;
};

/// Uniformization with a Poisson-tail cutoff at eps.
TransientDistribution transient(const Generator& gen, std::uint64_t initial_state, double t, double eps);

nlohmann::json to_json(const Generator& gen, const TransientDistribution& dist, const std::string& graph_label,
                       const std::string& mode_label);

/// Parses "path:N", "cycle:N", "star:K" or "single".
FiniteGraph parse_graph(const std::string& spec, std::uint32_t w = 1);

}  // namespace treespike::oracle
