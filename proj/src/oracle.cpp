#include "treespike/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace treespike::oracle {

GwExtinction gw_extinction(int d, double gamma) {
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  const double mean = static_cast<double>(d - 1) / (1.0 + gamma);
  if (mean <= 1.0) return {1.0, 0.0};
  if (gamma == 0.0) return {0.0, 1.0};
  const double k = static_cast<double>(d - 1);
  auto g = [&](double q) { return (gamma + std::pow(q, k)) / (1.0 + gamma) - q; };
  // g(0) > 0 and g is convex with g(1) = 0, g'(1) > 0; its minimizer has g < 0.
  double lo = 0.0;
  double hi = std::pow((1.0 + gamma) / k, 1.0 / (k - 1.0));
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  return {q, 1.0 - q};
}

namespace {

double integer_power(double x, int k) {
  double r = 1.0;
  for (; k > 0; k >>= 1, x *= x)
    if (k & 1) r *= x;
  return r;
}

double solve_extinction_by(int d, double gamma, double t) {
  const double q = gw_extinction(d, gamma).q;
  const int k = d - 1;
  auto rhs = [&](double f) { return gamma + integer_power(f, k) - (1.0 + gamma) * f; };
  const double h = std::min(0.01, 0.05 / (1.0 + gamma + k));
  const auto steps = static_cast<std::uint64_t>(std::ceil(t / h));
  if (steps > 50'000'000) return q;
  const double dt = t / static_cast<double>(steps);
  double f = 0.0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double k1 = rhs(f), k2 = rhs(f + 0.5 * dt * k1), k3 = rhs(f + 0.5 * dt * k2), k4 = rhs(f + dt * k3);
    f += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (f >= q) return q;
  }
  return std::min(q, f + 1e-9);
}

}  // namespace

double gw_extinction_by(int d, double gamma, double t) {
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  if (t == 0.0) return 0.0;
  // Every replicate of a batch asks the same question.
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, double> cache;
  const auto key = std::make_tuple(d, gamma, t);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double f = solve_extinction_by(d, gamma, t);
  std::lock_guard lock(mutex);
  if (cache.size() > 4096) cache.clear();
  cache.emplace(key, f);
  return f;
}

double survival_lower_bound(int d, double gamma) { return gw_extinction(d, gamma).survival; }

std::vector<std::uint32_t> StateSpace::decode(std::uint64_t s) const {
  std::vector<std::uint32_t> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(s % (cap + 1));
    s /= (cap + 1);
  }
  return x;
}

std::uint64_t StateSpace::encode(const std::vector<std::uint32_t>& x) const {
  std::uint64_t s = 0;
  for (int i = n - 1; i >= 0; --i) s = s * (cap + 1) + x[static_cast<std::size_t>(i)];
  return s;
}

std::string StateSpace::label(std::uint64_t s) const {
  auto x = decode(s);
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (cap > 9 && i) out += ',';
    out += std::to_string(x[i]);
  }
  return out;
}

bool Generator::rows_sum_to_zero() const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::int64_t a = diagonal[r].a, b = diagonal[r].b;
    for (const auto& e : rows[r]) {
      a += e.a;
      b += e.b;
    }
    if (a != 0 || b != 0) return false;
  }
  return true;
}

std::vector<double> Generator::dense() const {
  const auto n = static_cast<std::size_t>(space.count);
  std::vector<double> m(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    m[r * n + r] = rate(diagonal[r]);
    for (const auto& e : rows[r]) m[r * n + e.to] += rate(e);
  }
  return m;
}

Generator enumerate_and_build(const FiniteGraph& graph, double gamma, Mode mode) {
  graph.validate();
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (mode.kind == ModeKind::unbounded) throw std::invalid_argument("the exact oracle needs binary or capped mode");
  Generator gen;
  gen.gamma = gamma;
  gen.space.n = graph.size();
  gen.space.cap = mode.limit();
  double count = std::pow(static_cast<double>(gen.space.cap) + 1.0, gen.space.n);
  if (count > static_cast<double>(kMaxOracleStates))
    throw std::invalid_argument("state space too large for the exact oracle");
  gen.space.count = static_cast<std::uint64_t>(count);
  gen.rows.resize(gen.space.count);
  gen.diagonal.resize(gen.space.count);

  for (std::uint64_t s = 0; s < gen.space.count; ++s) {
    auto x = gen.space.decode(s);
    auto& row = gen.rows[s];
    auto add = [&row](std::uint64_t to, std::int64_t a, std::int64_t b) {
      for (auto& e : row)
        if (e.to == to) {
          e.a += a;
          e.b += b;
          return;
        }
      row.push_back({to, a, b});
    };
    std::int64_t out_a = 0, out_b = 0;
    for (int i = 0; i < gen.space.n; ++i) {
      const auto xi = x[static_cast<std::size_t>(i)];
      if (xi == 0) continue;
      auto y = x;
      y[static_cast<std::size_t>(i)] = 0;
      for (auto [j, w] : graph.adjacency[static_cast<std::size_t>(i)])
        y[static_cast<std::size_t>(j)] = std::min<std::uint32_t>(gen.space.cap, y[static_cast<std::size_t>(j)] + w);
      const auto spike_to = gen.space.encode(y);
      if (spike_to != s) {
        add(spike_to, 1, 0);
        ++out_a;
      }
      const std::int64_t leak_mult = mode.kind == ModeKind::binary ? 1 : static_cast<std::int64_t>(xi);
      if (gamma > 0.0) {
        auto z = x;
        --z[static_cast<std::size_t>(i)];
        add(gen.space.encode(z), 0, leak_mult);
        out_b += leak_mult;
      }
    }
    std::sort(row.begin(), row.end(), [](const RateEntry& l, const RateEntry& r) { return l.to < r.to; });
    gen.diagonal[s] = {s, -out_a, -out_b};
  }
  return gen;
}

TransientDistribution transient(const Generator& gen, std::uint64_t initial_state, double t, double eps) {
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (initial_state >= gen.space.count) throw std::invalid_argument("initial state out of range");
  const auto n = static_cast<std::size_t>(gen.space.count);
  TransientDistribution out;
  out.t = t;
  out.eps = eps;
  out.probabilities.assign(n, 0.0);

  double rate_max = 0.0;
  for (const auto& d : gen.diagonal) rate_max = std::max(rate_max, -gen.rate(d));
  if (t == 0.0 || rate_max == 0.0) {
    out.probabilities[initial_state] = 1.0;
    return out;
  }
  const double mu = rate_max * t;

  // pi_{k+1} = pi_k P with P = I + Q / rate_max.
  std::vector<double> pi(n, 0.0), next(n, 0.0);
  pi[initial_state] = 1.0;
  double kept = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    const double w = std::exp(-mu + static_cast<double>(k) * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0));
    for (std::size_t s = 0; s < n; ++s) out.probabilities[s] += w * pi[s];
    kept += w;
    out.terms = k + 1;
    if (1.0 - kept <= eps && static_cast<double>(k) >= mu) break;
    if (k > 100000 + static_cast<std::uint64_t>(10.0 * mu)) throw std::runtime_error("uniformization did not converge");
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      if (pi[s] == 0.0) continue;
      next[s] += pi[s] * (1.0 + gen.rate(gen.diagonal[s]) / rate_max);
      for (const auto& e : gen.rows[s]) next[e.to] += pi[s] * gen.rate(e) / rate_max;
    }
    pi.swap(next);
  }
  out.truncation_error = std::max(0.0, 1.0 - kept);
  return out;
}

nlohmann::json to_json(const Generator& gen, const TransientDistribution& dist, const std::string& graph_label,
                       const std::string& mode_label) {
  nlohmann::json j;
  j["graph"] = graph_label;
  j["mode"] = mode_label;
  j["gamma"] = gen.gamma;
  j["t"] = dist.t;
  j["eps"] = dist.eps;
  j["truncation_error"] = dist.truncation_error;
  j["terms"] = dist.terms;
  auto& states = j["states"] = nlohmann::json::array();
  for (std::uint64_t s = 0; s < gen.space.count; ++s)
    states.push_back({{"label", gen.space.label(s)}, {"probability", dist.probabilities[s]}});
  return j;
}

FiniteGraph parse_graph(const std::string& spec, std::uint32_t w) {
  if (spec == "single") {
    FiniteGraph g;
    g.adjacency.resize(1);
    return g;
  }
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("graph spec must be path:N, cycle:N, star:K or single");
  const std::string kind = spec.substr(0, colon);
  int n = 0;
  try {
    n = std::stoi(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("graph size is not an integer: " + spec);
  }
  if (n < 1) throw std::invalid_argument("graph size must be positive");
  if (kind == "path") return FiniteGraph::path(n, w);
  if (kind == "cycle") return FiniteGraph::cycle(n, w);
  if (kind == "star") return FiniteGraph::star(n, w);
  throw std::invalid_argument("unknown graph kind '" + kind + "'");
}

}  // namespace treespike::oracle
