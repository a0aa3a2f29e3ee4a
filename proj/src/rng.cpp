#include "treespike/rng.hpp"

#include <algorithm>
#include <limits>

namespace treespike::rng {

namespace {

// P(N <= n) for N ~ Poisson(1).
struct PoissonOneTable {
  std::array<double, PoissonClock::kMaxPerBlock> cdf{};
  PoissonOneTable() {
    double term = std::exp(-1.0), acc = 0.0;
    for (int n = 0; n < PoissonClock::kMaxPerBlock; ++n) {
      acc += term;
      cdf[static_cast<std::size_t>(n)] = acc;
      term /= static_cast<double>(n + 1);
    }
  }
};

const PoissonOneTable kPoissonOne;

}  // namespace

int PoissonClock::block_arrivals(std::uint32_t b, double* times) const {
  auto head = uniforms2(key_, stream_, b, 0);
  int n = 0;
  while (n < kMaxPerBlock - 1 && head[0] >= kPoissonOne.cdf[static_cast<std::size_t>(n)]) ++n;
  // Position 0 reuses the spare head uniform; later positions take two per call.
  std::array<double, 2> pair{};
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      times[0] = head[1];
      continue;
    }
    const int slot = (i - 1) % 2;
    if (slot == 0) pair = uniforms2(key_, stream_, b, static_cast<std::uint32_t>(1 + (i - 1) / 2));
    times[i] = pair[static_cast<std::size_t>(slot)];
  }
  std::sort(times, times + n);
  const double base = static_cast<double>(b);
  for (int i = 0; i < n; ++i) times[i] = (base + times[i]) / rate_;
  return n;
}

Arrival PoissonClock::next_after(double t) const {
  if (!(rate_ > 0.0)) return {};
  double scaled = t * rate_;
  if (scaled < 0.0) scaled = 0.0;
  if (scaled >= static_cast<double>(std::numeric_limits<std::uint32_t>::max())) return {};
  auto b = static_cast<std::uint32_t>(scaled);
  if (b > 0 && static_cast<double>(b) / rate_ > t) --b;
  double times[kMaxPerBlock];
  for (;; ++b) {
    int n = block_arrivals(b, times);
    for (int i = 0; i < n; ++i)
      if (times[i] > t) return {times[i], b, static_cast<std::uint32_t>(i)};
    if (b == std::numeric_limits<std::uint32_t>::max()) return {};
  }
}

}  // namespace treespike::rng
