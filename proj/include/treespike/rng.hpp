#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace treespike::rng {

/// Philox4x32-10 (Salmon et al., SC'11). Stateless: output is a pure
/// function of the 128-bit counter and 64-bit key.
using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32(Counter ctr, Key key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// splitmix64 finalizer; used to derive keys and stream ids.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

/// [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

inline Key make_key(std::uint64_t k) { return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)}; }

/// Key for one replicate of a batch seeded with `seed`.
inline Key replicate_key(std::uint64_t seed, std::uint64_t replicate) {
  return make_key(combine(mix64(seed), replicate));
}

/// Two uniforms from counter (stream, word2, word3).
inline std::array<double, 2> uniforms2(Key key, std::uint64_t stream, std::uint32_t w2, std::uint32_t w3) {
  auto out = philox4x32({static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), w2, w3}, key);
  const std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  return {to_unit(a), to_unit(b)};
}

/// Sequential generator over one stream: draw n is a pure function of (key, stream, n).
class StreamRng {
 public:
  StreamRng(Key key, std::uint64_t stream) : key_(key), stream_(stream) {}

  double uniform() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    auto u = uniforms2(key_, stream_, static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32));
    ++block_;
    spare_ = u[1];
    have_spare_ = true;
    return u[0];
  }

  /// Exponential with the given rate (> 0).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

  std::uint64_t draws() const { return 2 * block_ - (have_spare_ ? 1 : 0); }

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

enum class ClockKind : std::uint64_t { spike = 1, leak = 2, accept = 3, gillespie = 4, branching = 5 };

/// Stream id of a clock attached to a vertex (identified by its canonical hash).
constexpr std::uint64_t clock_stream(std::uint64_t vertex_hash, ClockKind kind, std::uint64_t k, std::uint64_t salt = 0) {
  return combine(combine(combine(vertex_hash, static_cast<std::uint64_t>(kind)), k), salt);
}

/// One arrival of a random-access Poisson process.
struct Arrival {
  double time = INFINITY;
  std::uint32_t block = 0;
  std::uint32_t index = 0;
};

/// Poisson process of constant rate realized in blocks of length 1 / rate:
/// block b holds a Poisson(1) count of arrivals placed uniformly in
/// [b / rate, (b + 1) / rate). Any arrival can be located without touching
/// earlier blocks, so clocks need no per-clock state.
class PoissonClock {
 public:
  PoissonClock(Key key, std::uint64_t stream, double rate) : key_(key), stream_(stream), rate_(rate) {}

  /// First arrival strictly after t. Infinite time when rate is zero.
  Arrival next_after(double t) const;

  /// Arrivals of block b in increasing order; returns the count (capped at kMaxPerBlock).
  int block_arrivals(std::uint32_t b, double* times) const;

  static constexpr int kMaxPerBlock = 24;

 private:
  Key key_;
  std::uint64_t stream_;
  double rate_;
};

/// Uniform decision value attached to one arrival of a leak clock.
inline double arrival_uniform(Key key, std::uint64_t stream, const Arrival& a) {
  return uniforms2(key, stream, a.block, a.index)[0];
}

}  // namespace treespike::rng
