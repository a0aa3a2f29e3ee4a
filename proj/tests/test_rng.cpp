#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "treespike/rng.hpp"

using namespace treespike::rng;

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream draws are pure functions of key, stream and counter") {
  StreamRng a(replicate_key(5, 2), 77), b(replicate_key(5, 2), 77), c(replicate_key(5, 3), 77);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs |= x != c.uniform();
  }
  CHECK(differs);
}

TEST_CASE("uniform moments") {
  StreamRng r(replicate_key(1, 0), 1);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    s += u;
    s2 += u * u;
  }
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(s2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("poisson clock has random access in time") {
  const Key key = replicate_key(42, 0);
  PoissonClock clock(key, clock_stream(123, ClockKind::leak, 1), 2.5);
  std::vector<double> arrivals;
  for (double t = 0.0;;) {
    auto a = clock.next_after(t);
    if (a.time > 400.0) break;
    CHECK(a.time > t);
    arrivals.push_back(a.time);
    t = a.time;
  }
  // Rate 2.5 over 400 time units: 1000 expected, sd about 32.
  CHECK(std::abs(static_cast<double>(arrivals.size()) - 1000.0) < 160.0);
  // Querying from any point between two arrivals returns the later one.
  for (std::size_t i = 1; i < arrivals.size(); i += 37) {
    const double mid = 0.5 * (arrivals[i - 1] + arrivals[i]);
    CHECK(clock.next_after(mid).time == arrivals[i]);
  }
}

TEST_CASE("poisson clock gaps are exponential") {
  const Key key = replicate_key(7, 1);
  double sum = 0.0, sum2 = 0.0;
  int n = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    PoissonClock clock(key, clock_stream(s, ClockKind::spike, 0), 1.0);
    double t = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double next = clock.next_after(t).time;
      sum += next - t;
      sum2 += (next - t) * (next - t);
      t = next;
      ++n;
    }
  }
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sum2 / n == doctest::Approx(2.0).epsilon(0.05));
}
