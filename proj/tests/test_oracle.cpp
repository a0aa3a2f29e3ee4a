#include "doctest.h"

#include <cmath>
#include <numeric>

#include "treespike/oracle.hpp"

using namespace treespike;
using namespace treespike::oracle;

TEST_CASE("galton-watson extinction") {
  CHECK(gw_extinction(3, 0.0).q == 0.0);
  CHECK(gw_extinction(3, 2.0).q == 1.0);
  CHECK(gw_extinction(3, 1.0).q == 1.0);  // mean exactly 1
  CHECK(gw_extinction(3, 0.5).q == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(gw_extinction(4, 1.0).q == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-10));
  CHECK(survival_lower_bound(4, 1.0) == doctest::Approx(0.38197).epsilon(1e-4));
  CHECK(survival_lower_bound(6, 3.9) > 0.0);
  CHECK(survival_lower_bound(2, 0.5) == 0.0);
  CHECK_THROWS(gw_extinction(1, 0.5));
  CHECK_THROWS(gw_extinction(3, -1.0));
}

TEST_CASE("extinction is monotone in d and gamma") {
  for (double g = 0.25; g < 3.0; g += 0.25)
    for (int d = 3; d < 8; ++d) {
      const double q = gw_extinction(d, g).q;
      if (q < 1.0) {
        CHECK(gw_extinction(d + 1, g).q < q);
        CHECK(gw_extinction(d, g + 0.1).q > q);
      }
      // q = 1 exactly on the subcritical side.
      CHECK((q == 1.0) == ((d - 1) / (1.0 + g) <= 1.0));
    }
}

TEST_CASE("single vertex generator") {
  auto g = parse_graph("single");
  auto gen = enumerate_and_build(g, 1.0, Mode::binary());
  REQUIRE(gen.space.count == 2);
  REQUIRE(gen.rows[1].size() == 1);
  CHECK(gen.rows[1][0].to == 0);
  CHECK(gen.rate(gen.rows[1][0]) == 2.0);
  CHECK(gen.rows_sum_to_zero());
  auto dist = transient(gen, 1, 1.0, 1e-12);
  CHECK(dist.probabilities[1] == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
  CHECK(dist.truncation_error <= 1e-12);
}

TEST_CASE("two-vertex path in binary mode") {
  auto gen = enumerate_and_build(FiniteGraph::path(2), 0.3, Mode::binary());
  REQUIRE(gen.space.count == 4);
  const auto from = gen.space.encode({1, 0});
  double to_01 = 0, to_00 = 0;
  for (const auto& e : gen.rows[from]) {
    if (e.to == gen.space.encode({0, 1})) to_01 = gen.rate(e);
    if (e.to == gen.space.encode({0, 0})) to_00 = gen.rate(e);
  }
  CHECK(to_01 == 1.0);
  CHECK(to_00 == doctest::Approx(0.3));
}

TEST_CASE("no leaks without gamma") {
  auto gen = enumerate_and_build(FiniteGraph::cycle(3), 0.0, Mode::capped(2));
  for (const auto& row : gen.rows)
    for (const auto& e : row) CHECK(e.b == 0);
  CHECK(gen.rows_sum_to_zero());
}

TEST_CASE("transient distributions") {
  auto gen = enumerate_and_build(FiniteGraph::path(3), 0.7, Mode::binary());
  CHECK(gen.space.count == 8);
  CHECK(gen.rows_sum_to_zero());
  const auto init = gen.space.encode({1, 0, 0});
  auto at0 = transient(gen, init, 0.0, 1e-10);
  CHECK(at0.probabilities[init] == 1.0);
  for (double t : {0.1, 1.0, 3.0, 10.0}) {
    auto dist = transient(gen, init, t, 1e-10);
    const double total = std::accumulate(dist.probabilities.begin(), dist.probabilities.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-10);
    for (double p : dist.probabilities) CHECK(p >= 0.0);
  }
  // Against a dense Taylor series of exp(Qt) on the capped 2-vertex path.
  auto small = enumerate_and_build(FiniteGraph::path(2), 0.4, Mode::capped(2));
  const auto n = static_cast<std::size_t>(small.space.count);
  auto q = small.dense();
  const double t = 0.8;
  std::vector<double> term(n, 0.0), sum(n, 0.0);
  const auto start = small.space.encode({2, 1});
  term[start] = 1.0;
  for (int k = 0; k < 80; ++k) {
    for (std::size_t i = 0; i < n; ++i) sum[i] += term[i];
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += term[i] * q[i * n + j] * t / (k + 1);
    term = next;
  }
  auto dist = transient(small, start, t, 1e-13);
  for (std::size_t i = 0; i < n; ++i) CHECK(dist.probabilities[i] == doctest::Approx(sum[i]).epsilon(1e-9));
}

TEST_CASE("oracle guards and json") {
  CHECK_THROWS(enumerate_and_build(FiniteGraph::path(3), 0.5, Mode::unbounded()));
  CHECK_THROWS(enumerate_and_build(FiniteGraph::path(30), 0.5, Mode::binary()));
  CHECK_THROWS(parse_graph("tree:3"));
  auto gen = enumerate_and_build(FiniteGraph::path(2), 0.5, Mode::binary());
  auto j = to_json(gen, transient(gen, 1, 1.0, 1e-10), "path:2", "binary");
  CHECK(j["states"].size() == 4);
  CHECK(j["graph"] == "path:2");
}
