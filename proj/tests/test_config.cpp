#include "doctest.h"

#include <stdexcept>

#include "treespike/config.hpp"

using namespace treespike;

namespace {
const NeuronId kRoot = root();
const NeuronId kParent{1, {}};
const NeuronId kChild1{0, {1}};
const NeuronId kChild2{0, {2}};
}  // namespace

TEST_CASE("spike resets and spreads the weights") {
  TreeSpec spec{3, 1, 2};
  PotentialConfig x;
  x.set(kRoot, 5);
  auto y = apply_spike(x, kRoot, spec);
  CHECK(y[kRoot] == 0);
  CHECK(y[kParent] == 1);
  CHECK(y[kChild1] == 2);
  CHECK(y[kChild2] == 2);
  CHECK(y.total_potential() == 5);
  CHECK(y.active_count() == 3);
}

TEST_CASE("binary spike saturates") {
  TreeSpec spec{3, 1, 1};
  PotentialConfig x;
  x.set(kRoot, 1);
  x.set(kChild1, 1);
  auto y = apply_spike(x, kRoot, spec, Mode::binary());
  CHECK(y.active_count() == 3);
  CHECK(y[kChild1] == 1);
  CHECK(y[kParent] == 1);
  CHECK(y[kChild2] == 1);
}

TEST_CASE("capped spike never exceeds the cap") {
  TreeSpec spec{3, 1, 2};
  PotentialConfig x;
  x.set(kRoot, 1);
  x.set(kChild1, 2);
  auto y = apply_spike(x, kRoot, spec, Mode::capped(3));
  CHECK(y[kChild1] == 3);
  CHECK(y[kChild2] == 2);
}

TEST_CASE("zero weights empty the configuration") {
  TreeSpec spec{3, 0, 0, true};
  auto y = apply_spike(PotentialConfig::single_root(), kRoot, spec);
  CHECK(y.empty());
  CHECK(y.total_potential() == 0);
}

TEST_CASE("leaks") {
  PotentialConfig x;
  x.set(kRoot, 3);
  auto y = apply_leak(x, kRoot);
  CHECK(y[kRoot] == 2);
  CHECK(y.total_potential() == 2);

  auto z = apply_leak(PotentialConfig::single_root(), kRoot);
  CHECK(z.empty());
  CHECK(z.active_count() == 0);

  PotentialConfig w;
  w.set(kRoot, 2);
  w.set(kChild1, 1);
  auto v = apply_leak(w, kChild1);
  CHECK(v.active_count() == 1);
  CHECK(v[kRoot] == 2);
  CHECK(v.total_potential() == 2);
}

TEST_CASE("contract violations") {
  TreeSpec spec;
  PotentialConfig empty;
  CHECK_THROWS_AS(apply_spike(empty, kRoot, spec), std::logic_error);
  CHECK_THROWS_AS(apply_leak(empty, kRoot), std::logic_error);
}

TEST_CASE("spike ledger in unbounded mode") {
  TreeSpec spec{4, 2, 1};
  PotentialConfig x;
  x.set(kRoot, 7);
  x.set(kChild1, 1);
  const auto before = x.total_potential();
  auto y = apply_spike(x, kRoot, spec);
  CHECK(static_cast<std::int64_t>(y.total_potential()) - static_cast<std::int64_t>(before) == lambda(spec) - 7);
}

TEST_CASE("mode parsing") {
  CHECK(parse_mode("binary", 0) == Mode::binary());
  CHECK(parse_mode("capped", 4) == Mode::capped(4));
  CHECK(parse_mode("unbounded", 0) == Mode::unbounded());
  CHECK_THROWS(parse_mode("capped", 0));
  CHECK_THROWS(parse_mode("weird", 1));
}
