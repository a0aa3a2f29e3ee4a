#include "doctest.h"

#include <random>
#include <set>
#include <stdexcept>

#include "treespike/topology.hpp"

using namespace treespike;

namespace {

NeuronId random_id(std::mt19937_64& gen, int d) {
  std::uniform_int_distribution<std::uint32_t> ups(0, 4), len(0, 5), k(1, static_cast<std::uint32_t>(d - 1));
  std::vector<std::uint32_t> path(len(gen));
  for (auto& c : path) c = k(gen);
  return canonicalize(ups(gen), path, d);
}

}  // namespace

TEST_CASE("neighbors of the root and of the first anchor") {
  TreeSpec spec;
  auto nb = neighbors(root(), spec);
  REQUIRE(nb.size() == 3);
  CHECK(nb[0].first == NeuronId{1, {}});
  CHECK(nb[1].first == NeuronId{0, {1}});
  CHECK(nb[2].first == NeuronId{0, {2}});

  nb = neighbors(NeuronId{1, {}}, spec);
  CHECK(nb[0].first == NeuronId{2, {}});
  CHECK(nb[1].first == NeuronId{0, {}});
  CHECK(nb[2].first == NeuronId{1, {2}});
}

TEST_CASE("the line has one parent and one child") {
  TreeSpec spec{2, 1, 1};
  std::mt19937_64 gen(3);
  for (int i = 0; i < 50; ++i) {
    auto id = random_id(gen, 2);
    auto nb = neighbors(id, spec);
    REQUIRE(nb.size() == 2);
    CHECK(level(nb[0].first) == level(id) - 1);
    CHECK(level(nb[1].first) == level(id) + 1);
  }
}

TEST_CASE("levels") {
  CHECK(level(root()) == 0);
  CHECK(level(NeuronId{2, {}}) == -2);
  CHECK(level(NeuronId{1, {3, 2}}) == 1);
}

TEST_CASE("weight constants") {
  CHECK(lambda(TreeSpec{3, 1, 1}) == 3);
  CHECK(lambda(TreeSpec{6, 1, 1}) == 6);
  TreeSpec s{3, 1, 2};
  CHECK(lambda(s) == 5);
  CHECK(w1(s) == 1);
  CHECK(w2(s) == 2);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(TreeSpec({1, 1, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(TreeSpec({3, 0, 0}).validate(), std::invalid_argument);
  CHECK_NOTHROW(TreeSpec({3, 0, 0, true}).validate());
}

TEST_CASE("parent of child round trip and neighbor levels") {
  for (int d : {2, 3, 4, 6}) {
    TreeSpec spec{d, 1, 1};
    std::mt19937_64 gen(static_cast<unsigned>(d));
    for (int i = 0; i < 200; ++i) {
      auto id = random_id(gen, d);
      REQUIRE(is_canonical(id, d));
      for (std::uint32_t k = 1; k <= static_cast<std::uint32_t>(d - 1); ++k) {
        auto c = child(id, k, d);
        CHECK(is_canonical(c, d));
        CHECK(parent(c) == id);
        CHECK(level(c) == level(id) + 1);
      }
      auto nb = neighbors(id, spec);
      int up = 0, down = 0;
      for (auto& [n, w] : nb) {
        CHECK(is_canonical(n, d));
        up += level(n) == level(id) - 1;
        down += level(n) == level(id) + 1;
        CHECK(distance(n, id) == 1);
      }
      CHECK(up == 1);
      CHECK(down == d - 1);
    }
  }
}

TEST_CASE("canonicalization is idempotent and addressing is injective") {
  const int d = 3;
  std::set<NeuronId> ids;
  for (std::uint32_t m = 0; m <= 3; ++m)
    for (std::uint32_t a = 1; a <= 2; ++a)
      for (std::uint32_t b = 1; b <= 2; ++b) {
        auto id = canonicalize(m, {a, b}, d);
        CHECK(canonicalize(id.anchor_ups, id.child_path, d) == id);
        ids.insert(id);
      }
  // Each (m, [a, b]) names a different vertex even after (m, [1, b]) folds to (m - 1, [b]).
  CHECK(ids.size() == 16);
  CHECK(canonicalize(1, {1}, d) == root());
  CHECK(canonicalize(2, {1, 1, 2}, d) == NeuronId{0, {2}});
}

TEST_CASE("string form round trip") {
  CHECK(to_string(root()) == "0:");
  CHECK(to_string(NeuronId{1, {3, 2}}) == "1:3.2");
  std::mt19937_64 gen(9);
  for (int i = 0; i < 100; ++i) {
    auto id = random_id(gen, 5);
    CHECK(parse_neuron_id(to_string(id), 5) == id);
  }
  CHECK_THROWS(parse_neuron_id("x", 3));
  CHECK_THROWS(parse_neuron_id("0:3", 3));
}
