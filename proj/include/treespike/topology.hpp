#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace treespike {

/// Address of a vertex of the homogeneous tree T_d.
///
/// The root o sits at level 0. Its parent chain up_1, up_2, ... sits at
/// levels -1, -2, ...; a vertex is reached by climbing `anchor_ups` steps
/// from the root and then descending along `child_path`. Child index 1 of
/// up_m is up_{m-1}, so a canonical id with anchor_ups >= 1 never starts its
/// path with 1.
struct NeuronId {
  std::uint32_t anchor_ups = 0;
  std::vector<std::uint32_t> child_path;

  friend bool operator==(const NeuronId&, const NeuronId&) = default;
  friend std::strong_ordering operator<=>(const NeuronId&, const NeuronId&) = default;
};

/// Degree and direction-homogeneous spike weights.
struct TreeSpec {
  int d = 3;
  std::uint32_t w_up = 1;    // sent to the parent (level - 1)
  std::uint32_t w_down = 1;  // sent to each of the d - 1 children (level + 1)
  bool allow_zero_weights = false;

  /// Throws std::invalid_argument on d < 2 or all-zero weights without the flag.
  void validate() const;
};

NeuronId root();
NeuronId parent(const NeuronId& id);
/// k in [1, d - 1]; the result is canonical.
NeuronId child(const NeuronId& id, std::uint32_t k, int d);
/// Normalizes any (anchor_ups, path) pair; throws on child indices outside [1, d - 1].
NeuronId canonicalize(std::uint32_t anchor_ups, std::vector<std::uint32_t> path, int d);
bool is_canonical(const NeuronId& id, int d);

int level(const NeuronId& id);

/// Parent first (weight w_up), then children 1..d-1 (weight w_down).
std::vector<std::pair<NeuronId, std::uint32_t>> neighbors(const NeuronId& id, const TreeSpec& spec);

std::int64_t lambda(const TreeSpec& spec);
std::int64_t w1(const TreeSpec& spec);
std::int64_t w2(const TreeSpec& spec);

/// "m:c1.c2.c3"; the root is "0:".
std::string to_string(const NeuronId& id);
NeuronId parse_neuron_id(std::string_view text, int d);

/// Graph distance on the tree.
std::uint64_t distance(const NeuronId& a, const NeuronId& b);

}  // namespace treespike
