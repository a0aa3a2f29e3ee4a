#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "treespike/topology.hpp"

namespace treespike {

enum class ModeKind { unbounded, capped, binary };

/// Potential ceiling applied when spikes deliver potential.
struct Mode {
  ModeKind kind = ModeKind::unbounded;
  std::uint32_t cap = 0;

  static Mode unbounded() { return {}; }
  static Mode capped(std::uint32_t c) { return {ModeKind::capped, c}; }
  static Mode binary() { return {ModeKind::binary, 1}; }

  std::uint32_t limit() const {
    switch (kind) {
      case ModeKind::capped: return cap;
      case ModeKind::binary: return 1;
      default: return UINT32_MAX;
    }
  }
  friend bool operator==(const Mode&, const Mode&) = default;
};

std::string to_string(const Mode& m);
Mode parse_mode(const std::string& kind, std::uint32_t cap);

/// Finitely supported potential configuration. Zero entries are never stored.
class PotentialConfig {
 public:
  using Map = std::map<NeuronId, std::uint64_t>;

  PotentialConfig() = default;

  /// e_o: one unit at the root.
  static PotentialConfig single_root();

  std::uint64_t operator[](const NeuronId& id) const;
  void set(const NeuronId& id, std::uint64_t value);

  const Map& support() const { return support_; }
  std::uint64_t total_potential() const { return total_; }
  std::uint64_t active_count() const { return support_.size(); }
  bool empty() const { return support_.empty(); }

  friend bool operator==(const PotentialConfig& a, const PotentialConfig& b) { return a.support_ == b.support_; }

 private:
  Map support_;
  std::uint64_t total_ = 0;
};

/// Spike at `i`: reset i, add edge weights to its neighbors (saturating at the mode limit).
/// Throws std::logic_error if i is inactive.
PotentialConfig apply_spike(const PotentialConfig& config, const NeuronId& i, const TreeSpec& spec,
                            Mode mode = Mode::unbounded());

/// Leak at `i`: decrement by one. Throws std::logic_error if i is inactive.
PotentialConfig apply_leak(const PotentialConfig& config, const NeuronId& i);

}  // namespace treespike
