#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "treespike/arena.hpp"

namespace treespike::detail {

/// Potentials of one process over an arena, bucketed by value so that a
/// uniform active neuron and a potential-weighted neuron can both be drawn
/// in O(max potential).
class LegState {
 public:
  void ensure(std::size_t n) {
    if (pot_.size() < n) {
      pot_.resize(n, 0);
      slot_.resize(n, -1);
    }
  }

  std::uint32_t get(Vertex v) const {
    return static_cast<std::size_t>(v) < pot_.size() ? pot_[static_cast<std::size_t>(v)] : 0;
  }

  /// Level tracking feeds the survival certificate: `reached_threshold()`
  /// turns true once some level holds `threshold` active neurons.
  void track_levels(std::uint64_t threshold) { level_threshold_ = threshold; }
  bool reached_threshold() const { return reached_; }

  void set(Vertex v, std::uint32_t value, int level) {
    ensure(static_cast<std::size_t>(v) + 1);
    const auto i = static_cast<std::size_t>(v);
    const std::uint32_t old = pot_[i];
    if (old == value) return;
    if (old != 0) unlink(v, old);
    if (value != 0) link(v, value);
    total_ = total_ - old + value;
    if (old == 0) {
      ++active_;
      if (level_threshold_) bump_level(level, +1);
    } else if (value == 0) {
      --active_;
      if (level_threshold_) bump_level(level, -1);
    }
    pot_[i] = value;
  }

  std::uint64_t total() const { return total_; }
  std::uint64_t active() const { return active_; }

  /// u in [0, 1): uniformly chosen active vertex.
  Vertex pick_active(double u) const {
    auto target = static_cast<std::uint64_t>(u * static_cast<double>(active_));
    if (target >= active_) target = active_ - 1;
    for (std::size_t p = 1; p <= top_; ++p) {
      const auto& b = buckets_[p];
      if (target < b.size()) return b[target];
      target -= b.size();
    }
    return -1;
  }

  /// u in [0, 1): vertex chosen with probability potential / total.
  Vertex pick_weighted(double u) const {
    auto target = static_cast<std::uint64_t>(u * static_cast<double>(total_));
    if (target >= total_) target = total_ - 1;
    for (std::size_t p = 1; p <= top_; ++p) {
      const auto& b = buckets_[p];
      const std::uint64_t mass = p * b.size();
      if (target < mass) return b[target / p];
      target -= mass;
    }
    return -1;
  }

  /// u in [0, 1): one unit of potential chosen uniformly; returns its vertex
  /// and sets `k` to the unit's rank (1-based) within that vertex.
  Vertex pick_unit(double u, std::uint32_t& k) const {
    auto target = static_cast<std::uint64_t>(u * static_cast<double>(total_));
    if (target >= total_) target = total_ - 1;
    for (std::size_t p = 1; p <= top_; ++p) {
      const auto& b = buckets_[p];
      const std::uint64_t mass = p * b.size();
      if (target < mass) {
        k = static_cast<std::uint32_t>(target % p) + 1;
        return b[target / p];
      }
      target -= mass;
    }
    return -1;
  }

  template <class Fn>
  void for_each_active(Fn&& fn) const {
    for (std::size_t p = 1; p <= top_; ++p)
      for (Vertex v : buckets_[p]) fn(v, static_cast<std::uint32_t>(p));
  }

  std::vector<Vertex> active_vertices() const {
    std::vector<Vertex> out;
    out.reserve(active_);
    for_each_active([&](Vertex v, std::uint32_t) { out.push_back(v); });
    return out;
  }

 private:
  void link(Vertex v, std::uint32_t p) {
    if (buckets_.size() <= p) buckets_.resize(p + 1);
    top_ = std::max<std::size_t>(top_, p);
    slot_[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(buckets_[p].size());
    buckets_[p].push_back(v);
  }
  void unlink(Vertex v, std::uint32_t p) {
    auto& b = buckets_[p];
    const auto s = static_cast<std::size_t>(slot_[static_cast<std::size_t>(v)]);
    const Vertex last = b.back();
    b[s] = last;
    slot_[static_cast<std::size_t>(last)] = static_cast<std::int32_t>(s);
    b.pop_back();
    slot_[static_cast<std::size_t>(v)] = -1;
    while (top_ > 0 && buckets_[top_].empty()) --top_;
  }
  void bump_level(int level, int delta) {
    if (level_counts_.empty()) {
      level_offset_ = level - 64;
      level_counts_.assign(128, 0);
    }
    while (level < level_offset_) {
      level_counts_.insert(level_counts_.begin(), 64, 0);
      level_offset_ -= 64;
    }
    while (level - level_offset_ >= static_cast<int>(level_counts_.size())) level_counts_.resize(level_counts_.size() + 64, 0);
    auto& c = level_counts_[static_cast<std::size_t>(level - level_offset_)];
    c = static_cast<std::uint64_t>(static_cast<std::int64_t>(c) + delta);
    if (delta > 0 && c >= level_threshold_) reached_ = true;
  }

  std::vector<std::uint32_t> pot_;
  std::vector<std::int32_t> slot_;
  std::vector<std::vector<Vertex>> buckets_{1};
  std::size_t top_ = 0;  // highest non-empty bucket
  std::uint64_t total_ = 0;
  std::uint64_t active_ = 0;

  std::uint64_t level_threshold_ = 0;
  bool reached_ = false;
  int level_offset_ = 0;
  std::vector<std::uint64_t> level_counts_;
};

}  // namespace treespike::detail
