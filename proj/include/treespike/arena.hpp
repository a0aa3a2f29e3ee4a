#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "treespike/topology.hpp"

namespace treespike {

using Vertex = std::int32_t;

struct Edge {
  Vertex to;
  std::uint32_t weight;
};

/// Lazily materialized piece of T_d touched by one simulation run.
///
/// Vertices are created on demand as neighbors of existing vertices, so the
/// materialized set is always a connected subtree containing the root
/// (vertex 0) and every vertex appears exactly once.
class TreeArena {
 public:
  explicit TreeArena(const TreeSpec& spec);

  Vertex root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }

  /// Vertex for a canonical id, creating the path to it when needed.
  Vertex intern(const NeuronId& id);
  NeuronId id(Vertex v) const;

  int level(Vertex v) const { return nodes_[static_cast<std::size_t>(v)].level; }
  std::uint64_t hash(Vertex v) const { return nodes_[static_cast<std::size_t>(v)].hash; }

  Vertex parent(Vertex v);
  Vertex child(Vertex v, std::uint32_t k);

  /// Parent (w_up) then children 1..d-1 (w_down). The span is invalidated by the next call.
  std::span<const Edge> neighbors(Vertex v);
  /// Children only, with weight w_down.
  std::span<const Edge> children(Vertex v);

  /// Canonical (lexicographic NeuronId) order.
  bool precedes(Vertex a, Vertex b) const { return id(a) < id(b); }

  const TreeSpec& spec() const { return spec_; }

 private:
  struct Node {
    Vertex parent = -1;
    std::int32_t level = 0;
    std::uint32_t anchor_ups = 0;
    std::uint32_t child_index = 0;  // index under the parent; 0 when the parent is not materialized
    bool on_chain = false;          // one of up_0 (root), up_1, up_2, ...
    std::uint64_t hash = 0;
  };

  Vertex create(const Node& n);
  Vertex& child_slot(Vertex v, std::uint32_t k) {
    return children_[static_cast<std::size_t>(v) * static_cast<std::size_t>(spec_.d - 1) + (k - 1)];
  }

  TreeSpec spec_;
  std::vector<Node> nodes_;
  std::vector<Vertex> children_;
  std::vector<Edge> scratch_;
};

/// Small explicit graph (used by the exact oracle and the simulator tests).
struct FiniteGraph {
  /// adjacency[i] lists (j, w_{i->j}); the neighbor relation must be symmetric.
  std::vector<std::vector<std::pair<int, std::uint32_t>>> adjacency;

  int size() const { return static_cast<int>(adjacency.size()); }
  /// Throws std::invalid_argument when empty, asymmetric, self-looped or disconnected.
  void validate() const;

  static FiniteGraph path(int n, std::uint32_t w = 1);
  static FiniteGraph cycle(int n, std::uint32_t w = 1);
  static FiniteGraph star(int leaves, std::uint32_t w = 1);
};

/// Engine-facing view of a finite graph; every vertex sits at level 0.
class GraphArena {
 public:
  explicit GraphArena(const FiniteGraph& g);

  Vertex root() const { return 0; }
  std::size_t size() const { return edges_.size(); }
  int level(Vertex) const { return 0; }
  std::uint64_t hash(Vertex v) const;
  std::span<const Edge> neighbors(Vertex v) const { return edges_[static_cast<std::size_t>(v)]; }
  std::span<const Edge> children(Vertex) const {
    throw std::logic_error("finite graphs have no level structure");
  }
  bool precedes(Vertex a, Vertex b) const { return a < b; }
  /// Vertex i is reported as "0:i".
  NeuronId id(Vertex v) const { return NeuronId{0, {static_cast<std::uint32_t>(v)}}; }

 private:
  std::vector<std::vector<Edge>> edges_;
};

}  // namespace treespike
