#include "treespike/arena.hpp"

#include <algorithm>
#include <queue>

#include "treespike/rng.hpp"

namespace treespike {

namespace {

constexpr std::uint64_t kChainTag = 0x7d0c6ad1e5b3f1a9ull;
constexpr std::uint64_t kGraphTag = 0x3c91f0b55aa7e2d3ull;

std::uint64_t chain_hash(std::uint32_t m) { return rng::combine(kChainTag, m); }

}  // namespace

TreeArena::TreeArena(const TreeSpec& spec) : spec_(spec) {
  spec_.validate();
  Node r;
  r.on_chain = true;
  r.hash = chain_hash(0);
  create(r);
  scratch_.reserve(static_cast<std::size_t>(spec_.d));
}

Vertex TreeArena::create(const Node& n) {
  nodes_.push_back(n);
  children_.resize(children_.size() + static_cast<std::size_t>(spec_.d - 1), -1);
  return static_cast<Vertex>(nodes_.size() - 1);
}

Vertex TreeArena::parent(Vertex v) {
  Node& n = nodes_[static_cast<std::size_t>(v)];
  if (n.parent >= 0) return n.parent;
  // Only chain vertices can lack a materialized parent.
  Node p;
  p.on_chain = true;
  p.anchor_ups = n.anchor_ups + 1;
  p.level = n.level - 1;
  p.hash = chain_hash(p.anchor_ups);
  const Vertex pv = create(p);
  Node& nn = nodes_[static_cast<std::size_t>(v)];
  nn.parent = pv;
  nn.child_index = 1;
  child_slot(pv, 1) = v;
  return pv;
}

Vertex TreeArena::child(Vertex v, std::uint32_t k) {
  Vertex c = child_slot(v, k);
  if (c >= 0) return c;
  const Node& n = nodes_[static_cast<std::size_t>(v)];
  // Child 1 of up_m is up_{m-1}, which is always materialized and linked.
  Node cn;
  cn.parent = v;
  cn.child_index = k;
  cn.level = n.level + 1;
  cn.anchor_ups = n.anchor_ups;
  cn.hash = rng::combine(n.hash, k);
  c = create(cn);
  child_slot(v, k) = c;
  return c;
}

Vertex TreeArena::intern(const NeuronId& id) {
  if (!is_canonical(id, spec_.d)) throw std::invalid_argument("non-canonical neuron id " + to_string(id));
  Vertex v = root();
  for (std::uint32_t m = 0; m < id.anchor_ups; ++m) v = parent(v);
  for (auto k : id.child_path) v = child(v, k);
  return v;
}

NeuronId TreeArena::id(Vertex v) const {
  NeuronId out;
  std::vector<std::uint32_t> rev;
  while (!nodes_[static_cast<std::size_t>(v)].on_chain) {
    const Node& n = nodes_[static_cast<std::size_t>(v)];
    rev.push_back(n.child_index);
    v = n.parent;
  }
  out.anchor_ups = nodes_[static_cast<std::size_t>(v)].anchor_ups;
  out.child_path.assign(rev.rbegin(), rev.rend());
  return out;
}

std::span<const Edge> TreeArena::neighbors(Vertex v) {
  scratch_.clear();
  scratch_.push_back({parent(v), spec_.w_up});
  for (std::uint32_t k = 1; k < static_cast<std::uint32_t>(spec_.d); ++k) scratch_.push_back({child(v, k), spec_.w_down});
  return scratch_;
}

std::span<const Edge> TreeArena::children(Vertex v) {
  scratch_.clear();
  for (std::uint32_t k = 1; k < static_cast<std::uint32_t>(spec_.d); ++k) scratch_.push_back({child(v, k), spec_.w_down});
  return scratch_;
}

void FiniteGraph::validate() const {
  const int n = size();
  if (n == 0) throw std::invalid_argument("graph has no vertices");
  for (int i = 0; i < n; ++i) {
    for (auto [j, w] : adjacency[static_cast<std::size_t>(i)]) {
      if (j < 0 || j >= n) throw std::invalid_argument("neighbor index out of range");
      if (j == i) throw std::invalid_argument("self loops are not allowed");
      const auto& back = adjacency[static_cast<std::size_t>(j)];
      if (std::none_of(back.begin(), back.end(), [i](auto e) { return e.first == i; }))
        throw std::invalid_argument("adjacency is not symmetric");
      (void)w;
    }
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int i = q.front();
    q.pop();
    for (auto [j, w] : adjacency[static_cast<std::size_t>(i)]) {
      (void)w;
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        ++count;
        q.push(j);
      }
    }
  }
  if (count != n) throw std::invalid_argument("graph is not connected");
}

FiniteGraph FiniteGraph::path(int n, std::uint32_t w) {
  FiniteGraph g;
  g.adjacency.resize(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i) {
    g.adjacency[static_cast<std::size_t>(i)].emplace_back(i + 1, w);
    g.adjacency[static_cast<std::size_t>(i + 1)].emplace_back(i, w);
  }
  return g;
}

FiniteGraph FiniteGraph::cycle(int n, std::uint32_t w) {
  if (n < 3) throw std::invalid_argument("cycle needs at least 3 vertices");
  FiniteGraph g = path(n, w);
  g.adjacency[0].emplace_back(n - 1, w);
  g.adjacency[static_cast<std::size_t>(n - 1)].emplace_back(0, w);
  return g;
}

FiniteGraph FiniteGraph::star(int leaves, std::uint32_t w) {
  FiniteGraph g;
  g.adjacency.resize(static_cast<std::size_t>(leaves + 1));
  for (int i = 1; i <= leaves; ++i) {
    g.adjacency[0].emplace_back(i, w);
    g.adjacency[static_cast<std::size_t>(i)].emplace_back(0, w);
  }
  return g;
}

GraphArena::GraphArena(const FiniteGraph& g) {
  g.validate();
  edges_.resize(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i)
    for (auto [j, w] : g.adjacency[static_cast<std::size_t>(i)]) edges_[static_cast<std::size_t>(i)].push_back({j, w});
}

std::uint64_t GraphArena::hash(Vertex v) const { return rng::combine(kGraphTag, static_cast<std::uint64_t>(v)); }

}  // namespace treespike
