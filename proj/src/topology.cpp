#include "treespike/topology.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace treespike {

void TreeSpec::validate() const {
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  if (w_up == 0 && w_down == 0 && !allow_zero_weights)
    throw std::invalid_argument("w_up and w_down are both zero (set allow_zero_weights to permit)");
}

NeuronId root() { return {}; }

NeuronId parent(const NeuronId& id) {
  NeuronId p = id;
  if (p.child_path.empty()) {
    ++p.anchor_ups;
  } else {
    p.child_path.pop_back();
  }
  return p;
}

NeuronId child(const NeuronId& id, std::uint32_t k, int d) {
  if (k < 1 || k > static_cast<std::uint32_t>(d - 1))
    throw std::invalid_argument("child index out of range");
  if (id.child_path.empty() && id.anchor_ups >= 1 && k == 1) return NeuronId{id.anchor_ups - 1, {}};
  NeuronId c = id;
  c.child_path.push_back(k);
  return c;
}

NeuronId canonicalize(std::uint32_t anchor_ups, std::vector<std::uint32_t> path, int d) {
  for (auto k : path)
    if (k < 1 || k > static_cast<std::uint32_t>(d - 1))
      throw std::invalid_argument("child index out of range");
  std::size_t skip = 0;
  while (anchor_ups >= 1 && skip < path.size() && path[skip] == 1) {
    --anchor_ups;
    ++skip;
  }
  path.erase(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(skip));
  return NeuronId{anchor_ups, std::move(path)};
}

bool is_canonical(const NeuronId& id, int d) {
  for (auto k : id.child_path)
    if (k < 1 || k > static_cast<std::uint32_t>(d - 1)) return false;
  return !(id.anchor_ups >= 1 && !id.child_path.empty() && id.child_path.front() == 1);
}

int level(const NeuronId& id) {
  return static_cast<int>(id.child_path.size()) - static_cast<int>(id.anchor_ups);
}

std::vector<std::pair<NeuronId, std::uint32_t>> neighbors(const NeuronId& id, const TreeSpec& spec) {
  std::vector<std::pair<NeuronId, std::uint32_t>> out;
  out.reserve(static_cast<std::size_t>(spec.d));
  out.emplace_back(parent(id), spec.w_up);
  for (int k = 1; k < spec.d; ++k) out.emplace_back(child(id, static_cast<std::uint32_t>(k), spec.d), spec.w_down);
  return out;
}

std::int64_t lambda(const TreeSpec& spec) {
  return static_cast<std::int64_t>(spec.w_up) + static_cast<std::int64_t>(spec.d - 1) * spec.w_down;
}
std::int64_t w1(const TreeSpec& spec) { return spec.w_up; }
std::int64_t w2(const TreeSpec& spec) { return spec.w_down; }

std::string to_string(const NeuronId& id) {
  std::string s = std::to_string(id.anchor_ups);
  s += ':';
  for (std::size_t i = 0; i < id.child_path.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(id.child_path[i]);
  }
  return s;
}

namespace {

std::uint32_t parse_u32(std::string_view t) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("malformed neuron id component '" + std::string(t) + "'");
  return v;
}

}  // namespace

NeuronId parse_neuron_id(std::string_view text, int d) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("neuron id needs 'm:path'");
  std::uint32_t m = parse_u32(text.substr(0, colon));
  std::vector<std::uint32_t> path;
  auto rest = text.substr(colon + 1);
  while (!rest.empty()) {
    auto dot = rest.find('.');
    path.push_back(parse_u32(rest.substr(0, dot)));
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
    if (rest.empty()) throw std::invalid_argument("trailing '.' in neuron id");
  }
  NeuronId id = canonicalize(m, std::move(path), d);
  return id;
}

std::uint64_t distance(const NeuronId& a, const NeuronId& b) {
  // Re-express both as descents from the common anchor up_M.
  const std::uint32_t top = std::max(a.anchor_ups, b.anchor_ups);
  auto lift = [top](const NeuronId& id) {
    std::vector<std::uint32_t> p(top - id.anchor_ups, 1u);
    p.insert(p.end(), id.child_path.begin(), id.child_path.end());
    return p;
  };
  auto pa = lift(a), pb = lift(b);
  std::size_t common = 0;
  while (common < pa.size() && common < pb.size() && pa[common] == pb[common]) ++common;
  return (pa.size() - common) + (pb.size() - common);
}

}  // namespace treespike
