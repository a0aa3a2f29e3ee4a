#include "treespike/config.hpp"

#include <algorithm>
#include <stdexcept>

namespace treespike {

std::string to_string(const Mode& m) {
  switch (m.kind) {
    case ModeKind::capped: return "capped(" + std::to_string(m.cap) + ")";
    case ModeKind::binary: return "binary";
    default: return "unbounded";
  }
}

Mode parse_mode(const std::string& kind, std::uint32_t cap) {
  if (kind == "unbounded") return Mode::unbounded();
  if (kind == "binary") return Mode::binary();
  if (kind == "capped") {
    if (cap < 1) throw std::invalid_argument("capped mode needs cap >= 1");
    return Mode::capped(cap);
  }
  throw std::invalid_argument("unknown mode '" + kind + "' (unbounded | capped | binary)");
}

PotentialConfig PotentialConfig::single_root() {
  PotentialConfig c;
  c.set(root(), 1);
  return c;
}

std::uint64_t PotentialConfig::operator[](const NeuronId& id) const {
  auto it = support_.find(id);
  return it == support_.end() ? 0 : it->second;
}

void PotentialConfig::set(const NeuronId& id, std::uint64_t value) {
  auto it = support_.find(id);
  if (it != support_.end()) {
    total_ -= it->second;
    if (value == 0) {
      support_.erase(it);
    } else {
      it->second = value;
      total_ += value;
    }
  } else if (value != 0) {
    support_.emplace(id, value);
    total_ += value;
  }
}

PotentialConfig apply_spike(const PotentialConfig& config, const NeuronId& i, const TreeSpec& spec, Mode mode) {
  if (config[i] == 0) throw std::logic_error("spike at inactive neuron " + to_string(i));
  PotentialConfig out = config;
  out.set(i, 0);
  const std::uint64_t limit = mode.limit();
  for (const auto& [j, w] : neighbors(i, spec)) {
    if (w == 0) continue;
    out.set(j, std::min<std::uint64_t>(limit, out[j] + w));
  }
  return out;
}

PotentialConfig apply_leak(const PotentialConfig& config, const NeuronId& i) {
  const auto v = config[i];
  if (v == 0) throw std::logic_error("leak at inactive neuron " + to_string(i));
  PotentialConfig out = config;
  out.set(i, v - 1);
  return out;
}

}  // namespace treespike
