#include "treespike/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#ifndef TREESPIKE_VERSION
#define TREESPIKE_VERSION "dev"
#endif

namespace treespike::io {

using nlohmann::json;

std::string number(double x) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << "t,total_potential,active_count,root_potential,root_spikes\n";
  for (const auto& s : tr.samples)
    out << number(s.t) << ',' << s.total_potential << ',' << s.active_count << ',' << s.root_potential << ','
        << s.root_spikes << '\n';
}

void write_events_csv(std::ostream& out, const Trajectory& tr) {
  out << "time,neuron,kind\n";
  for (const auto& e : tr.events) out << number(e.time) << ',' << to_string(e.neuron) << ',' << to_string(e.kind) << '\n';
}

void write_coupled_csv(std::ostream& out, const CoupledPair& pair) {
  out << "t,low_total,high_total,violations\n";
  const std::size_t n = std::min({pair.traj_low.samples.size(), pair.traj_high.samples.size(),
                                  pair.violations_at_sample.size()});
  for (std::size_t i = 0; i < n; ++i)
    out << number(pair.traj_low.samples[i].t) << ',' << pair.traj_low.samples[i].total_potential << ','
        << pair.traj_high.samples[i].total_potential << ',' << pair.violations_at_sample[i] << '\n';
}

void write_triple_csv(std::ostream& out, const CoupledTriple& triple) {
  out << "t,zeta_active,eta_total,xi_total,violations\n";
  const std::size_t n = std::min({triple.zeta.samples.size(), triple.eta.samples.size(), triple.xi.samples.size(),
                                  triple.violations_at_sample.size()});
  for (std::size_t i = 0; i < n; ++i)
    out << number(triple.xi.samples[i].t) << ',' << triple.zeta.samples[i].active_count << ','
        << triple.eta.samples[i].total_potential << ',' << triple.xi.samples[i].total_potential << ','
        << triple.violations_at_sample[i] << '\n';
}

void write_scan_csv(std::ostream& out, const ScanResult& scan) {
  out << "gamma,p_hat,ci,n_runs,flagged_runs\n";
  for (std::size_t i = 0; i < scan.gammas.size(); ++i) {
    const auto& e = scan.estimates[i];
    out << number(scan.gammas[i]) << ',' << number(e.p_hat) << ',' << number(e.ci_half_width) << ',' << e.n_runs
        << ',' << e.flagged_runs << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "t,mean,ci,lower_envelope,upper_envelope\n";
  for (const auto& c : curve)
    out << number(c.t) << ',' << number(c.mean) << ',' << number(c.ci) << ',' << number(c.lower_envelope) << ','
        << number(c.upper_envelope) << '\n';
}

json to_json(const TreeSpec& spec) {
  return {{"d", spec.d}, {"w_up", spec.w_up}, {"w_down", spec.w_down}, {"allow_zero_weights", spec.allow_zero_weights}};
}

json to_json(const SimParams& p) {
  json j{{"spec", to_json(p.spec)},
         {"gamma", p.gamma},
         {"horizon", p.horizon},
         {"engine", to_string(p.engine)},
         {"mode", to_string(p.mode)},
         {"seed", p.seed},
         {"max_events", p.caps.max_events},
         {"max_support", p.caps.max_support},
         {"grid", p.grid},
         {"rho", p.rho},
         {"certify_eps", p.certify_eps}};
  if (p.pruning) j["pruning"] = {{"max_level", p.pruning->max_level}, {"windows", p.pruning->windows}};
  return j;
}

json to_json(const SurvivalEstimate& e) {
  return {{"p_hat", e.p_hat},
          {"ci_half_width", e.ci_half_width},
          {"n_runs", e.n_runs},
          {"successes", e.successes},
          {"horizon", e.horizon},
          {"proxy", to_string(e.proxy)},
          {"flagged_runs", e.flagged_runs},
          {"certified_runs", e.certified_runs},
          {"certify_error", e.certify_error}};
}

json to_json(const CriticalBracket& b) {
  json j{{"target", to_string(b.target)},
         {"found", b.found},
         {"theory_lower", b.theory_lower},
         {"theory_upper", b.theory_upper}};
  if (b.found) {
    j["gamma_lo"] = b.gamma_lo;
    j["gamma_hi"] = b.gamma_hi;
  } else {
    j["gamma_lo"] = nullptr;
    j["gamma_hi"] = nullptr;
  }
  return j;
}

json to_json(const ScanResult& s) {
  json j{{"bracket", to_json(s.bracket)}, {"non_monotone", s.non_monotone}};
  auto& est = j["estimates"] = json::array();
  for (std::size_t i = 0; i < s.gammas.size(); ++i) {
    json e = to_json(s.estimates[i]);
    e["gamma"] = s.gammas[i];
    est.push_back(std::move(e));
  }
  return j;
}

json to_json(const Trajectory& tr) {
  return {{"reason", to_string(tr.reason)},
          {"terminated_early", tr.terminated_early},
          {"end_time", tr.end_time},
          {"event_count", tr.event_count},
          {"final_total", tr.final_total},
          {"final_active", tr.final_active},
          {"root_spikes", tr.root_spikes},
          {"certify_error", tr.certify_error}};
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path);
  return sha256_hex(content);
}

json Manifest::to_json() const {
  json j{{"command", command},
         {"config", config},
         {"seed", seed},
         {"version", version},
         {"started", started},
         {"finished", finished},
         {"runs", runs},
         {"flagged_runs", flagged_runs},
         {"flags", flags}};
  auto& out = j["outputs"] = json::array();
  for (const auto& f : outputs) out.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return j;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string version() { return TREESPIKE_VERSION; }

}  // namespace treespike::io
