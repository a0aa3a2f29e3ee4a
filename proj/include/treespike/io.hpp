#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "treespike/analysis.hpp"
#include "treespike/coupling.hpp"
#include "treespike/dynamics.hpp"

namespace treespike::io {

/// Shortest round-trip decimal form, '.' separator, locale independent.
std::string number(double x);

// CSV writers. Every file has a header row and '\n' line endings.
void write_trajectory_csv(std::ostream& out, const Trajectory& tr);  // t,total_potential,active_count,root_potential,root_spikes
void write_events_csv(std::ostream& out, const Trajectory& tr);  // time,neuron,kind
void write_coupled_csv(std::ostream& out, const CoupledPair& pair);     // t,low_total,high_total,violations
void write_triple_csv(std::ostream& out, const CoupledTriple& triple);  // t,zeta_active,eta_total,xi_total,violations
void write_scan_csv(std::ostream& out, const ScanResult& scan);         // gamma,p_hat,ci,n_runs,flagged_runs
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);  // t,mean,ci,lower_envelope,upper_envelope

nlohmann::json to_json(const TreeSpec& spec);
nlohmann::json to_json(const SimParams& p);
nlohmann::json to_json(const SurvivalEstimate& e);
nlohmann::json to_json(const CriticalBracket& b);
nlohmann::json to_json(const ScanResult& s);
nlohmann::json to_json(const Trajectory& tr);  // summary only: no samples or events

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// Writes `content` to `path` (binary, truncating) and returns its digest.
std::string write_file(const std::string& path, const std::string& content);

struct OutputFile {
  std::string path;
  std::string sha256;
};

struct Manifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version;
  std::string started;   // UTC, ISO 8601
  std::string finished;
  std::uint64_t runs = 0;
  std::uint64_t flagged_runs = 0;
  nlohmann::json flags = nlohmann::json::array();  // one entry per safety-capped run
  std::vector<OutputFile> outputs;

  nlohmann::json to_json() const;
};

std::string utc_now();
std::string version();

}  // namespace treespike::io
