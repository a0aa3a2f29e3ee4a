#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace treespike::verify {

struct Options {
  bool quick = false;       // n_runs / 10, tolerances widened by sqrt(10)
  bool full_scale = false;  // lift the safety caps that keep the default run short
  std::vector<std::string> only;
  std::uint64_t seed = 20240611;
};

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  bool statistic_pass = false;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  std::string summary;  // one line: measured values against the tolerance
  std::string note;     // caveats (caps, flagged runs); empty when none
  nlohmann::json measured;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Result(const Options&)> run;
};

const std::vector<Criterion>& criteria();

/// Runs the selected criteria in order; `progress` receives one line per criterion as it finishes.
std::vector<Result> run_suite(const Options& opt, std::ostream* progress = nullptr);

std::string format_line(const Result& r);
nlohmann::json report(const std::vector<Result>& results, const Options& opt);
bool all_passed(const std::vector<Result>& results);

}  // namespace treespike::verify
