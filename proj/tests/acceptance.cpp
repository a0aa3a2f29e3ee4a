// Acceptance suite: one pass/fail line per criterion.
#include <cstring>
#include <exception>
#include <fstream>
#include <iostream>

#include "verify.hpp"

int main(int argc, char** argv) {
  treespike::verify::Options opt;
  const char* json_path = nullptr;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--quick"))
      opt.quick = true;
    else if (!std::strcmp(argv[i], "--full-scale"))
      opt.full_scale = true;
    else if (!std::strcmp(argv[i], "--only") && i + 1 < argc)
      opt.only.push_back(argv[++i]);
    else if (!std::strcmp(argv[i], "--json") && i + 1 < argc)
      json_path = argv[++i];
    else {
      std::cerr << "usage: treespike_acceptance [--quick] [--full-scale] [--only NAME]... [--json PATH]\n";
      return 1;
    }
  }
  try {
    const auto results = treespike::verify::run_suite(opt, &std::cout);
    if (json_path) std::ofstream(json_path) << treespike::verify::report(results, opt).dump(2) << '\n';
    const bool ok = treespike::verify::all_passed(results);
    std::cout << (ok ? "all criteria passed" : "some criteria failed") << (opt.quick ? " (quick mode)" : "") << '\n';
    return ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
