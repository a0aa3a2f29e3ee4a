#include "treespike/batch.hpp"

#include <cstdlib>
#include <string>

namespace treespike {

unsigned worker_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("TREESPIKE_THREADS")) {
    try {
      n = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      n = 0;
    }
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace treespike
