#include "cylbill/exec.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace cylbill {

int thread_budget() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("CYLBILL_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return std::max(n, 1);
}

}  // namespace cylbill
