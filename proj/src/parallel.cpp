#include "bq/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bq {

int parallel_threads() {
#ifdef _OPENMP
  int threads = omp_get_max_threads();
#else
  int threads = 1;
#endif
  if (const char* cap = std::getenv("BULLETIN_QUEUES_THREADS")) {
    try {
      const int n = std::stoi(cap);
      if (n > 0) threads = std::min(threads, n);
    } catch (const std::exception&) {
      // unparsable cap is ignored
    }
  }
  return std::max(threads, 1);
}

bool openmp_enabled() noexcept {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace bq
