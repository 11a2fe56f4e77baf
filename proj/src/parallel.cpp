#include "qfall/parallel.hpp"

#include <cstdlib>
#include <string>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace qfall::parallel {

namespace {
#if defined(_OPENMP)
const int kDefaultThreads = omp_get_max_threads();
#endif
}  // namespace

void set_max_threads(int n) {
#if defined(_OPENMP)
  omp_set_num_threads(n > 0 ? n : kDefaultThreads);
#else
  (void)n;
#endif
}

int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void configure_from_environment() {
  const char* env = std::getenv("SIM_THREADS");
  if (env == nullptr) return;
  try {
    set_max_threads(std::stoi(env));
  } catch (const std::exception&) {
    // ignore malformed values, keep the runtime default
  }
}

}  // namespace qfall::parallel
