#include "artsep/par.hpp"

#include <atomic>

namespace artsep::par {

namespace {
std::atomic<int> g_max_threads{0};
}

int max_threads() { return g_max_threads.load(); }

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int worker_count() {
#ifdef _OPENMP
  int cap = g_max_threads.load();
  int hw = omp_get_max_threads();
  return (cap > 0 && cap < hw) ? cap : hw;
#else
  return 1;
#endif
}

}  // namespace artsep::par
