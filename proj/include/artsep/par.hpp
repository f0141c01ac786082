#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace artsep::par {

// Global worker cap. 0 means "use all hardware threads". Parallel kernels are
// written so their results do not depend on the thread count: per-item writes
// go to disjoint slots and reductions merge fixed-index partials in order.
int max_threads();
void set_max_threads(int n);

// Number of threads a parallel region should actually use.
int worker_count();

}  // namespace artsep::par
