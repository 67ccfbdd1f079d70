#ifndef AGGSTEM_PARALLEL_HPP
#define AGGSTEM_PARALLEL_HPP

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aggstem {

// Worker count to use for `jobs` requested threads; jobs <= 0 means "all".
inline int resolve_jobs(int jobs) {
#ifdef _OPENMP
    return jobs > 0 ? jobs : omp_get_max_threads();
#else
    (void)jobs;
    return 1;
#endif
}

// Parallel loop over [0, n). Results must not depend on iteration order;
// every kernel built on this writes disjoint output ranges or uses
// per-index child RNG streams, so thread count never changes the output.
template <typename F>
void parallel_for(long long n, int jobs, F&& body) {
    const int nthreads = resolve_jobs(jobs);
    if (nthreads <= 1 || n <= 1) {
        for (long long i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (long long i = 0; i < n; ++i) body(i);
#else
    for (long long i = 0; i < n; ++i) body(i);
#endif
}

} // namespace aggstem

#endif
