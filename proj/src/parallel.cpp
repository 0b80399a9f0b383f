#include "cii/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cii {

namespace {
int g_threads = 1;
}

void set_num_threads(int n) {
#ifdef _OPENMP
    g_threads = (n <= 0) ? omp_get_max_threads() : n;
#else
    g_threads = 1;
    (void)n;
#endif
}

int num_threads() {
    return g_threads;
}

}  // namespace cii
