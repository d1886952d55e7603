#include "kspp/threading.hpp"

#include <algorithm>
#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kspp::threading {

namespace {
std::atomic<int> g_threads{
#ifdef _OPENMP
    0  // resolved lazily from omp_get_max_threads()
#else
    1
#endif
};
}  // namespace

void set_threads(int k) { g_threads.store(std::max(1, k)); }

int threads() {
    int k = g_threads.load();
#ifdef _OPENMP
    if (k == 0) {
        k = std::max(1, omp_get_max_threads());
        g_threads.store(k);
    }
#endif
    return k;
}

bool parallel_enabled() {
#ifdef _OPENMP
    return threads() > 1;
#else
    return false;
#endif
}

}  // namespace kspp::threading
