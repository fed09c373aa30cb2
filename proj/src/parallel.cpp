#include "dob/parallel.hpp"

#include <algorithm>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dob::par {

namespace {
int g_threads = 0;

int default_threads() {
    if (const char* env = std::getenv("DOB_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}
} // namespace

int threads() {
    if (g_threads == 0) g_threads = default_threads();
    return g_threads;
}

void set_threads(int n) { g_threads = n > 0 ? n : 1; }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f) {
    const int nt = threads();
#ifdef _OPENMP
    if (nt > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(nt)
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
#endif
    (void)nt;
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

std::vector<double> chunked_accumulate(std::int64_t n_items, std::int64_t n_out,
                                       const std::function<void(std::int64_t, std::vector<double>&)>& fn) {
    const std::int64_t n_chunks = (n_items + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> partial((std::size_t)n_chunks);
    parallel_for(n_chunks, [&](std::int64_t c) {
        std::vector<double> local((std::size_t)n_out, 0.0);
        const std::int64_t lo = c * kChunk;
        const std::int64_t hi = std::min(n_items, lo + kChunk);
        for (std::int64_t i = lo; i < hi; ++i) fn(i, local);
        partial[(std::size_t)c] = std::move(local);
    });
    std::vector<double> out((std::size_t)n_out, 0.0);
    for (std::int64_t c = 0; c < n_chunks; ++c)
        for (std::int64_t k = 0; k < n_out; ++k)
            out[(std::size_t)k] += partial[(std::size_t)c][(std::size_t)k];
    return out;
}

} // namespace dob::par
