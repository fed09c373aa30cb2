#pragma once

#include <cstdint>
#include <functional>
#include <vector>

// Thread pool knobs for the OpenMP kernels.  Every parallel loop either
// writes disjoint output slots or reduces over fixed-size chunks merged in
// chunk order, so results are bitwise identical for any thread count.

namespace dob::par {

int  threads();            // current worker count (defaults to DOB_THREADS or 1)
void set_threads(int n);

// f(i) for i in [0,n); each call must only touch state owned by index i.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f);

inline constexpr std::int64_t kChunk = 4096;

// Accumulate n_items contributions into an n_out-sized vector.  fn(i, out)
// adds item i into out.  Items are grouped into fixed chunks; chunk partials
// are merged serially in chunk order.
std::vector<double> chunked_accumulate(std::int64_t n_items, std::int64_t n_out,
                                       const std::function<void(std::int64_t, std::vector<double>&)>& fn);

} // namespace dob::par
