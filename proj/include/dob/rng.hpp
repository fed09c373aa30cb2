#pragma once

#include <cstdint>
#include <vector>

// Counter-based random streams.  Every draw is a pure function of
// (seed, key words, counter), so results never depend on thread count
// or evaluation order.

namespace dob {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Hash a seed plus a short word list into a stream base.
inline std::uint64_t stream_base(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc908ull);
    for (std::uint64_t w : words)
        h = mix64(h ^ (w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
    return h;
}

struct Stream {
    std::uint64_t base = 0;
    std::uint64_t ctr = 0;

    Stream() = default;
    Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> words)
        : base(stream_base(seed, words)) {}

    std::uint64_t next_u64() { return mix64(base + 0x632be59bd9b4e019ull * ++ctr); }

    // uniform in [0,1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // index i drawn with probability w[i]/sum(w); w need not be normalized
    int next_categorical(const std::vector<double>& w) {
        double tot = 0.0;
        for (double v : w) tot += v;
        double u = next_double() * tot;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            acc += w[i];
            if (u < acc) return int(i);
        }
        return int(w.size()) - 1;
    }

    int next_categorical(const double* w, int n) {
        double tot = 0.0;
        for (int i = 0; i < n; ++i) tot += w[i];
        double u = next_double() * tot;
        double acc = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            acc += w[i];
            if (u < acc) return i;
        }
        return n - 1;
    }
};

} // namespace dob
