#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "dob/blockpf.hpp"
#include "dob/hmm.hpp"
#include "dob/matrices.hpp"
#include "dob/oracle.hpp"
#include "dob/parallel.hpp"
#include "dob/rng.hpp"

// Times each OpenMP kernel against its serial twin and checks that the two
// agree bitwise (the parallel loops are written to be order-identical).

using namespace dob;

namespace {

double ms_of(const std::function<void()>& fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// reduction kernels fix their own summation grouping, which differs from the
// naive serial order; those are compared with a tolerance instead
bool close_enough(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

void report(const char* name, double serial_ms, double parallel_ms, bool ok, bool bitwise) {
    std::printf("%-16s serial %9.3f ms   parallel(%d) %9.3f ms   speedup %5.2fx   %s\n", name,
                serial_ms, par::threads(), parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
                ok ? (bitwise ? "bitwise-equal" : "match(1e-12)") : "MISMATCH");
}

FactorModel random_pairwise(int sites, std::uint64_t seed) {
    FactorModel model;
    model.space = StateSpace(std::vector<int>((std::size_t)sites, 2));
    for (int a = 0; a + 1 < sites; ++a) {
        Factor f;
        f.region = {a, a + 1};
        f.table.resize(4);
        for (int c = 0; c < 4; ++c) {
            Stream st(seed, {(std::uint64_t)a, (std::uint64_t)c});
            f.table[(std::size_t)c] = std::exp(st.next_double() - 0.5);
        }
        model.factors.push_back(std::move(f));
    }
    return model;
}

} // namespace

int main(int argc, char** argv) {
    int threads = par::threads();
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--threads") threads = std::atoi(argv[i + 1]);
    par::set_threads(threads);

    bool all_ok = true;

    {
        const int n = 192;
        NonnegMatrix A(n), B(n);
        for (int i = 0; i < n * n; ++i) {
            Stream st(7, {(std::uint64_t)i});
            A.a[(std::size_t)i] = st.next_double();
            B.a[(std::size_t)i] = st.next_double();
        }
        NonnegMatrix rs = ref::mat_mul(A, B), rp = mat_mul(A, B);
        par::set_threads(1);
        const double ts = ms_of([&] { rs = ref::mat_mul(A, B); }, 3);
        par::set_threads(threads);
        const double tp = ms_of([&] { rp = mat_mul(A, B); }, 3);
        const bool ok = bitwise_equal(rs.a, rp.a);
        all_ok = all_ok && ok;
        report("mat_mul", ts, tp, ok, true);
    }

    {
        FactorModel model = random_pairwise(14, 11);
        ExactMeasure ms = ref::normalize(model), mp = normalize(model);
        par::set_threads(1);
        const double ts = ms_of([&] { ms = ref::normalize(model); }, 3);
        par::set_threads(threads);
        const double tp = ms_of([&] { mp = normalize(model); }, 3);
        const bool ok = bitwise_equal(ms.p, mp.p);
        all_ok = all_ok && ok;
        report("normalize", ts, tp, ok, true);

        Region half;
        for (int i = 0; i < 7; ++i) half.push_back(i);
        std::vector<double> gs = ref::marginal(ms, half), gp = marginal(mp, half);
        par::set_threads(1);
        const double us = ms_of([&] { gs = ref::marginal(ms, half); }, 5);
        par::set_threads(threads);
        const double up = ms_of([&] { gp = marginal(mp, half); }, 5);
        const bool ok2 = close_enough(gs, gp, 1e-12);
        all_ok = all_ok && ok2;
        report("marginal", us, up, ok2, false);
    }

    {
        LatticeHMM model = build_grid_model({3, 3}, 1, 0.9, 0.5, 0.5, 5);
        ExactMeasure pi = uniform_measure(model.hidden_space());
        ExactMeasure fs = ref::predict_exact(model, pi), fp = predict_exact(model, pi);
        par::set_threads(1);
        const double ts = ms_of([&] { fs = ref::predict_exact(model, pi); }, 2);
        par::set_threads(threads);
        const double tp = ms_of([&] { fp = predict_exact(model, pi); }, 2);
        const bool ok = bitwise_equal(fs.p, fp.p);
        all_ok = all_ok && ok;
        report("predict_exact", ts, tp, ok, true);
    }

    {
        LatticeHMM model = build_grid_model({8}, 1, 0.9, 0.5, 0.5, 9);
        Trajectory tr = simulate(model, 5, 21);
        Partition part = contiguous_partition(8, 4);
        ParticleState st = block_particle_filter(model, part, tr.y, 2000, 31);
        par::set_threads(1);
        const double ts =
            ms_of([&] { st = block_particle_filter(model, part, tr.y, 2000, 31); }, 2);
        par::set_threads(threads);
        ParticleState sp = block_particle_filter(model, part, tr.y, 2000, 31);
        const double tp =
            ms_of([&] { sp = block_particle_filter(model, part, tr.y, 2000, 31); }, 2);
        bool ok = st.blocks == sp.blocks;
        all_ok = all_ok && ok;
        report("particle_step", ts, tp, ok, true);
    }

    if (!all_ok) {
        std::printf("kernel mismatch detected\n");
        return 1;
    }
    return 0;
}
