#include "doctest.h"

#include <cmath>
#include <limits>

#include "dob/matrices.hpp"
#include "dob/rng.hpp"

using namespace dob;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

NonnegMatrix from_rows(int n, const std::vector<double>& rows) {
    NonnegMatrix m(n);
    m.a = rows;
    return m;
}
} // namespace

TEST_SUITE_BEGIN("matrices");

TEST_CASE("extended arithmetic treats inf*0 as 0") {
    CHECK(ext_mul(kInf, 0.0) == 0.0);
    CHECK(ext_mul(0.0, kInf) == 0.0);
    CHECK(ext_mul(kInf, 2.0) == kInf);
    CHECK(ext_mul(3.0, 4.0) == 12.0);
    CHECK(ext_add(kInf, 1.0) == kInf);
    CHECK(ext_add(1.0, 2.0) == 3.0);
}

TEST_CASE("matrix product against hand example and serial twin") {
    NonnegMatrix A = from_rows(2, {1, 2, 3, 4});
    NonnegMatrix C = mat_mul(A, A);
    CHECK(C.at(0, 0) == 7.0);
    CHECK(C.at(0, 1) == 10.0);
    CHECK(C.at(1, 0) == 15.0);
    CHECK(C.at(1, 1) == 22.0);

    NonnegMatrix B(17);
    for (int i = 0; i < 17 * 17; ++i) {
        Stream st(3, {(std::uint64_t)i});
        B.a[(std::size_t)i] = st.next_double();
    }
    NonnegMatrix P = mat_mul(B, B), S = ref::mat_mul(B, B);
    for (std::size_t i = 0; i < P.a.size(); ++i) CHECK(P.a[i] == S.a[i]);
}

TEST_CASE("infinity propagates through products unless annihilated") {
    NonnegMatrix A = from_rows(2, {kInf, 0, 0, 1});
    NonnegMatrix B = from_rows(2, {0, 1, 1, 0});
    NonnegMatrix C = mat_mul(A, B);
    // inf*0 + 0*1 = 0 ; inf*1 + 0*0 = inf
    CHECK(C.at(0, 0) == 0.0);
    CHECK(C.at(0, 1) == kInf);
    CHECK(!C.finite());
    CHECK(from_rows(1, {1.0}).finite());
}

TEST_CASE("norms") {
    NonnegMatrix A = from_rows(2, {1, 2, 3, 4});
    CHECK(norm_inf(A) == 7.0); // max row sum
    CHECK(norm_1(A) == 6.0);   // max column sum
    CHECK(A.max_entry() == 4.0);
}

TEST_CASE("diagonal scaling") {
    NonnegMatrix R = from_rows(2, {2, 4, 8, 12});
    NonnegMatrix L = diag_inv_mul({2, 4}, R); // W^-1 R
    CHECK(L.at(0, 0) == 1.0);
    CHECK(L.at(0, 1) == 2.0);
    CHECK(L.at(1, 0) == 2.0);
    CHECK(L.at(1, 1) == 3.0);
    NonnegMatrix Rt = mul_diag_inv(R, {2, 4}); // R W^-1
    CHECK(Rt.at(0, 0) == 1.0);
    CHECK(Rt.at(0, 1) == 1.0);
    CHECK(Rt.at(1, 0) == 4.0);
    CHECK(Rt.at(1, 1) == 3.0);
}

TEST_CASE("neumann sum of a scalar contraction is the geometric series") {
    NonnegMatrix A = from_rows(1, {0.5});
    NeumannResult r = neumann_sum(A);
    CHECK(r.converged);
    CHECK(r.sum.at(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

    NonnegMatrix B = from_rows(1, {1.0});
    NeumannResult rb = neumann_sum(B);
    CHECK(!rb.converged);
}

TEST_CASE("neumann sum matches the frozen matrix inverse") {
    NonnegMatrix A = from_rows(3, {0.1, 0.2, 0.0, 0.05, 0.1, 0.3, 0.2, 0.0, 0.1});
    NeumannResult r = neumann_sum(A);
    REQUIRE(r.converged);
    const double inv[9] = {1.1440677966101696, 0.2542372881355932,  0.0847457627118644,
                           0.1483050847457627, 1.1440677966101696,  0.3813559322033898,
                           0.2542372881355932, 0.05649717514124295, 1.1299435028248588};
    for (int i = 0; i < 9; ++i)
        CHECK(r.sum.a[(std::size_t)i] == doctest::Approx(inv[i]).epsilon(1e-10));
    // dominates the identity entrywise
    for (int i = 0; i < 3; ++i) CHECK(r.sum.at(i, i) >= 1.0);
}

TEST_CASE("neumann sum reports divergence as infinite without error") {
    NonnegMatrix A = from_rows(2, {2.0, 0.0, 0.0, 0.1});
    NeumannResult r = neumann_sum(A);
    CHECK(!r.converged);
}

TEST_CASE("spectral radius estimate") {
    CHECK(spectral_radius_estimate(from_rows(2, {0.3, 0, 0, 0.7})) ==
          doctest::Approx(0.7).epsilon(1e-6));
    CHECK(spectral_radius_estimate(from_rows(2, {0, 1, 1, 0})) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(spectral_radius_estimate(from_rows(2, {0, 0, 0, 0})) ==
          doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("weighted column norm with exponential weights") {
    // 3-chain with hops of 0.4; weights e^{beta*|i-j|} at beta = log 2
    NonnegMatrix A = from_rows(3, {0, 0.4, 0, 0.4, 0, 0.4, 0, 0.4, 0});
    std::vector<double> dist(9, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dist[(std::size_t)(i * 3 + j)] = std::abs(i - j);
    CHECK(weighted_norm_1(A, dist, std::log(2.0)) == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(weighted_norm_1(A, dist, 0.0) == doctest::Approx(norm_1(A)).epsilon(1e-12));
}

TEST_CASE("pseudometric validation") {
    std::vector<double> good{0, 1, 1, 0}; // 2 sites
    CHECK_NOTHROW(validate_pseudometric(good, 2));
    std::vector<double> asym{0, 1, 2, 0};
    CHECK_THROWS_AS(validate_pseudometric(asym, 2), DobError);
    std::vector<double> negdiag{-1, 1, 1, 0};
    CHECK_THROWS_AS(validate_pseudometric(negdiag, 2), DobError);
    // zero off-diagonal is allowed for pseudometrics
    std::vector<double> pseudo{0, 0, 0, 0};
    CHECK_NOTHROW(validate_pseudometric(pseudo, 2));
}

TEST_CASE("submultiplicativity of norms on random products") {
    for (int rep = 0; rep < 10; ++rep) {
        NonnegMatrix A(4), B(4);
        for (int i = 0; i < 16; ++i) {
            Stream sa(17, {(std::uint64_t)rep, 0, (std::uint64_t)i});
            Stream sb(17, {(std::uint64_t)rep, 1, (std::uint64_t)i});
            A.a[(std::size_t)i] = sa.next_double();
            B.a[(std::size_t)i] = sb.next_double();
        }
        NonnegMatrix C = mat_mul(A, B);
        CHECK(norm_inf(C) <= norm_inf(A) * norm_inf(B) + 1e-12);
        CHECK(norm_1(C) <= norm_1(A) * norm_1(B) + 1e-12);
    }
}

TEST_SUITE_END();
