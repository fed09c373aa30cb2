#include "doctest.h"

#include <cmath>

#include "dob/core.hpp"
#include "dob/rng.hpp"

using namespace dob;

TEST_SUITE_BEGIN("core");

TEST_CASE("region indexing round trips, first site fastest") {
    StateSpace space({2, 3, 2});
    Region r{0, 2};
    CHECK(region_size(space, r) == 4);
    CHECK(region_index(space, r, {1, 1}) == 3); // 1 + 2*1
    CHECK(region_index(space, r, {0, 1}) == 2);
    for (std::int64_t i = 0; i < 4; ++i)
        CHECK(region_index(space, r, region_config(space, r, i)) == i);

    for (std::int64_t i = 0; i < space.joint_size(); ++i)
        CHECK(config_index(space, config_of_index(space, i)) == i);
    CHECK(space.joint_size() == 12);
}

TEST_CASE("restrict and splice are inverse") {
    StateSpace space({2, 3, 2, 4});
    Config x{1, 2, 0, 3};
    Region r{1, 3};
    Config sub = restrict_config(x, r);
    CHECK(sub == Config{2, 3});
    Config y = splice(x, r, {0, 1});
    CHECK(y == Config{1, 0, 0, 1});
    CHECK(splice(y, r, sub) == x);
}

TEST_CASE("region validation rejects malformed regions") {
    StateSpace space({2, 2, 2});
    CHECK_THROWS_AS(validate_region(space, {1, 0}), DobError);
    CHECK_THROWS_AS(validate_region(space, {0, 0}), DobError);
    CHECK_THROWS_AS(validate_region(space, {0, 3}), DobError);
    CHECK_NOTHROW(validate_region(space, {0, 2}));
}

TEST_CASE("region set algebra") {
    StateSpace space({2, 2, 2, 2});
    CHECK(region_complement(space, {1, 3}) == Region{0, 2});
    CHECK(region_union({0, 2}, {1, 2}) == Region{0, 1, 2});
    CHECK(region_contains({0, 2}, 2));
    CHECK(!region_contains({0, 2}, 1));
}

TEST_CASE("joint size guard refuses huge spaces") {
    CHECK_THROWS_AS(StateSpace(std::vector<int>({1 << 16, 1 << 16})), GuardError);
    CHECK_THROWS_AS(StateSpace(std::vector<int>({2, 0})), DobError);
}

TEST_CASE("site metrics validate their axioms") {
    SiteMetric t = SiteMetric::make_trivial(3);
    CHECK(t(0, 0) == 0.0);
    CHECK(t(0, 2) == 1.0);
    CHECK(t.max_value() == 1.0);

    SiteMetric m = SiteMetric::make_table(2, {0, 2, 2, 0});
    CHECK(m(0, 1) == 2.0);
    CHECK(m.max_value() == 2.0);

    // asymmetric
    CHECK_THROWS_AS(SiteMetric::make_table(2, {0, 1, 2, 0}), DobError);
    // nonzero diagonal
    CHECK_THROWS_AS(SiteMetric::make_table(2, {1, 1, 1, 0}), DobError);
    // zero off the diagonal
    CHECK_THROWS_AS(SiteMetric::make_table(2, {0, 0, 0, 0}), DobError);
    // triangle inequality: d(0,2)=5 > d(0,1)+d(1,2)=2
    CHECK_THROWS_AS(SiteMetric::make_table(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}), DobError);
}

TEST_CASE("local function evaluation") {
    StateSpace space({2, 2, 2});
    LocalFunction f = indicator_at(space, {0, 2}, {1, 0});
    CHECK(f.eval(space, {1, 0, 0}) == 1.0);
    CHECK(f.eval(space, {1, 1, 0}) == 1.0);
    CHECK(f.eval(space, {0, 0, 0}) == 0.0);
    CHECK(f.eval(space, {1, 0, 1}) == 0.0);
}

TEST_CASE("oscillation against hand-computed table") {
    StateSpace space({2, 2});
    // f(x0,x1) with first site fastest: f(0,0)=0 f(1,0)=1 f(0,1)=2 f(1,1)=5
    LocalFunction f{{0, 1}, {0, 1, 2, 5}};
    SiteMetric t = SiteMetric::make_trivial(2);
    CHECK(oscillation(space, f, 0, t) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(oscillation(space, f, 1, t) == doctest::Approx(4.0).epsilon(1e-15));

    // doubling the metric halves the ratio
    SiteMetric m = SiteMetric::make_table(2, {0, 2, 2, 0});
    CHECK(oscillation(space, f, 0, m) == doctest::Approx(1.5).epsilon(1e-15));

    // sites outside the support do not move f
    LocalFunction g{{0}, {0.0, 1.0}};
    CHECK(oscillation(space, g, 1, t) == 0.0);
}

TEST_CASE("oscillation is subadditive on random tables") {
    StateSpace space({2, 3, 2});
    SiteMetric t = SiteMetric::make_trivial(3);
    for (int rep = 0; rep < 20; ++rep) {
        LocalFunction f{{0, 1}, {}}, g{{1, 2}, {}};
        Stream sf(41, {(std::uint64_t)rep, 0}), sg(41, {(std::uint64_t)rep, 1});
        for (int i = 0; i < 6; ++i) f.table.push_back(sf.next_double());
        for (int i = 0; i < 6; ++i) g.table.push_back(sg.next_double());

        // h = f + g as a function of all three sites
        LocalFunction h{{0, 1, 2}, std::vector<double>(12, 0.0)};
        for (std::int64_t i = 0; i < 12; ++i) {
            Config x = config_of_index(space, i);
            h.table[(std::size_t)i] = f.eval(space, x) + g.eval(space, x);
        }
        for (int j = 0; j < 3; ++j) {
            const double os = oscillation(space, h, j, SiteMetric::make_trivial(space.card[(std::size_t)j]));
            const double bound = oscillation(space, f, j, SiteMetric::make_trivial(space.card[(std::size_t)j])) +
                                 oscillation(space, g, j, SiteMetric::make_trivial(space.card[(std::size_t)j]));
            CHECK(os <= bound + 1e-12);
        }
    }
}

TEST_CASE("counter rng streams are stable and decorrelated") {
    Stream a(1, {2, 3});
    Stream b(1, {2, 3});
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_double() == b.next_double());

    Stream c(1, {2, 4});
    bool any_diff = false;
    for (int i = 0; i < 4; ++i) any_diff = any_diff || (a.next_u64() != c.next_u64());
    CHECK(any_diff);

    // doubles land in [0,1)
    Stream d(9, {1});
    for (int i = 0; i < 100; ++i) {
        const double u = d.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }

    // categorical respects the weights roughly
    Stream e(7, {5});
    std::vector<double> w{1.0, 3.0};
    int ones = 0;
    for (int i = 0; i < 2000; ++i) ones += e.next_categorical(w);
    CHECK(ones > 1300);
    CHECK(ones < 1700);
}

TEST_SUITE_END();
