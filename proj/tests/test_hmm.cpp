#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "dob/hmm.hpp"

using namespace dob;

TEST_SUITE_BEGIN("hmm");

TEST_CASE("cycle lattice adjacency and distances") {
    LatticeGraph g = make_lattice({4}, true, 1);
    CHECK(g.n == 4);
    CHECK(g.nbhd[0] == std::vector<int>{0, 1, 3});
    CHECK(g.nbhd[2] == std::vector<int>{1, 2, 3});
    CHECK(g.distance(0, 3) == 1);
    CHECK(g.distance(0, 2) == 2);

    LatticeGraph path = make_lattice({4}, false, 1);
    CHECK(path.nbhd[0] == std::vector<int>{0, 1});
    CHECK(path.distance(0, 3) == 3);

    LatticeGraph wide = make_lattice({6}, true, 2);
    CHECK(wide.nbhd[0] == std::vector<int>{0, 1, 2, 4, 5});
    CHECK(wide.distance(0, 3) == 3);
}

TEST_CASE("two-dimensional lattice wraps only dims above two") {
    LatticeGraph g = make_lattice({2, 3}, true, 1);
    CHECK(g.n == 6);
    // vertices are row-major; rows do not wrap at size 2, columns do at 3
    CHECK(g.adj[0] == std::vector<int>{1, 2, 3});
    CHECK(g.distance(0, 5) == 2);

    LatticeGraph open = make_lattice({2, 3}, false, 1);
    CHECK(open.adj[0] == std::vector<int>{1, 3});
    CHECK(open.distance(0, 5) == 3);

    LatticeGraph torus = make_lattice({3, 3}, true, 1);
    for (int v = 0; v < 9; ++v) CHECK(torus.adj[(std::size_t)v].size() == 4);
    CHECK(torus.distance(0, 8) == 2);
}

TEST_CASE("lattice construction rejects bad inputs") {
    CHECK_THROWS_AS(make_lattice({}, true, 1), DobError);
    CHECK_THROWS_AS(make_lattice({2, 2, 2}, true, 1), DobError);
    CHECK_THROWS_AS(make_lattice({0}, true, 1), DobError);
    CHECK_THROWS_AS(make_lattice({4}, true, -1), DobError);
}

TEST_CASE("random model respects all three envelopes") {
    LatticeHMM m = build_grid_model({3, 3}, 1, 0.8, 0.3, 0.4, 7);
    CHECK_NOTHROW(verify_envelopes(m));
    CHECK(m.graph.n == 9);
    for (int v = 0; v < m.graph.n; ++v) {
        const int k = m.xcard[(std::size_t)v];
        for (std::size_t r = 0; r * (std::size_t)k < m.q[(std::size_t)v].size(); ++r) {
            double s = 0.0;
            for (int z = 0; z < k; ++z) s += m.q[(std::size_t)v][r * (std::size_t)k + z];
            CHECK(s == doctest::Approx((double)k).epsilon(1e-12));
        }
        for (std::size_t r = 0; r * (std::size_t)k < m.p[(std::size_t)v].size(); ++r) {
            double s = 0.0;
            for (int z = 0; z < k; ++z) s += m.p[(std::size_t)v][r * (std::size_t)k + z];
            CHECK(s == doctest::Approx((double)k).epsilon(1e-12));
        }
        // transition rows are probability rows after the alphabet division
        const std::size_t nrows = m.p[(std::size_t)v].size() / (std::size_t)k;
        for (std::size_t r = 0; r < nrows; ++r) {
            double s = 0.0;
            for (int z = 0; z < k; ++z) s += m.trans_prob(v, (std::int64_t)r, z);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("envelope checker flags violations") {
    LatticeHMM m = build_grid_model({4}, 1, 0.9, 0.4, 0.5, 11);
    m.q[0][0] = 0.01; // below the delta floor
    CHECK_THROWS_AS(verify_envelopes(m), DobError);
}

TEST_CASE("unit eps makes transitions depend on the own state only") {
    LatticeHMM m = build_grid_model({4}, 1, 1.0, 0.3, 0.5, 3);
    for (int v = 0; v < m.graph.n; ++v) {
        const int k = m.xcard[(std::size_t)v];
        const auto& nb = m.graph.nbhd[(std::size_t)v];
        std::size_t vstride = 1;
        for (int u : nb) {
            if (u == v) break;
            vstride *= (std::size_t)m.xcard[(std::size_t)u];
        }
        const std::size_t nrows = m.p[(std::size_t)v].size() / (std::size_t)k;
        for (std::size_t r = 0; r < nrows; ++r) {
            const std::size_t xv = (r / vstride) % (std::size_t)k;
            for (int z = 0; z < k; ++z)
                CHECK(m.p[(std::size_t)v][r * (std::size_t)k + z] ==
                      doctest::Approx(m.q[(std::size_t)v][xv * (std::size_t)k + z])
                          .epsilon(1e-12));
        }
    }
}

TEST_CASE("transitions can be rebuilt for a new eps") {
    LatticeHMM m = build_grid_model({4}, 1, 0.9, 0.3, 0.5, 5);
    std::vector<std::vector<double>> p_before = m.p;
    rebuild_transitions(m, 0.6);
    CHECK(m.eps == 0.6);
    CHECK_NOTHROW(verify_envelopes(m));
    CHECK(m.p != p_before); // wider envelope moves the entries
    rebuild_transitions(m, 0.9);
    CHECK(m.p == p_before); // and the stored randomness brings them back
}

TEST_CASE("simulation is deterministic in the seed") {
    LatticeHMM m = build_grid_model({2, 2}, 1, 0.9, 0.4, 0.5, 13);
    Trajectory t1 = simulate(m, 6, 101);
    Trajectory t2 = simulate(m, 6, 101);
    Trajectory t3 = simulate(m, 6, 102);
    REQUIRE(t1.x.size() == 7);
    REQUIRE(t1.y.size() == 6);
    CHECK(t1.x == t2.x);
    CHECK(t1.y == t2.y);
    CHECK(t1.y != t3.y);
    CHECK(t1.x[0] == Config(4, 0));
    for (const Config& c : t1.x)
        for (std::size_t v = 0; v < c.size(); ++v) {
            CHECK(c[v] >= 0);
            CHECK(c[v] < m.xcard[v]);
        }
    Config start{1, 0, 1, 0};
    Trajectory t4 = simulate(m, 3, 101, &start);
    CHECK(t4.x[0] == start);
}

TEST_CASE("partition constructors and validation") {
    Partition w = whole_partition(5);
    REQUIRE(w.blocks.size() == 1);
    CHECK(w.blocks[0] == Region{0, 1, 2, 3, 4});

    Partition c = contiguous_partition(8, 3);
    REQUIRE(c.blocks.size() == 3);
    CHECK(c.blocks[0] == Region{0, 1, 2});
    CHECK(c.blocks[2] == Region{6, 7});

    LatticeGraph g = make_lattice({8}, true, 1);
    CHECK_NOTHROW(validate_partition(g, c));
    CHECK_THROWS_AS(validate_partition(g, Partition{{Region{0, 1}}}), DobError);
    CHECK_THROWS_AS(validate_partition(g, Partition{{Region{0, 1, 1, 2, 3, 4, 5, 6, 7}}}),
                    DobError);
    Partition overlap{{Region{0, 1, 2, 3}, Region{3, 4, 5, 6, 7}}};
    CHECK_THROWS_AS(validate_partition(g, overlap), DobError);
    Partition oob{{Region{0, 1, 2, 3}, Region{4, 5, 6, 8}}};
    CHECK_THROWS_AS(validate_partition(g, oob), DobError);
}

TEST_CASE("block geometry on the eight-cycle") {
    LatticeGraph g = make_lattice({8}, true, 1);
    Geometry geo = geometry(g, contiguous_partition(8, 4));
    CHECK(geo.max_block == 4);
    CHECK(geo.delta_graph == 3);
    CHECK(geo.delta_blocks == 2);
    REQUIRE(geo.boundary.size() == 2);
    CHECK(geo.boundary[0] == std::vector<int>{0, 3});
    CHECK(geo.boundary[1] == std::vector<int>{4, 7});
    CHECK(geo.block_of == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
    CHECK(geo.dist_to_boundary == std::vector<int>{0, 1, 1, 0, 0, 1, 1, 0});

    Geometry whole = geometry(g, whole_partition(8));
    CHECK(whole.max_block == 8);
    CHECK(whole.delta_blocks == 1);
    CHECK(whole.boundary[0].empty());
    CHECK(whole.dist_to_boundary == std::vector<int>(8, -1));
}

TEST_CASE("wider interaction radius grows the geometry constants") {
    LatticeGraph g = make_lattice({12}, true, 2);
    Geometry geo = geometry(g, contiguous_partition(12, 4));
    CHECK(geo.delta_graph == 5);
    CHECK(geo.delta_blocks == 3);
    CHECK(geo.boundary[0] == std::vector<int>{0, 1, 2, 3});
}

TEST_SUITE_END();
