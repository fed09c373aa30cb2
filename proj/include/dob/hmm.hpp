#pragma once

#include <cstdint>
#include <vector>

#include "dob/core.hpp"

// Hidden Markov models indexed by the vertices of a small lattice: the
// hidden state moves by per-vertex kernels that read a radius-r graph
// neighborhood, observations are per-vertex emissions.  Transition and
// emission tables are stored as densities with mean-1 rows relative to the
// uniform reference on the respective alphabet, so envelope constants can
// bracket them without forcing degenerate rows.

namespace dob {

struct LatticeGraph {
    int n = 0;
    std::vector<int> shape;   // 1 or 2 dims
    bool periodic = true;
    int radius = 1;
    std::vector<std::vector<int>> adj;
    std::vector<std::vector<int>> nbhd; // sorted ball of radius r, includes the vertex
    std::vector<int> dist;              // n*n graph distances

    int distance(int a, int b) const { return dist[(std::size_t)a * n + b]; }
};

LatticeGraph make_lattice(const std::vector<int>& shape, bool periodic, int radius);

struct LatticeHMM {
    LatticeGraph graph;
    std::vector<int> xcard; // hidden alphabet per vertex
    std::vector<int> ycard; // observation alphabet per vertex
    double eps = 1.0;       // transition envelope: eps*q <= p <= q/eps
    double delta = 0.5;     // base kernel envelope: delta <= q <= 1/delta
    double kappa = 0.5;     // emission envelope: kappa <= g <= 1/kappa

    // base kernel q_v: xcard[v] x xcard[v], rows sum to xcard[v]
    std::vector<std::vector<double>> q;
    // raw uniforms behind the neighbor perturbation, |cfg(N(v))| x xcard[v];
    // kept so p can be rebuilt for any eps without regenerating randomness
    std::vector<std::vector<double>> perturb;
    // local transition p_v: |cfg(N(v))| x xcard[v], rows sum to xcard[v]
    std::vector<std::vector<double>> p;
    // emission g_v: xcard[v] x ycard[v], rows sum to ycard[v]
    std::vector<std::vector<double>> g;

    StateSpace hidden_space() const { return StateSpace(xcard); }
    StateSpace obs_space() const { return StateSpace(ycard); }

    // transition probability P(z_v | neighborhood config) = p/xcard[v]
    double trans_prob(int v, std::int64_t nb_cfg, int z) const {
        return p[(std::size_t)v][(std::size_t)(nb_cfg * xcard[(std::size_t)v] + z)] /
               xcard[(std::size_t)v];
    }
    double emit_prob(int v, int x, int y) const {
        return g[(std::size_t)v][(std::size_t)(x * ycard[(std::size_t)v] + y)] /
               ycard[(std::size_t)v];
    }
    // emission density g_v(x,y); likelihood weights for filtering
    double emit_density(int v, int x, int y) const {
        return g[(std::size_t)v][(std::size_t)(x * ycard[(std::size_t)v] + y)];
    }
};

// Random model on the given lattice: base kernels inside the delta envelope,
// neighbor perturbations sized so the eps envelope is exact, emissions
// inside the kappa envelope.  All three envelopes are re-verified entrywise.
LatticeHMM build_grid_model(const std::vector<int>& shape, int radius, double eps,
                            double delta_floor, double kappa, std::uint64_t seed,
                            bool periodic = true, int xcard = 2, int ycard = 2);

// Rebuild p from q and the stored perturbation for a new eps.
void rebuild_transitions(LatticeHMM& model, double eps);

// Entrywise envelope check; throws with the tightest violated entry.
void verify_envelopes(const LatticeHMM& model);

struct Trajectory {
    std::vector<Config> x; // length n+1, x[0] is the initial condition
    std::vector<Config> y; // length n, y[k] observed with x[k+1]
};

// Simulate n steps from the all-zero (or given) initial configuration.
Trajectory simulate(const LatticeHMM& model, int n, std::uint64_t seed,
                    const Config* x0 = nullptr);

struct Partition {
    std::vector<Region> blocks;
};

Partition whole_partition(int n_vertices);
Partition contiguous_partition(int n_vertices, int block_size);

void validate_partition(const LatticeGraph& graph, const Partition& partition);

// Block geometry for the filter error bounds.
struct Geometry {
    int max_block = 0;                  // largest block cardinality
    int delta_graph = 0;                // max vertices within distance r of a vertex
    int delta_blocks = 0;               // max blocks within distance r of a block
    std::vector<std::vector<int>> boundary; // per block: vertices whose ball leaves it
    std::vector<int> block_of;              // vertex -> block index
    std::vector<int> dist_to_boundary;      // graph distance to own block boundary
};

Geometry geometry(const LatticeGraph& graph, const Partition& partition);

} // namespace dob
