#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dob/hmm.hpp"
#include "dob/oracle.hpp"

// Filtering for lattice hidden Markov models in three representations:
// the exact joint filter, the block filter (per-block tables, the joint law
// replaced by a product over partition blocks after each prediction), and
// the block particle filter (per-block ensembles).  Includes the bias and
// variance experiments and the feasibility search for the error bounds'
// small-interaction regime.

namespace dob {

// --- exact filter ---------------------------------------------------------

ExactMeasure predict_exact(const LatticeHMM& model, const ExactMeasure& pi);
ExactMeasure correct_exact(const LatticeHMM& model, const ExactMeasure& pi, const Config& y);

// pi_0 = point mass at x0 (all zeros when null), then n correct(predict)
// steps; returns all n+1 filter laws.
std::vector<ExactMeasure> exact_filter(const LatticeHMM& model, const std::vector<Config>& ys,
                                       const Config* x0 = nullptr);

// Same law by summing over entire hidden paths; independent of the
// recursion, used as its oracle.
ExactMeasure brute_force_filter(const LatticeHMM& model, const std::vector<Config>& ys,
                                const Config* x0 = nullptr);

// --- block filter ---------------------------------------------------------

struct BlockState {
    Partition partition;
    std::vector<std::vector<double>> tables; // per block, over the block's configs
};

BlockState blockify(const ExactMeasure& pi, const Partition& partition);
BlockState predict_block(const LatticeHMM& model, const BlockState& state);
BlockState correct_block(const LatticeHMM& model, const BlockState& state, const Config& y);
BlockState block_filter(const LatticeHMM& model, const Partition& partition,
                        const std::vector<Config>& ys, const Config* x0 = nullptr);

// --- block particle filter ------------------------------------------------

struct ParticleState {
    Partition partition;
    int N = 0;
    // blocks[k] holds N configs over partition.blocks[k]
    std::vector<std::vector<Config>> blocks;
};

// N independent draws from a product-of-blocks table state.
ParticleState sample_state(const StateSpace& space, const BlockState& state, int N,
                           std::uint64_t seed);

// One prediction step: for each block and output particle, ancestor indices
// are drawn independently per neighboring block (the product structure the
// blocking step enforces), the chosen neighbor values are reused for every
// vertex of the block, and each vertex moves by its local kernel.
ParticleState bpf_predict(const LatticeHMM& model, const ParticleState& state, int t,
                          std::uint64_t seed);

// Weight by the emission densities and resample N slots per block
// (multinomial; systematic available but not the default).
ParticleState bpf_correct_resample(const LatticeHMM& model, const ParticleState& state,
                                   const Config& y, int t, std::uint64_t seed,
                                   bool systematic = false);

ParticleState block_particle_filter(const LatticeHMM& model, const Partition& partition,
                                    const std::vector<Config>& ys, int N, std::uint64_t seed,
                                    bool systematic = false, const Config* x0 = nullptr);

// Single-ensemble filter over the whole graph; coincides bitwise with
// block_particle_filter under the one-block partition and the same seed.
ParticleState bootstrap_filter(const LatticeHMM& model, const std::vector<Config>& ys, int N,
                               std::uint64_t seed, bool systematic = false,
                               const Config* x0 = nullptr);

// --- marginals and error norms -------------------------------------------

std::vector<double> state_marginal(const StateSpace& space, const BlockState& state,
                                   const Region& region);
std::vector<double> state_marginal(const StateSpace& space, const ParticleState& state,
                                   const Region& region);

struct TnormEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t sign_patterns = 0;
};

// sup over |f| <= 1 on the region of sqrt(mean over runs of (f . d_s)^2),
// where d_s is run s's marginal minus the reference marginal.  The sup is
// exact: f ranges over sign patterns, enumerated up to 16 cells.
TnormEstimate tnorm_estimate(const std::vector<std::vector<double>>& diffs);

// --- experiments ----------------------------------------------------------

struct ErrorRow {
    std::string experiment_id;
    int n = 0;
    int block_size = 0;
    int site = 0;
    int dist_to_boundary = 0;
    std::int64_t N = 0;
    int replicates = 0;
    double error = 0.0;
    double stderr_ = 0.0;
};

struct ErrorCurve {
    std::vector<ErrorRow> rows;
};

// Exact filter vs block filter, one row per site: mean over independent
// observation sequences of the single-site total-variation gap at time n.
ErrorCurve bias_experiment(const LatticeHMM& model, const Partition& partition, int n,
                           int n_obs_seqs, std::uint64_t seed);

// Block filter vs block particle filter on one observation sequence, one
// row per (site, N): single-site error norm over independent filter seeds.
ErrorCurve variance_experiment(const LatticeHMM& model, const Partition& partition, int n,
                               const std::vector<int>& Ns, int n_seeds, std::uint64_t seed);

// Weighted least squares is not needed at desk scale; plain log-log fit.
double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy);

// --- feasibility of the small-interaction regime --------------------------

// The error bounds hold when a constant c(q, beta) built from the envelope
// parameters drops below 1.  Two variants share the last two terms:
//   bias:     3 q Delta^2 e^{beta(q+2r)} (1-eps^{2(Delta+1)}) + e^beta u + e^{beta q} u^q
//   variance: 3 q Delta^2 e^{beta q}     (1-eps^{2(Delta+1)}) + e^beta u + e^{beta q} u^q
// with u = 1 - eps^2 delta^2.
double c_bias(double eps, double delta, int r, int Delta, int q, double beta);
double c_variance(double eps, double delta, int r, int Delta, int q, double beta);

struct FeasibilityResult {
    bool feasible = false;        // bias form
    int q = 0;
    double beta = 0.0;
    double c = 0.0;
    double beta_max = 0.0;        // largest grid beta with c < 1 at the found q
    int q_min_feasible = 0;       // smallest q with any feasible beta (0 = none)
    bool feasible_var = false;    // variance form
    int q_var = 0;
    double beta_var = 0.0;
    double c_var = 0.0;
    std::string regime;           // variance rate classification via e^-beta * DeltaK
};

FeasibilityResult feasibility_search(double eps, double delta, int r, int Delta, int DeltaK,
                                     int q_max = 200, double beta_lo = 1e-4,
                                     double beta_hi = 2.0, int beta_points = 241);

namespace ref {
// Serial twin of the exact prediction kernel.
ExactMeasure predict_exact(const LatticeHMM& model, const ExactMeasure& pi);
} // namespace ref

} // namespace dob
