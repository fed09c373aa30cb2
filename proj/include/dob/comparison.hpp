#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dob/couplings.hpp"
#include "dob/matrices.hpp"
#include "dob/oracle.hpp"

// Comparison bounds between two Gibbs measures built from coupled local
// update rules: the influence matrix R, the weight matrix W, the
// single-site discrepancy vector a, and the resulting bound
//   |rho f - rho~ f|  <=  sum_ij  osc_i(f) D_ij W_jj^-1 a_j,
// with D the Neumann sum of W^-1 R.  Also: the induced Gibbs samplers,
// transition-operator contraction estimates, and uniqueness certificates.

namespace dob {

struct Cover {
    std::vector<Region> regions;
    std::vector<double> weights;
};

void validate_cover(const StateSpace& space, const Cover& cover);

Cover singleton_cover(const StateSpace& space);
// One region per listed pair; every site must be covered.
Cover pair_cover(const StateSpace& space, const std::vector<std::pair<int, int>>& pairs);
// Sites grouped by floor(tau/q); regions are constant-tau when q == 1.
Cover temporal_cover(const StateSpace& space, const std::vector<int>& tau, int q);

// Update rule for one cover region: site-conditional kernels of the two
// measures restricted to a conditioning universe, plus the couplings used
// by the bound.  Two-sided rules have universe = all sites; one-sided rules
// shrink it to the sites at or before the region's time index.
struct RegionRule {
    Region region;            // J, global site ids
    Region universe;          // conditioning universe, global site ids
    Region boundary;          // universe \ J, global site ids
    StateSpace sub;           // state space of universe
    ConditionalKernel gamma;  // of rho, on sub
    ConditionalKernel gamma_tilde;
    // couples gamma and gamma_tilde rows, one per boundary config
    std::vector<Coupling> qhat;
    // couples gamma rows at boundary configs differing at one site:
    // [pos of j in boundary][config of boundary minus j][pair index a<b]
    std::vector<std::vector<std::vector<Coupling>>> q;
};

struct CoupledUpdateRule {
    StateSpace space;
    Cover cover;                   // effective (possibly rescaled) weights
    std::vector<double> weights_in; // weights as given
    bool rescaled = false;
    double rescale_factor = 1.0;   // multiplier applied to the given weights
    std::vector<SiteMetric> metrics;
    std::vector<int> tau;          // empty for two-sided rules
    std::vector<RegionRule> rules;
    ExactMeasure rho, rho_tilde;
    bool zero_mass_rows = false;
};

CoupledUpdateRule build_rule(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                             const Cover& cover, const std::vector<SiteMetric>& metrics);

// Regions must have constant tau; kernels condition only on sites with
// tau <= tau(region), so influence never flows backward in time.
CoupledUpdateRule build_oneside_rule(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                                     const Cover& cover, const std::vector<int>& tau,
                                     const std::vector<SiteMetric>& metrics);

std::vector<double> build_W(const CoupledUpdateRule& rule); // diagonal of W
NonnegMatrix build_R(const CoupledUpdateRule& rule);
std::vector<double> build_a(const CoupledUpdateRule& rule);

struct BoundReport {
    std::vector<double> W;
    NonnegMatrix R;
    std::vector<double> a;
    NeumannResult D;           // Neumann sum of W^-1 R
    bool certified = false;    // D converged, so the bound is valid
    bool rescaled = false;
    double rescale_factor = 1.0;
    bool zero_mass_rows = false;
    std::vector<double> bounds; // one per target function
    std::vector<double> exact;  // oracle differences |rho f - rho~ f|
    std::string note;
};

BoundReport main_bound(const CoupledUpdateRule& rule, const std::vector<LocalFunction>& fs,
                       double neumann_tol = 1e-12, int neumann_max_terms = 10000);

// Independent implementation of the singleton-cover, unit-weight case via
// per-site conditional distances.  Agrees with main_bound on the singleton
// cover to rounding.
BoundReport classical_bound(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                            const std::vector<SiteMetric>& metrics,
                            const std::vector<LocalFunction>& fs,
                            double neumann_tol = 1e-12, int neumann_max_terms = 10000);

BoundReport oneside_bound(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                          const Cover& cover, const std::vector<int>& tau,
                          const std::vector<SiteMetric>& metrics,
                          const std::vector<LocalFunction>& fs);

// Row-stochastic transition operator on the joint configuration space.
struct TransitionMatrix {
    StateSpace space;
    std::int64_t n = 0;
    std::vector<double> rows; // n*n, rows[x*n+z] = P(x -> z)

    double at(std::int64_t x, std::int64_t z) const { return rows[(std::size_t)(x * n + z)]; }
};

std::vector<double> apply_measure(const std::vector<double>& mu, const TransitionMatrix& g);
double invariance_gap(const ExactMeasure& mu, const TransitionMatrix& g);

// Random-scan Gibbs sampler: with probability v_J resample region J from
// its conditional law, otherwise stay put.  sum(v) <= 1 required; leaves
// rho invariant by construction.
TransitionMatrix gibbs_sampler(const CoupledUpdateRule& rule, const std::vector<double>& v,
                               bool tilde = false);

// Coupling of one step of the two samplers started at the same x: stay
// together with the idle mass, otherwise couple the resampled region by the
// stored region coupling.
Coupling gibbs_step_coupling(const CoupledUpdateRule& rule, const std::vector<double>& v,
                             std::int64_t x);

// V dominates the oscillation transfer of G when
//   osc_j(Gf) <= sum_i osc_i(f) V_ij   for all f, j.
// Returns the largest violation over all single-configuration indicators
// plus n_random random tables (negative = comfortably dominated).
double wasserstein_check(const TransitionMatrix& g, const NonnegMatrix& V,
                         const std::vector<SiteMetric>& metrics, int n_random = 100,
                         std::uint64_t seed = 1);

struct MarkovBoundReport {
    NonnegMatrix N;      // sum_{k<n} V^k
    NonnegMatrix Vn;     // V^n
    std::vector<double> term1, term2, bounds; // per target function
    double invariance_rho = 0.0, invariance_rho_tilde = 0.0;
    double wasserstein_violation = 0.0;
};

// Bound through n steps of a pair of transition operators with Wasserstein
// matrix V and one-step couplings q_x of G_x against G~_x:
//   |rho f - rho~ f| <= sum osc_i(f) N_ij E_rho~[q_. eta_j]
//                     + sum osc_i(f) (V^n)_ij (rho x rho~) eta_j.
MarkovBoundReport markov_comparison(const TransitionMatrix& g, const TransitionMatrix& g_tilde,
                                    const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                                    const NonnegMatrix& V, const std::vector<Coupling>& q_x,
                                    int n, const std::vector<LocalFunction>& fs,
                                    const std::vector<SiteMetric>& metrics);

struct Certificate {
    int condition = 0;
    bool pass = false;
    std::map<std::string, double> witness;
    std::string note;
    bool rescaled = false;
    bool zero_mass_rows = false;
};

// Sufficient conditions for a unique compatible measure, evaluated on the
// weight diagonal and influence matrix:
//   1: Neumann sum of W^-1 R converges
//   2: ||(W^-1 R)^n|| < 1 for some n <= n_max, norm in {inf, 1}
//   3: ||W^-1 R||_inf < 1
//   4: ||(R W^-1)^n||_inf < 1 for some n <= n_max
//   5: sum_i ||eta_i|| finite and ||R W^-1||_1 < 1
//   6: condition 5 plus a distance witness: R has bounded interaction range
//      rmax under `dist`, and the column norm reweighted by exp(beta*dist)
//      stays below 1 for the reported beta.
Certificate uniqueness_check(const std::vector<double>& W, const NonnegMatrix& R, int condition,
                             const std::vector<SiteMetric>& metrics,
                             const std::optional<std::vector<double>>& dist = std::nullopt,
                             int n_max = 64);

} // namespace dob
