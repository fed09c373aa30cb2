#pragma once

#include <cstdint>
#include <vector>

#include "dob/core.hpp"

// Joint laws on pairs of configurations with prescribed marginals, plus the
// explicit constructions used by the comparison bounds: the overlap/product
// coupling behind total-variation distances and the minorization couplings
// for product chains.

namespace dob {

struct Coupling {
    std::vector<int> card;     // per-coordinate alphabet of the coupled space
    std::int64_t m = 0;        // number of atoms = prod(card)
    std::vector<double> joint; // m*m, row = left atom, col = right atom

    double at(std::int64_t l, std::int64_t r) const { return joint[(std::size_t)(l * m + r)]; }
    double& at(std::int64_t l, std::int64_t r) { return joint[(std::size_t)(l * m + r)]; }
};

Coupling make_diagonal_coupling(const std::vector<int>& card, const std::vector<double>& mu);

std::vector<double> left_marginal(const Coupling& q);
std::vector<double> right_marginal(const Coupling& q);

// Max deviation of the coupling's marginals from mu and nu.
double coupling_marginal_error(const Coupling& q, const std::vector<double>& mu,
                               const std::vector<double>& nu);

// Matched mass min(mu,nu) on the diagonal, residuals coupled as a product.
// Off-diagonal mass equals half the L1 distance, so the coupling attains the
// total-variation distance.
Coupling tv_optimal_coupling(const std::vector<int>& card, const std::vector<double>& mu,
                             const std::vector<double>& nu);

// Largest alpha with mu >= alpha*gamma and nu >= alpha*gamma entrywise
// (ratios 0/0 count as unconstrained).
double max_minorize_alpha(const std::vector<double>& mu, const std::vector<double>& nu,
                          const std::vector<double>& gamma);

// alpha * diag(gamma) + (1-alpha) * (residual of mu) x (residual of nu).
// Mismatch probability is at most 1 - alpha.
Coupling minorize_coupling(const std::vector<int>& card, const std::vector<double>& mu,
                           const std::vector<double>& nu, const std::vector<double>& gamma,
                           double alpha);

// Sticky coupling of two copies of an inhomogeneous chain started at x0 and
// z0, where step i has kernel P[i] (k x k, rows normalized) minorized by
// alpha * nu[i].  Once the copies meet they move together; while apart they
// meet with probability alpha per step and otherwise move independently
// through the residual kernels.  Returns the joint law of the two paths as a
// coupling over path space (q coordinates of alphabet k).  The chance the
// copies still disagree at step i is at most (1-alpha)^i.
Coupling markov_minorize_coupling(const std::vector<std::vector<double>>& P,
                                  const std::vector<std::vector<double>>& nu, double alpha,
                                  int k, int x0, int z0);

// P[left and right disagree in coordinate t].
double coupling_mismatch(const Coupling& q, int t);

// P[left atom != right atom].
double coupling_mismatch_total(const Coupling& q);

// E[eta(left_t, right_t)].
double metric_integral(const Coupling& q, int t, const SiteMetric& eta);

} // namespace dob
