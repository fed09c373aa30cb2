#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dob/core.hpp"

// Square matrices over [0, +inf] with the convention inf * 0 = 0, as used
// by the influence/comparison calculus.  IEEE arithmetic would give NaN
// there, so products go through the guarded helpers below.

namespace dob {

double ext_mul(double a, double b);            // inf-aware product, inf*0 = 0
double ext_add(double a, double b);

struct NonnegMatrix {
    int n = 0;
    std::vector<double> a; // row-major, n*n

    NonnegMatrix() = default;
    explicit NonnegMatrix(int dim, double fill = 0.0);

    double& at(int i, int j) { return a[(std::size_t)i * n + j]; }
    double at(int i, int j) const { return a[(std::size_t)i * n + j]; }

    static NonnegMatrix identity(int dim);
    static NonnegMatrix diagonal(const std::vector<double>& d);

    bool finite() const;
    double max_entry() const;
};

void validate_nonneg(const NonnegMatrix& m); // entries in [0, inf], no NaN

NonnegMatrix mat_mul(const NonnegMatrix& A, const NonnegMatrix& B);
NonnegMatrix mat_add(const NonnegMatrix& A, const NonnegMatrix& B);
NonnegMatrix mat_scale(const NonnegMatrix& A, double c);

// Left-multiply by the inverse of a positive diagonal: (D^-1 A)_ij = A_ij / d_i.
NonnegMatrix diag_inv_mul(const std::vector<double>& d, const NonnegMatrix& A);
// Right-multiply: (A D^-1)_ij = A_ij / d_j.
NonnegMatrix mul_diag_inv(const NonnegMatrix& A, const std::vector<double>& d);

double norm_inf(const NonnegMatrix& A);  // max row sum
double norm_1(const NonnegMatrix& A);    // max column sum

// Column norm reweighted by exp(beta * dist(i,j)).  dist must be a
// pseudometric (symmetric, zero diagonal, triangle inequality).
double weighted_norm_1(const NonnegMatrix& A, const std::vector<double>& dist, double beta);

void validate_pseudometric(const std::vector<double>& dist, int n);

struct NeumannResult {
    NonnegMatrix sum;       // I + A + A^2 + ... up to the stopping term
    bool converged = false;
    int terms_used = 0;
    double residual = 0.0;  // max entry of the last added power
};

// Partial sums of A^k, stopping once max entry of A^k <= tol or the term
// budget runs out.  Divergence (an entry reaching inf or growth past the
// budget) is reported through converged=false, not thrown.
NeumannResult neumann_sum(const NonnegMatrix& A, double tol = 1e-12, int max_terms = 10000);

// Power-iteration estimate of the spectral radius; diagnostic only.
double spectral_radius_estimate(const NonnegMatrix& A, int iters = 200);

namespace ref {
// Plain serial triple loop, kept as the reference for the parallel kernel.
NonnegMatrix mat_mul(const NonnegMatrix& A, const NonnegMatrix& B);
} // namespace ref

} // namespace dob
