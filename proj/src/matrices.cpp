#include "dob/matrices.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dob/parallel.hpp"

namespace dob {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double ext_mul(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    return a * b;
}

double ext_add(double a, double b) { return a + b; }

NonnegMatrix::NonnegMatrix(int dim, double fill) : n(dim), a((std::size_t)dim * dim, fill) {
    if (dim < 1) throw DobError("matrix dimension must be >= 1");
}

NonnegMatrix NonnegMatrix::identity(int dim) {
    NonnegMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

NonnegMatrix NonnegMatrix::diagonal(const std::vector<double>& d) {
    NonnegMatrix m((int)d.size());
    for (int i = 0; i < m.n; ++i) m.at(i, i) = d[(std::size_t)i];
    return m;
}

bool NonnegMatrix::finite() const {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

double NonnegMatrix::max_entry() const {
    double mx = 0.0;
    for (double v : a) mx = std::max(mx, v);
    return mx;
}

void validate_nonneg(const NonnegMatrix& m) {
    for (double v : m.a)
        if (std::isnan(v) || v < 0.0) throw DobError("matrix entry outside [0, inf]");
}

NonnegMatrix mat_mul(const NonnegMatrix& A, const NonnegMatrix& B) {
    if (A.n != B.n) throw DobError("matrix dimension mismatch");
    const int n = A.n;
    NonnegMatrix C(n);
    par::parallel_for(n, [&](std::int64_t i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s = ext_add(s, ext_mul(A.at((int)i, k), B.at(k, j)));
            C.at((int)i, j) = s;
        }
    });
    return C;
}

NonnegMatrix ref::mat_mul(const NonnegMatrix& A, const NonnegMatrix& B) {
    if (A.n != B.n) throw DobError("matrix dimension mismatch");
    const int n = A.n;
    NonnegMatrix C(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s = ext_add(s, ext_mul(A.at(i, k), B.at(k, j)));
            C.at(i, j) = s;
        }
    return C;
}

NonnegMatrix mat_add(const NonnegMatrix& A, const NonnegMatrix& B) {
    if (A.n != B.n) throw DobError("matrix dimension mismatch");
    NonnegMatrix C(A.n);
    for (std::size_t t = 0; t < C.a.size(); ++t) C.a[t] = ext_add(A.a[t], B.a[t]);
    return C;
}

NonnegMatrix mat_scale(const NonnegMatrix& A, double c) {
    NonnegMatrix C(A.n);
    for (std::size_t t = 0; t < C.a.size(); ++t) C.a[t] = ext_mul(A.a[t], c);
    return C;
}

NonnegMatrix diag_inv_mul(const std::vector<double>& d, const NonnegMatrix& A) {
    if ((int)d.size() != A.n) throw DobError("diagonal dimension mismatch");
    NonnegMatrix C(A.n);
    for (int i = 0; i < A.n; ++i) {
        if (!(d[(std::size_t)i] > 0.0)) throw DobError("diagonal entries must be positive");
        for (int j = 0; j < A.n; ++j) C.at(i, j) = A.at(i, j) / d[(std::size_t)i];
    }
    return C;
}

NonnegMatrix mul_diag_inv(const NonnegMatrix& A, const std::vector<double>& d) {
    if ((int)d.size() != A.n) throw DobError("diagonal dimension mismatch");
    NonnegMatrix C(A.n);
    for (int j = 0; j < A.n; ++j)
        if (!(d[(std::size_t)j] > 0.0)) throw DobError("diagonal entries must be positive");
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) C.at(i, j) = A.at(i, j) / d[(std::size_t)j];
    return C;
}

double norm_inf(const NonnegMatrix& A) {
    double mx = 0.0;
    for (int i = 0; i < A.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < A.n; ++j) s = ext_add(s, A.at(i, j));
        mx = std::max(mx, s);
    }
    return mx;
}

double norm_1(const NonnegMatrix& A) {
    double mx = 0.0;
    for (int j = 0; j < A.n; ++j) {
        double s = 0.0;
        for (int i = 0; i < A.n; ++i) s = ext_add(s, A.at(i, j));
        mx = std::max(mx, s);
    }
    return mx;
}

void validate_pseudometric(const std::vector<double>& dist, int n) {
    if ((std::int64_t)dist.size() != (std::int64_t)n * n)
        throw DobError("pseudometric table size mismatch");
    auto d = [&](int i, int j) { return dist[(std::size_t)i * n + j]; };
    for (int i = 0; i < n; ++i) {
        if (d(i, i) != 0.0) throw DobError("pseudometric diagonal must be zero");
        for (int j = 0; j < n; ++j) {
            if (std::isnan(d(i, j)) || d(i, j) < 0.0)
                throw DobError("pseudometric entries must be nonnegative");
            if (d(i, j) != d(j, i)) throw DobError("pseudometric must be symmetric");
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (d(i, j) > d(i, k) + d(k, j) + 1e-12)
                    throw DobError("pseudometric violates the triangle inequality");
}

double weighted_norm_1(const NonnegMatrix& A, const std::vector<double>& dist, double beta) {
    validate_pseudometric(dist, A.n);
    double mx = 0.0;
    for (int j = 0; j < A.n; ++j) {
        double s = 0.0;
        for (int i = 0; i < A.n; ++i)
            s = ext_add(s, ext_mul(std::exp(beta * dist[(std::size_t)i * A.n + j]), A.at(i, j)));
        mx = std::max(mx, s);
    }
    return mx;
}

NeumannResult neumann_sum(const NonnegMatrix& A, double tol, int max_terms) {
    validate_nonneg(A);
    NeumannResult r;
    r.sum = NonnegMatrix::identity(A.n);
    NonnegMatrix power = NonnegMatrix::identity(A.n);
    r.residual = 1.0;
    for (int k = 1; k <= max_terms; ++k) {
        power = mat_mul(power, A);
        double mx = power.max_entry();
        if (std::isnan(mx)) throw DobError("neumann term produced NaN");
        r.sum = mat_add(r.sum, power);
        r.terms_used = k;
        r.residual = mx;
        if (mx <= tol) {
            r.converged = true;
            return r;
        }
        if (std::isinf(mx)) return r; // diverged
    }
    return r; // budget exhausted, not converged
}

double spectral_radius_estimate(const NonnegMatrix& A, int iters) {
    if (!A.finite()) return kInf;
    const int n = A.n;
    std::vector<double> v((std::size_t)n, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> w((std::size_t)n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += A.at(i, j) * v[(std::size_t)j];
            w[(std::size_t)i] = s;
        }
        double mx = 0.0;
        for (double x : w) mx = std::max(mx, x);
        if (mx == 0.0) return 0.0;
        lambda = mx;
        for (double& x : w) x /= mx;
        // keep a floor so reducible matrices do not zero out the vector
        for (double& x : w) x = std::max(x, 1e-300);
        v = std::move(w);
    }
    return lambda;
}

} // namespace dob
