#include "dob/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dob {

namespace {

std::int64_t card_product(const std::vector<int>& card) {
    std::int64_t m = 1;
    for (int k : card) {
        if (k < 1) throw DobError("coupling alphabet must be >= 1");
        m *= k;
    }
    return m;
}

Coupling make_empty(const std::vector<int>& card) {
    Coupling q;
    q.card = card;
    q.m = card_product(card);
    q.joint.assign((std::size_t)(q.m * q.m), 0.0);
    return q;
}

void check_distribution(const std::vector<double>& mu, std::int64_t m, const char* name) {
    if ((std::int64_t)mu.size() != m) throw DobError(std::string(name) + ": size mismatch");
    double s = 0.0;
    for (double v : mu) {
        if (std::isnan(v) || v < -1e-15) throw DobError(std::string(name) + ": negative entry");
        s += v;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw DobError(std::string(name) + ": does not sum to 1");
}

int coord_of(const Coupling& q, std::int64_t atom, int t) {
    for (int u = 0; u < t; ++u) atom /= q.card[(std::size_t)u];
    return int(atom % q.card[(std::size_t)t]);
}

} // namespace

Coupling make_diagonal_coupling(const std::vector<int>& card, const std::vector<double>& mu) {
    Coupling q = make_empty(card);
    check_distribution(mu, q.m, "mu");
    for (std::int64_t i = 0; i < q.m; ++i) q.at(i, i) = mu[(std::size_t)i];
    return q;
}

std::vector<double> left_marginal(const Coupling& q) {
    std::vector<double> out((std::size_t)q.m, 0.0);
    for (std::int64_t l = 0; l < q.m; ++l)
        for (std::int64_t r = 0; r < q.m; ++r) out[(std::size_t)l] += q.at(l, r);
    return out;
}

std::vector<double> right_marginal(const Coupling& q) {
    std::vector<double> out((std::size_t)q.m, 0.0);
    for (std::int64_t l = 0; l < q.m; ++l)
        for (std::int64_t r = 0; r < q.m; ++r) out[(std::size_t)r] += q.at(l, r);
    return out;
}

double coupling_marginal_error(const Coupling& q, const std::vector<double>& mu,
                               const std::vector<double>& nu) {
    std::vector<double> lm = left_marginal(q), rm = right_marginal(q);
    double worst = 0.0;
    for (std::int64_t i = 0; i < q.m; ++i) {
        worst = std::max(worst, std::fabs(lm[(std::size_t)i] - mu[(std::size_t)i]));
        worst = std::max(worst, std::fabs(rm[(std::size_t)i] - nu[(std::size_t)i]));
    }
    return worst;
}

Coupling tv_optimal_coupling(const std::vector<int>& card, const std::vector<double>& mu,
                             const std::vector<double>& nu) {
    Coupling q = make_empty(card);
    check_distribution(mu, q.m, "mu");
    check_distribution(nu, q.m, "nu");
    std::vector<double> rl((std::size_t)q.m), rr((std::size_t)q.m);
    double excess = 0.0;
    for (std::int64_t i = 0; i < q.m; ++i) {
        double overlap = std::min(mu[(std::size_t)i], nu[(std::size_t)i]);
        q.at(i, i) = overlap;
        rl[(std::size_t)i] = mu[(std::size_t)i] - overlap;
        rr[(std::size_t)i] = nu[(std::size_t)i] - overlap;
        excess += rl[(std::size_t)i];
    }
    if (excess > 0.0)
        for (std::int64_t l = 0; l < q.m; ++l) {
            if (rl[(std::size_t)l] == 0.0) continue;
            for (std::int64_t r = 0; r < q.m; ++r)
                q.at(l, r) += rl[(std::size_t)l] * rr[(std::size_t)r] / excess;
        }
    return q;
}

double max_minorize_alpha(const std::vector<double>& mu, const std::vector<double>& nu,
                          const std::vector<double>& gamma) {
    if (mu.size() != gamma.size() || nu.size() != gamma.size())
        throw DobError("minorization: size mismatch");
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        if (gamma[i] <= 0.0) continue;
        alpha = std::min(alpha, mu[i] / gamma[i]);
        alpha = std::min(alpha, nu[i] / gamma[i]);
    }
    if (std::isinf(alpha)) throw DobError("minorization: gamma is identically zero");
    return std::min(alpha, 1.0);
}

Coupling minorize_coupling(const std::vector<int>& card, const std::vector<double>& mu,
                           const std::vector<double>& nu, const std::vector<double>& gamma,
                           double alpha) {
    Coupling q = make_empty(card);
    check_distribution(mu, q.m, "mu");
    check_distribution(nu, q.m, "nu");
    check_distribution(gamma, q.m, "gamma");
    if (!(alpha > 0.0) || alpha > 1.0) throw DobError("minorization: alpha must be in (0,1]");
    for (std::int64_t i = 0; i < q.m; ++i)
        if (mu[(std::size_t)i] < alpha * gamma[(std::size_t)i] - 1e-12 ||
            nu[(std::size_t)i] < alpha * gamma[(std::size_t)i] - 1e-12)
            throw DobError("minorization: alpha*gamma exceeds a marginal");
    if (alpha == 1.0) {
        for (std::int64_t i = 0; i < q.m; ++i) q.at(i, i) = gamma[(std::size_t)i];
        return q;
    }
    std::vector<double> rl((std::size_t)q.m), rr((std::size_t)q.m);
    for (std::int64_t i = 0; i < q.m; ++i) {
        rl[(std::size_t)i] = std::max(0.0, mu[(std::size_t)i] - alpha * gamma[(std::size_t)i]) / (1.0 - alpha);
        rr[(std::size_t)i] = std::max(0.0, nu[(std::size_t)i] - alpha * gamma[(std::size_t)i]) / (1.0 - alpha);
    }
    for (std::int64_t i = 0; i < q.m; ++i) q.at(i, i) = alpha * gamma[(std::size_t)i];
    for (std::int64_t l = 0; l < q.m; ++l)
        for (std::int64_t r = 0; r < q.m; ++r)
            q.at(l, r) += (1.0 - alpha) * rl[(std::size_t)l] * rr[(std::size_t)r];
    return q;
}

Coupling markov_minorize_coupling(const std::vector<std::vector<double>>& P,
                                  const std::vector<std::vector<double>>& nu, double alpha,
                                  int k, int x0, int z0) {
    const int steps = (int)P.size();
    if (steps == 0) throw DobError("chain coupling needs at least one step");
    if ((int)nu.size() != steps) throw DobError("chain coupling: kernel/center count mismatch");
    if (!(alpha > 0.0) || alpha > 1.0) throw DobError("chain coupling: alpha must be in (0,1]");
    if (x0 < 0 || x0 >= k || z0 < 0 || z0 >= k) throw DobError("chain coupling: bad start state");
    std::int64_t pathguard = 1;
    for (int i = 0; i < steps; ++i) {
        if ((std::int64_t)P[(std::size_t)i].size() != (std::int64_t)k * k)
            throw DobError("chain coupling: kernel size mismatch");
        check_distribution(nu[(std::size_t)i], k, "nu");
        for (int a = 0; a < k; ++a) {
            double rowsum = 0.0;
            for (int b = 0; b < k; ++b) {
                double v = P[(std::size_t)i][(std::size_t)a * k + b];
                if (std::isnan(v) || v < 0.0) throw DobError("chain coupling: bad kernel entry");
                if (v < alpha * nu[(std::size_t)i][(std::size_t)b] - 1e-12)
                    throw DobError("chain coupling: alpha*nu exceeds a kernel row");
                rowsum += v;
            }
            if (std::fabs(rowsum - 1.0) > 1e-12)
                throw DobError("chain coupling: kernel row does not sum to 1");
        }
        pathguard *= k;
        if (pathguard * pathguard > (std::int64_t(1) << 24))
            throw GuardError("chain coupling: path pair space exceeds 2^24");
    }

    // residual rows (P - alpha*nu)/(1-alpha); with alpha == 1 the coupled
    // chain is already matched after one step and residuals are never used
    auto residual_row = [&](int i, int a, int b) {
        if (alpha == 1.0) return 0.0;
        double v = P[(std::size_t)i][(std::size_t)a * k + b] -
                   alpha * nu[(std::size_t)i][(std::size_t)b];
        return std::max(0.0, v) / (1.0 - alpha);
    };

    // dist over (left path prefix, right path prefix), extended step by step
    std::vector<double> dist(1, 1.0);
    std::int64_t plen = 1;
    for (int i = 0; i < steps; ++i) {
        std::vector<double> next((std::size_t)(plen * k * plen * k), 0.0);
        for (std::int64_t lp = 0; lp < plen; ++lp)
            for (std::int64_t rp = 0; rp < plen; ++rp) {
                double w = dist[(std::size_t)(lp * plen + rp)];
                if (w == 0.0) continue;
                int a = i == 0 ? x0 : int((lp / (plen / k)) % k);
                int b = i == 0 ? z0 : int((rp / (plen / k)) % k);
                for (int a2 = 0; a2 < k; ++a2)
                    for (int b2 = 0; b2 < k; ++b2) {
                        double step;
                        if (a == b) {
                            step = a2 == b2 ? P[(std::size_t)i][(std::size_t)a * k + a2] : 0.0;
                        } else {
                            step = (a2 == b2 ? alpha * nu[(std::size_t)i][(std::size_t)a2] : 0.0) +
                                   (1.0 - alpha) * residual_row(i, a, a2) * residual_row(i, b, b2);
                        }
                        if (step == 0.0) continue;
                        std::int64_t nl = lp + plen * a2;
                        std::int64_t nr = rp + plen * b2;
                        next[(std::size_t)(nl * plen * k + nr)] += w * step;
                    }
            }
        dist = std::move(next);
        plen *= k;
    }

    Coupling q;
    q.card.assign((std::size_t)steps, k);
    q.m = plen;
    q.joint = std::move(dist);
    return q;
}

double coupling_mismatch(const Coupling& q, int t) {
    if (t < 0 || t >= (int)q.card.size()) throw DobError("coupling coordinate out of range");
    double s = 0.0;
    for (std::int64_t l = 0; l < q.m; ++l)
        for (std::int64_t r = 0; r < q.m; ++r)
            if (coord_of(q, l, t) != coord_of(q, r, t)) s += q.at(l, r);
    return s;
}

double coupling_mismatch_total(const Coupling& q) {
    double s = 0.0;
    for (std::int64_t l = 0; l < q.m; ++l)
        for (std::int64_t r = 0; r < q.m; ++r)
            if (l != r) s += q.at(l, r);
    return s;
}

double metric_integral(const Coupling& q, int t, const SiteMetric& eta) {
    if (t < 0 || t >= (int)q.card.size()) throw DobError("coupling coordinate out of range");
    if (eta.k != q.card[(std::size_t)t]) throw DobError("metric alphabet mismatch");
    double s = 0.0;
    for (std::int64_t l = 0; l < q.m; ++l)
        for (std::int64_t r = 0; r < q.m; ++r) {
            double w = q.at(l, r);
            if (w == 0.0) continue;
            s += w * eta(coord_of(q, l, t), coord_of(q, r, t));
        }
    return s;
}

} // namespace dob
