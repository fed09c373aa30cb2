#include "dob/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dob/parallel.hpp"
#include "dob/rng.hpp"

namespace dob {

namespace {

constexpr std::int64_t kPairGuard = std::int64_t(1) << 22;

int position_in(const Region& region, int site) {
    auto it = std::lower_bound(region.begin(), region.end(), site);
    if (it == region.end() || *it != site) return -1;
    return int(it - region.begin());
}

Region erase_site(const Region& region, int site) {
    Region out;
    out.reserve(region.size());
    for (int s : region)
        if (s != site) out.push_back(s);
    return out;
}

std::vector<int> cards_of(const StateSpace& space, const Region& region) {
    std::vector<int> out;
    out.reserve(region.size());
    for (int s : region) out.push_back(space.card[(std::size_t)s]);
    return out;
}

std::vector<double> row_vec(const ConditionalKernel& ker, std::int64_t b) {
    return std::vector<double>(ker.row(b), ker.row(b) + ker.row_len);
}

} // namespace

void validate_cover(const StateSpace& space, const Cover& cover) {
    if (cover.regions.empty()) throw DobError("cover needs at least one region");
    if (cover.regions.size() != cover.weights.size())
        throw DobError("cover region/weight count mismatch");
    std::vector<char> seen((std::size_t)space.n_sites(), 0);
    for (std::size_t r = 0; r < cover.regions.size(); ++r) {
        validate_region(space, cover.regions[r]);
        if (cover.regions[r].empty()) throw DobError("cover region must be nonempty");
        if (!(cover.weights[r] > 0.0) || !std::isfinite(cover.weights[r]))
            throw DobError("cover weights must be positive and finite");
        for (int s : cover.regions[r]) seen[(std::size_t)s] = 1;
    }
    for (int s = 0; s < space.n_sites(); ++s)
        if (!seen[(std::size_t)s])
            throw DobError("cover misses site " + std::to_string(s));
}

Cover singleton_cover(const StateSpace& space) {
    Cover c;
    for (int s = 0; s < space.n_sites(); ++s) {
        c.regions.push_back({s});
        c.weights.push_back(1.0);
    }
    return c;
}

Cover pair_cover(const StateSpace& space, const std::vector<std::pair<int, int>>& pairs) {
    Cover c;
    for (auto [a, b] : pairs) {
        if (a == b) throw DobError("pair cover needs distinct sites");
        c.regions.push_back({std::min(a, b), std::max(a, b)});
        c.weights.push_back(1.0);
    }
    validate_cover(space, c);
    return c;
}

Cover temporal_cover(const StateSpace& space, const std::vector<int>& tau, int q) {
    if ((int)tau.size() != space.n_sites()) throw DobError("tau size mismatch");
    if (q < 1) throw DobError("temporal block length must be >= 1");
    std::map<int, Region> groups;
    for (int s = 0; s < space.n_sites(); ++s) {
        int t = tau[(std::size_t)s];
        int g = t >= 0 ? t / q : -((-t + q - 1) / q);
        groups[g].push_back(s);
    }
    Cover c;
    for (auto& [g, region] : groups) {
        std::sort(region.begin(), region.end());
        c.regions.push_back(region);
        c.weights.push_back(1.0);
    }
    validate_cover(space, c);
    return c;
}

namespace {

CoupledUpdateRule build_rule_impl(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                                  const Cover& cover, const std::vector<int>& tau,
                                  const std::vector<SiteMetric>& metrics) {
    if (rho.space.card != rho_tilde.space.card)
        throw DobError("coupled rule: measures live on different spaces");
    validate_cover(rho.space, cover);
    if ((int)metrics.size() != rho.space.n_sites()) throw DobError("metric count mismatch");
    for (int s = 0; s < rho.space.n_sites(); ++s)
        if (metrics[(std::size_t)s].k != rho.space.card[(std::size_t)s])
            throw DobError("metric alphabet mismatch at site " + std::to_string(s));

    CoupledUpdateRule rule;
    rule.space = rho.space;
    rule.cover = cover;
    rule.weights_in = cover.weights;
    rule.metrics = metrics;
    rule.tau = tau;
    rule.rho = rho;
    rule.rho_tilde = rho_tilde;

    // enforce W_ii <= 1 by rescaling all weights together; the bound is
    // invariant under a common rescaling
    std::vector<double> wdiag((std::size_t)rule.space.n_sites(), 0.0);
    for (std::size_t r = 0; r < cover.regions.size(); ++r)
        for (int s : cover.regions[r]) wdiag[(std::size_t)s] += cover.weights[r];
    double wmax = 0.0;
    for (double w : wdiag) wmax = std::max(wmax, w);
    if (wmax > 1.0) {
        rule.rescaled = true;
        rule.rescale_factor = 1.0 / wmax;
        for (double& w : rule.cover.weights) w *= rule.rescale_factor;
    }

    const bool oneside = !tau.empty();
    for (std::size_t r = 0; r < cover.regions.size(); ++r) {
        RegionRule rr;
        rr.region = cover.regions[r];
        if (oneside) {
            int t = tau[(std::size_t)rr.region.front()];
            for (int s : rr.region)
                if (tau[(std::size_t)s] != t)
                    throw DobError("one-sided cover region mixes time indices");
            for (int s = 0; s < rule.space.n_sites(); ++s)
                if (tau[(std::size_t)s] <= t) rr.universe.push_back(s);
        } else {
            for (int s = 0; s < rule.space.n_sites(); ++s) rr.universe.push_back(s);
        }
        rr.sub = StateSpace(cards_of(rule.space, rr.universe));

        Region jpos, jglobal = rr.region;
        for (int s : jglobal) {
            int p = position_in(rr.universe, s);
            if (p < 0) throw DobError("region escapes its conditioning universe");
            jpos.push_back(p);
        }

        ExactMeasure mu_u, mut_u;
        mu_u.space = rr.sub;
        mu_u.p = marginal(rho, rr.universe);
        mut_u.space = rr.sub;
        mut_u.p = marginal(rho_tilde, rr.universe);

        rr.gamma = conditional_kernel(mu_u, jpos);
        rr.gamma_tilde = conditional_kernel(mut_u, jpos);
        if (rr.gamma.any_zero_row() || rr.gamma_tilde.any_zero_row()) rule.zero_mass_rows = true;

        for (int p : rr.gamma.boundary) rr.boundary.push_back(rr.universe[(std::size_t)p]);

        const std::vector<int> cardJ = cards_of(rule.space, rr.region);
        rr.qhat.reserve((std::size_t)rr.gamma.n_rows);
        for (std::int64_t b = 0; b < rr.gamma.n_rows; ++b)
            rr.qhat.push_back(
                tv_optimal_coupling(cardJ, row_vec(rr.gamma, b), row_vec(rr.gamma_tilde, b)));

        // couplings of gamma rows across single-site boundary discrepancies
        const Region& bnd = rr.boundary;
        rr.q.resize(bnd.size());
        for (std::size_t jp = 0; jp < bnd.size(); ++jp) {
            const int j = bnd[jp];
            const int kj = rule.space.card[(std::size_t)j];
            const Region rest = erase_site(bnd, j);
            const std::int64_t n_cfg = region_size(rule.space, rest);
            const int n_pairs = kj * (kj - 1) / 2;
            rr.q[jp].resize((std::size_t)n_cfg);
            // row index helper: insert value at position jp of the boundary config
            std::int64_t stride_lo = 1;
            for (std::size_t u = 0; u < jp; ++u)
                stride_lo *= rule.space.card[(std::size_t)bnd[u]];
            for (std::int64_t cfg = 0; cfg < n_cfg; ++cfg) {
                std::int64_t lo = cfg % stride_lo;
                std::int64_t hi = cfg / stride_lo;
                auto rowidx = [&](int v) { return lo + stride_lo * (v + (std::int64_t)kj * hi); };
                rr.q[jp][(std::size_t)cfg].reserve((std::size_t)n_pairs);
                for (int va = 0; va < kj; ++va)
                    for (int vb = va + 1; vb < kj; ++vb)
                        rr.q[jp][(std::size_t)cfg].push_back(tv_optimal_coupling(
                            cardJ, row_vec(rr.gamma, rowidx(va)), row_vec(rr.gamma, rowidx(vb))));
            }
        }
        rule.rules.push_back(std::move(rr));
    }
    return rule;
}

} // namespace

CoupledUpdateRule build_rule(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                             const Cover& cover, const std::vector<SiteMetric>& metrics) {
    return build_rule_impl(rho, rho_tilde, cover, {}, metrics);
}

CoupledUpdateRule build_oneside_rule(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                                     const Cover& cover, const std::vector<int>& tau,
                                     const std::vector<SiteMetric>& metrics) {
    if ((int)tau.size() != rho.space.n_sites()) throw DobError("tau size mismatch");
    return build_rule_impl(rho, rho_tilde, cover, tau, metrics);
}

std::vector<double> build_W(const CoupledUpdateRule& rule) {
    std::vector<double> w((std::size_t)rule.space.n_sites(), 0.0);
    for (std::size_t r = 0; r < rule.cover.regions.size(); ++r)
        for (int s : rule.cover.regions[r]) w[(std::size_t)s] += rule.cover.weights[r];
    return w;
}

NonnegMatrix build_R(const CoupledUpdateRule& rule) {
    const int n = rule.space.n_sites();
    NonnegMatrix R(n);

    for (int j = 0; j < n; ++j) {
        const int kj = rule.space.card[(std::size_t)j];
        const int n_pairs = kj * (kj - 1) / 2;
        if (n_pairs == 0) continue;
        const Region ej = erase_site([&] {
            Region all;
            for (int s = 0; s < n; ++s) all.push_back(s);
            return all;
        }(), j);
        const std::int64_t n_cfg = region_size(rule.space, ej);
        if (n_cfg * n_pairs > kPairGuard)
            throw GuardError("influence enumeration exceeds 2^22 pairs");

        std::vector<std::int64_t> stride_ej(ej.size());
        {
            std::int64_t s = 1;
            for (std::size_t p = 0; p < ej.size(); ++p) {
                stride_ej[p] = s;
                s *= rule.space.card[(std::size_t)ej[p]];
            }
        }

        // per region: does it feel site j, and how to project the ambient
        // config onto its coupling key
        struct RegionHook {
            int ridx = 0;
            std::size_t jp = 0;
            std::vector<std::int64_t> src_stride; // into ambient config index
            std::vector<int> src_card;
            std::vector<std::int64_t> dst_stride; // into coupling cfg index
        };
        std::vector<RegionHook> hooks;
        for (std::size_t r = 0; r < rule.rules.size(); ++r) {
            const RegionRule& rr = rule.rules[r];
            if (region_contains(rr.region, j)) continue;
            int jp = position_in(rr.boundary, j);
            if (jp < 0) continue; // outside the conditioning universe
            RegionHook h;
            h.ridx = (int)r;
            h.jp = (std::size_t)jp;
            const Region rest = erase_site(rr.boundary, j);
            std::int64_t ds = 1;
            for (int s : rest) {
                int p = position_in(ej, s);
                h.src_stride.push_back(stride_ej[(std::size_t)p]);
                h.src_card.push_back(rule.space.card[(std::size_t)s]);
                h.dst_stride.push_back(ds);
                ds *= rule.space.card[(std::size_t)s];
            }
            hooks.push_back(std::move(h));
        }
        if (hooks.empty()) continue;

        // metric integrals per coupling coordinate, computed once
        std::vector<std::vector<std::vector<std::vector<double>>>> ints(hooks.size());
        for (std::size_t h = 0; h < hooks.size(); ++h) {
            const RegionRule& rr = rule.rules[(std::size_t)hooks[h].ridx];
            const auto& qj = rr.q[hooks[h].jp];
            ints[h].resize(qj.size());
            for (std::size_t cfg = 0; cfg < qj.size(); ++cfg) {
                ints[h][cfg].resize(qj[cfg].size());
                for (std::size_t p = 0; p < qj[cfg].size(); ++p) {
                    ints[h][cfg][p].resize(rr.region.size());
                    for (std::size_t t = 0; t < rr.region.size(); ++t)
                        ints[h][cfg][p][t] = metric_integral(
                            qj[cfg][p], (int)t, rule.metrics[(std::size_t)rr.region[t]]);
                }
            }
        }

        std::vector<std::pair<int, int>> pairs;
        for (int a = 0; a < kj; ++a)
            for (int b = a + 1; b < kj; ++b) pairs.emplace_back(a, b);

        const std::int64_t total = n_cfg * n_pairs;
        const std::int64_t n_chunks = (total + par::kChunk - 1) / par::kChunk;
        std::vector<std::vector<double>> best((std::size_t)n_chunks);
        par::parallel_for(n_chunks, [&](std::int64_t chunk) {
            std::vector<double> local((std::size_t)n, 0.0);
            std::vector<double> acc((std::size_t)n, 0.0);
            const std::int64_t lo = chunk * par::kChunk;
            const std::int64_t hi = std::min(total, lo + par::kChunk);
            for (std::int64_t e = lo; e < hi; ++e) {
                const std::int64_t cfg_idx = e / n_pairs;
                const int pidx = int(e % n_pairs);
                std::fill(acc.begin(), acc.end(), 0.0);
                for (std::size_t h = 0; h < hooks.size(); ++h) {
                    std::int64_t key = 0;
                    for (std::size_t t = 0; t < hooks[h].src_stride.size(); ++t)
                        key += ((cfg_idx / hooks[h].src_stride[t]) % hooks[h].src_card[t]) *
                               hooks[h].dst_stride[t];
                    const RegionRule& rr = rule.rules[(std::size_t)hooks[h].ridx];
                    const double w = rule.cover.weights[(std::size_t)hooks[h].ridx];
                    const auto& iv = ints[h][(std::size_t)key][(std::size_t)pidx];
                    for (std::size_t t = 0; t < rr.region.size(); ++t)
                        acc[(std::size_t)rr.region[t]] += w * iv[t];
                }
                const double eta = rule.metrics[(std::size_t)j](pairs[(std::size_t)pidx].first,
                                                               pairs[(std::size_t)pidx].second);
                for (int i = 0; i < n; ++i)
                    if (acc[(std::size_t)i] > 0.0)
                        local[(std::size_t)i] = std::max(local[(std::size_t)i],
                                                         acc[(std::size_t)i] / eta);
            }
            best[(std::size_t)chunk] = std::move(local);
        });
        for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk)
            for (int i = 0; i < n; ++i)
                R.at(i, j) = std::max(R.at(i, j), best[(std::size_t)chunk][(std::size_t)i]);
    }
    return R;
}

std::vector<double> build_a(const CoupledUpdateRule& rule) {
    const int n = rule.space.n_sites();
    std::vector<double> a((std::size_t)n, 0.0);
    for (std::size_t r = 0; r < rule.rules.size(); ++r) {
        const RegionRule& rr = rule.rules[r];
        const double w = rule.cover.weights[r];
        std::vector<double> margB;
        if (rr.boundary.empty())
            margB = {1.0};
        else
            margB = marginal(rule.rho_tilde, rr.boundary);
        for (std::size_t t = 0; t < rr.region.size(); ++t) {
            const int i = rr.region[t];
            double s = 0.0;
            for (std::int64_t b = 0; b < (std::int64_t)rr.qhat.size(); ++b)
                s += margB[(std::size_t)b] *
                     metric_integral(rr.qhat[(std::size_t)b], (int)t, rule.metrics[(std::size_t)i]);
            a[(std::size_t)i] += w * s;
        }
    }
    return a;
}

namespace {

BoundReport assemble_bound(const std::vector<double>& W, const NonnegMatrix& R,
                           const std::vector<double>& a, const CoupledUpdateRule* rule,
                           const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                           const std::vector<SiteMetric>& metrics,
                           const std::vector<LocalFunction>& fs, double tol, int max_terms) {
    BoundReport rep;
    rep.W = W;
    rep.R = R;
    rep.a = a;
    if (rule) {
        rep.rescaled = rule->rescaled;
        rep.rescale_factor = rule->rescale_factor;
        rep.zero_mass_rows = rule->zero_mass_rows;
    }
    for (double w : W)
        if (!(w > 0.0) || w > 1.0 + 1e-12)
            throw DobError("weight diagonal must lie in (0,1]");
    rep.D = neumann_sum(diag_inv_mul(W, R), tol, max_terms);
    rep.certified = rep.D.converged;
    if (!rep.certified) rep.note = "influence series did not converge; bound not certified";
    const int n = R.n;
    for (const LocalFunction& f : fs) {
        std::vector<double> osc = oscillation_vector(rho.space, f, metrics);
        double b = 0.0;
        for (int i = 0; i < n; ++i) {
            if (osc[(std::size_t)i] == 0.0) continue;
            for (int j = 0; j < n; ++j)
                b += osc[(std::size_t)i] * rep.D.sum.at(i, j) * a[(std::size_t)j] /
                     W[(std::size_t)j];
        }
        rep.bounds.push_back(b);
        rep.exact.push_back(std::fabs(expectation(rho, f) - expectation(rho_tilde, f)));
    }
    return rep;
}

} // namespace

BoundReport main_bound(const CoupledUpdateRule& rule, const std::vector<LocalFunction>& fs,
                       double neumann_tol, int neumann_max_terms) {
    return assemble_bound(build_W(rule), build_R(rule), build_a(rule), &rule, rule.rho,
                          rule.rho_tilde, rule.metrics, fs, neumann_tol, neumann_max_terms);
}

BoundReport classical_bound(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                            const std::vector<SiteMetric>& metrics,
                            const std::vector<LocalFunction>& fs, double neumann_tol,
                            int neumann_max_terms) {
    if (rho.space.card != rho_tilde.space.card)
        throw DobError("classical bound: measures live on different spaces");
    const int n = rho.space.n_sites();
    std::vector<ConditionalKernel> ker, kert;
    for (int i = 0; i < n; ++i) {
        ker.push_back(conditional_kernel(rho, {i}));
        kert.push_back(conditional_kernel(rho_tilde, {i}));
    }

    NonnegMatrix C(n);
    for (int i = 0; i < n; ++i) {
        const std::vector<int> cardI = {rho.space.card[(std::size_t)i]};
        const Region& bnd = ker[(std::size_t)i].boundary; // all sites but i
        for (std::size_t jp = 0; jp < bnd.size(); ++jp) {
            const int j = bnd[jp];
            const int kj = rho.space.card[(std::size_t)j];
            std::int64_t stride_lo = 1;
            for (std::size_t u = 0; u < jp; ++u)
                stride_lo *= rho.space.card[(std::size_t)bnd[u]];
            const std::int64_t n_cfg = region_size(rho.space, erase_site(bnd, j));
            double sup = 0.0;
            for (std::int64_t cfg = 0; cfg < n_cfg; ++cfg) {
                std::int64_t lo = cfg % stride_lo;
                std::int64_t hi = cfg / stride_lo;
                for (int va = 0; va < kj; ++va)
                    for (int vb = va + 1; vb < kj; ++vb) {
                        std::int64_t b1 = lo + stride_lo * (va + (std::int64_t)kj * hi);
                        std::int64_t b2 = lo + stride_lo * (vb + (std::int64_t)kj * hi);
                        Coupling qc = tv_optimal_coupling(cardI, row_vec(ker[(std::size_t)i], b1),
                                                          row_vec(ker[(std::size_t)i], b2));
                        double d = metric_integral(qc, 0, metrics[(std::size_t)i]);
                        double eta = metrics[(std::size_t)j](va, vb);
                        if (d > 0.0) sup = std::max(sup, d / eta);
                    }
            }
            C.at(i, j) = sup;
        }
    }

    std::vector<double> b((std::size_t)n, 0.0);
    for (int j = 0; j < n; ++j) {
        const std::vector<int> cardJ = {rho.space.card[(std::size_t)j]};
        std::vector<double> margB = marginal(rho_tilde, ker[(std::size_t)j].boundary);
        double s = 0.0;
        for (std::int64_t bi = 0; bi < ker[(std::size_t)j].n_rows; ++bi) {
            Coupling qc = tv_optimal_coupling(cardJ, row_vec(ker[(std::size_t)j], bi),
                                              row_vec(kert[(std::size_t)j], bi));
            s += margB[(std::size_t)bi] * metric_integral(qc, 0, metrics[(std::size_t)j]);
        }
        b[(std::size_t)j] = s;
    }

    std::vector<double> W((std::size_t)n, 1.0);
    BoundReport rep = assemble_bound(W, C, b, nullptr, rho, rho_tilde, metrics, fs, neumann_tol,
                                     neumann_max_terms);
    for (int i = 0; i < n; ++i)
        rep.zero_mass_rows = rep.zero_mass_rows || ker[(std::size_t)i].any_zero_row() ||
                             kert[(std::size_t)i].any_zero_row();
    return rep;
}

BoundReport oneside_bound(const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                          const Cover& cover, const std::vector<int>& tau,
                          const std::vector<SiteMetric>& metrics,
                          const std::vector<LocalFunction>& fs) {
    return main_bound(build_oneside_rule(rho, rho_tilde, cover, tau, metrics), fs);
}

std::vector<double> apply_measure(const std::vector<double>& mu, const TransitionMatrix& g) {
    if ((std::int64_t)mu.size() != g.n) throw DobError("measure/operator size mismatch");
    std::vector<double> out((std::size_t)g.n, 0.0);
    for (std::int64_t x = 0; x < g.n; ++x) {
        if (mu[(std::size_t)x] == 0.0) continue;
        for (std::int64_t z = 0; z < g.n; ++z) out[(std::size_t)z] += mu[(std::size_t)x] * g.at(x, z);
    }
    return out;
}

double invariance_gap(const ExactMeasure& mu, const TransitionMatrix& g) {
    std::vector<double> out = apply_measure(mu.p, g);
    double worst = 0.0;
    for (std::size_t t = 0; t < out.size(); ++t)
        worst = std::max(worst, std::fabs(out[t] - mu.p[t]));
    return worst;
}

TransitionMatrix gibbs_sampler(const CoupledUpdateRule& rule, const std::vector<double>& v,
                               bool tilde) {
    if (v.size() != rule.rules.size()) throw DobError("gibbs sampler: weight count mismatch");
    double vsum = 0.0;
    for (double w : v) {
        if (w < 0.0) throw DobError("gibbs sampler: negative weight");
        vsum += w;
    }
    if (vsum > 1.0 + 1e-12) throw DobError("gibbs sampler: weights exceed 1");

    TransitionMatrix g;
    g.space = rule.space;
    g.n = rule.space.joint_size();
    g.rows.assign((std::size_t)(g.n * g.n), 0.0);
    const double idle = std::max(0.0, 1.0 - vsum);
    par::parallel_for(g.n, [&](std::int64_t x) {
        double* row = g.rows.data() + x * g.n;
        row[x] += idle;
        Config xc = config_of_index(rule.space, x);
        for (std::size_t r = 0; r < rule.rules.size(); ++r) {
            if (v[r] == 0.0) continue;
            const RegionRule& rr = rule.rules[r];
            const ConditionalKernel& ker = tilde ? rr.gamma_tilde : rr.gamma;
            Config bc = restrict_config(xc, rr.boundary);
            std::int64_t b = region_index(rule.space, rr.boundary, bc);
            const double* krow = ker.row(b);
            for (std::int64_t z = 0; z < ker.row_len; ++z) {
                Config zc = region_config(rule.space, rr.region, z);
                std::int64_t target = config_index(rule.space, splice(xc, rr.region, zc));
                row[target] += v[r] * krow[z];
            }
        }
    });
    return g;
}

Coupling gibbs_step_coupling(const CoupledUpdateRule& rule, const std::vector<double>& v,
                             std::int64_t x) {
    if (v.size() != rule.rules.size()) throw DobError("gibbs coupling: weight count mismatch");
    double vsum = 0.0;
    for (double w : v) vsum += w;
    if (vsum > 1.0 + 1e-12) throw DobError("gibbs coupling: weights exceed 1");

    Coupling q;
    q.card = rule.space.card;
    q.m = rule.space.joint_size();
    q.joint.assign((std::size_t)(q.m * q.m), 0.0);
    q.at(x, x) += std::max(0.0, 1.0 - vsum);
    Config xc = config_of_index(rule.space, x);
    for (std::size_t r = 0; r < rule.rules.size(); ++r) {
        if (v[r] == 0.0) continue;
        const RegionRule& rr = rule.rules[r];
        Config bc = restrict_config(xc, rr.boundary);
        std::int64_t b = region_index(rule.space, rr.boundary, bc);
        const Coupling& qh = rr.qhat[(std::size_t)b];
        for (std::int64_t zl = 0; zl < qh.m; ++zl)
            for (std::int64_t zr = 0; zr < qh.m; ++zr) {
                double w = qh.at(zl, zr);
                if (w == 0.0) continue;
                std::int64_t l = config_index(
                    rule.space, splice(xc, rr.region, region_config(rule.space, rr.region, zl)));
                std::int64_t rgt = config_index(
                    rule.space, splice(xc, rr.region, region_config(rule.space, rr.region, zr)));
                q.at(l, rgt) += v[r] * w;
            }
    }
    return q;
}

double wasserstein_check(const TransitionMatrix& g, const NonnegMatrix& V,
                         const std::vector<SiteMetric>& metrics, int n_random,
                         std::uint64_t seed) {
    const int n = g.space.n_sites();
    if (V.n != n) throw DobError("wasserstein check: matrix dimension mismatch");
    Region all;
    for (int s = 0; s < n; ++s) all.push_back(s);

    auto violation_of = [&](const std::vector<double>& fvals) {
        LocalFunction f{all, fvals};
        std::vector<double> osc_f = oscillation_vector(g.space, f, metrics);
        std::vector<double> gf((std::size_t)g.n, 0.0);
        for (std::int64_t x = 0; x < g.n; ++x) {
            double s = 0.0;
            for (std::int64_t z = 0; z < g.n; ++z) s += g.at(x, z) * fvals[(std::size_t)z];
            gf[(std::size_t)x] = s;
        }
        LocalFunction gfl{all, gf};
        std::vector<double> osc_gf = oscillation_vector(g.space, gfl, metrics);
        double worst = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            double dom = 0.0;
            for (int i = 0; i < n; ++i)
                dom = ext_add(dom, ext_mul(osc_f[(std::size_t)i], V.at(i, j)));
            worst = std::max(worst, osc_gf[(std::size_t)j] - dom);
        }
        return worst;
    };

    double worst = -std::numeric_limits<double>::infinity();
    for (std::int64_t y = 0; y < g.n; ++y) {
        std::vector<double> f((std::size_t)g.n, 0.0);
        f[(std::size_t)y] = 1.0;
        worst = std::max(worst, violation_of(f));
    }
    for (int t = 0; t < n_random; ++t) {
        Stream st(seed, {0x77617373ull, (std::uint64_t)t});
        std::vector<double> f((std::size_t)g.n);
        for (std::int64_t x = 0; x < g.n; ++x) f[(std::size_t)x] = 2.0 * st.next_double() - 1.0;
        worst = std::max(worst, violation_of(f));
    }
    return worst;
}

MarkovBoundReport markov_comparison(const TransitionMatrix& g, const TransitionMatrix& g_tilde,
                                    const ExactMeasure& rho, const ExactMeasure& rho_tilde,
                                    const NonnegMatrix& V, const std::vector<Coupling>& q_x,
                                    int n, const std::vector<LocalFunction>& fs,
                                    const std::vector<SiteMetric>& metrics) {
    if (n < 0) throw DobError("markov comparison: n must be >= 0");
    if ((std::int64_t)q_x.size() != g.n) throw DobError("markov comparison: coupling count mismatch");
    const int ns = rho.space.n_sites();

    MarkovBoundReport rep;
    rep.invariance_rho = invariance_gap(rho, g);
    rep.invariance_rho_tilde = invariance_gap(rho_tilde, g_tilde);
    if (rep.invariance_rho > 1e-10 || rep.invariance_rho_tilde > 1e-10)
        throw DobError("markov comparison: measures are not invariant for their operators");
    rep.wasserstein_violation = wasserstein_check(g, V, metrics);

    rep.N = NonnegMatrix(ns);
    rep.Vn = NonnegMatrix::identity(ns);
    for (int k = 0; k < n; ++k) {
        rep.N = mat_add(rep.N, rep.Vn);
        rep.Vn = mat_mul(rep.Vn, V);
    }

    // E_rho~ of the coupling's per-site discrepancy
    std::vector<double> qbar((std::size_t)ns, 0.0);
    for (std::int64_t x = 0; x < g.n; ++x) {
        double w = rho_tilde.p[(std::size_t)x];
        if (w == 0.0) continue;
        for (int j = 0; j < ns; ++j)
            qbar[(std::size_t)j] += w * metric_integral(q_x[(std::size_t)x], j, metrics[(std::size_t)j]);
    }

    // (rho x rho~) eta_j from single-site marginals
    std::vector<double> pp((std::size_t)ns, 0.0);
    for (int j = 0; j < ns; ++j) {
        std::vector<double> mj = marginal(rho, {j});
        std::vector<double> mtj = marginal(rho_tilde, {j});
        double s = 0.0;
        for (int a = 0; a < (int)mj.size(); ++a)
            for (int b = 0; b < (int)mtj.size(); ++b)
                s += mj[(std::size_t)a] * mtj[(std::size_t)b] * metrics[(std::size_t)j](a, b);
        pp[(std::size_t)j] = s;
    }

    for (const LocalFunction& f : fs) {
        std::vector<double> osc = oscillation_vector(rho.space, f, metrics);
        double t1 = 0.0, t2 = 0.0;
        for (int i = 0; i < ns; ++i) {
            if (osc[(std::size_t)i] == 0.0) continue;
            for (int j = 0; j < ns; ++j) {
                t1 += osc[(std::size_t)i] * rep.N.at(i, j) * qbar[(std::size_t)j];
                t2 = ext_add(t2, ext_mul(osc[(std::size_t)i],
                                         ext_mul(rep.Vn.at(i, j), pp[(std::size_t)j])));
            }
        }
        rep.term1.push_back(t1);
        rep.term2.push_back(t2);
        rep.bounds.push_back(t1 + t2);
    }
    return rep;
}

Certificate uniqueness_check(const std::vector<double>& W, const NonnegMatrix& R, int condition,
                             const std::vector<SiteMetric>& metrics,
                             const std::optional<std::vector<double>>& dist, int n_max) {
    if ((int)W.size() != R.n) throw DobError("uniqueness check: dimension mismatch");
    if ((int)metrics.size() != R.n) throw DobError("uniqueness check: metric count mismatch");
    validate_nonneg(R);
    for (double w : W)
        if (!(w > 0.0) || w > 1.0 + 1e-12)
            throw DobError("uniqueness check: weight diagonal must lie in (0,1]");

    Certificate cert;
    cert.condition = condition;
    const NonnegMatrix WR = diag_inv_mul(W, R);
    const NonnegMatrix RW = mul_diag_inv(R, W);
    cert.witness["spectral_radius_estimate"] = spectral_radius_estimate(WR);

    double sum_eta = 0.0;
    for (const SiteMetric& m : metrics) sum_eta += m.max_value();

    switch (condition) {
    case 1: {
        NeumannResult nr = neumann_sum(WR);
        cert.pass = nr.converged;
        cert.witness["terms_used"] = nr.terms_used;
        cert.witness["residual"] = nr.residual;
        cert.note = nr.converged ? "influence series converges" : "influence series did not converge";
        break;
    }
    case 2: {
        NonnegMatrix P = NonnegMatrix::identity(R.n);
        for (int k = 1; k <= n_max; ++k) {
            P = mat_mul(P, WR);
            double ni = norm_inf(P), n1 = norm_1(P);
            if (ni < 1.0 || n1 < 1.0) {
                cert.pass = true;
                cert.witness["power"] = k;
                cert.witness["norm_inf"] = ni;
                cert.witness["norm_1"] = n1;
                cert.note = "a power of the normalized influence matrix is a contraction";
                break;
            }
            if (!P.finite() || P.max_entry() > 1e100) break;
        }
        if (!cert.pass) cert.note = "no contracting power found within the search budget";
        break;
    }
    case 3: {
        double v = norm_inf(WR);
        cert.pass = v < 1.0;
        cert.witness["norm_inf"] = v;
        cert.note = cert.pass ? "row-sum contraction holds" : "row-sum norm is not below 1";
        break;
    }
    case 4: {
        NonnegMatrix P = NonnegMatrix::identity(R.n);
        for (int k = 1; k <= n_max; ++k) {
            P = mat_mul(P, RW);
            double ni = norm_inf(P);
            if (ni < 1.0) {
                cert.pass = true;
                cert.witness["power"] = k;
                cert.witness["norm_inf"] = ni;
                cert.note = "a power of the transposed-normalization matrix contracts row sums";
                break;
            }
            if (!P.finite() || P.max_entry() > 1e100) break;
        }
        if (!cert.pass) cert.note = "no contracting power found within the search budget";
        break;
    }
    case 5: {
        double v = norm_1(RW);
        cert.pass = std::isfinite(sum_eta) && v < 1.0;
        cert.witness["norm_1"] = v;
        cert.witness["sum_eta"] = sum_eta;
        cert.note = cert.pass ? "column-sum contraction holds with summable metric diameters"
                              : "column-sum norm is not below 1";
        break;
    }
    case 6: {
        if (!dist) throw DobError("condition 6 requires a site pseudometric");
        validate_pseudometric(*dist, R.n);
        double v = norm_1(RW);
        double rmax = 0.0;
        for (int i = 0; i < R.n; ++i)
            for (int j = 0; j < R.n; ++j)
                if (R.at(i, j) > 0.0) rmax = std::max(rmax, (*dist)[(std::size_t)i * R.n + j]);
        cert.witness["norm_1"] = v;
        cert.witness["interaction_range"] = rmax;
        cert.witness["sum_eta"] = sum_eta;
        if (!(v < 1.0)) {
            cert.pass = false;
            cert.note = "column-sum norm is not below 1";
            break;
        }
        double beta = rmax > 0.0 ? -std::log(v) / (2.0 * rmax) : 1.0;
        double wv = weighted_norm_1(RW, *dist, beta);
        cert.witness["beta"] = beta;
        cert.witness["weighted_norm_1"] = wv;
        cert.pass = wv < 1.0;
        cert.note = cert.pass ? "distance-weighted column contraction holds"
                              : "distance-weighted column norm is not below 1";
        break;
    }
    default:
        throw DobError("unknown uniqueness condition " + std::to_string(condition));
    }
    return cert;
}

} // namespace dob
