// Acceptance gate.  Each criterion prints exactly one PASS/FAIL line with a
// short numeric summary; the exit code is the number of failed criteria.
// argv[1] must point at the dob command-line binary (used by criterion 12).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dob/blockpf.hpp"
#include "dob/comparison.hpp"
#include "dob/couplings.hpp"
#include "dob/hmm.hpp"
#include "dob/io.hpp"
#include "dob/rng.hpp"

using namespace dob;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// --- shared model builders -------------------------------------------------

std::vector<std::pair<int, int>> grid_edges(int rows, int cols) {
    std::vector<std::pair<int, int>> e;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int v = r * cols + c;
            if (c + 1 < cols) e.push_back({v, v + 1});
            if (r + 1 < rows) e.push_back({v, v + cols});
        }
    return e;
}

FactorModel pairwise_model(int sites, const std::vector<std::pair<int, int>>& edges,
                           std::uint64_t seed, double scale, double jitter) {
    FactorModel model;
    model.space = StateSpace(std::vector<int>((std::size_t)sites, 2));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        Factor f;
        f.region = {edges[e].first, edges[e].second};
        for (int c = 0; c < 4; ++c) {
            Stream st(seed, {0xEDull, (std::uint64_t)e, (std::uint64_t)c});
            double u = (2.0 * st.next_double() - 1.0) * scale;
            if (jitter > 0.0) {
                Stream jt(seed, {0xBEull, (std::uint64_t)e, (std::uint64_t)c});
                u += (2.0 * jt.next_double() - 1.0) * jitter;
            }
            f.table.push_back(std::exp(u));
        }
        model.factors.push_back(std::move(f));
    }
    return model;
}

FactorModel ising_grid(int w, int h, double beta) {
    FactorModel model;
    model.space = StateSpace(std::vector<int>((std::size_t)(w * h), 2));
    for (auto [a, b] : grid_edges(h, w)) {
        Factor f;
        f.region = {a, b};
        for (int xb = 0; xb < 2; ++xb)
            for (int xa = 0; xa < 2; ++xa)
                f.table.push_back(std::exp(beta * (2 * xa - 1) * (2 * xb - 1)));
        model.factors.push_back(std::move(f));
    }
    return model;
}

std::vector<LocalFunction> one_indicators(const StateSpace& space) {
    std::vector<LocalFunction> fs;
    for (int i = 0; i < space.n_sites(); ++i) fs.push_back(indicator_at(space, {i}, {1}));
    return fs;
}

std::vector<double> random_subprob(std::size_t m, std::uint64_t seed) {
    std::vector<double> v(m);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        Stream st(seed, {0x76ull, (std::uint64_t)i});
        v[i] = 0.05 + st.next_double();
        s += v[i];
    }
    for (double& x : v) x /= (s * 1.25);
    return v;
}

// --- criterion 1: bound validity sweep ------------------------------------

Outcome criterion1() {
    const auto edges = grid_edges(2, 3);
    const std::vector<std::pair<int, int>> hpairs{{0, 1}, {1, 2}, {3, 4}, {4, 5}};
    int certified = 0, violations = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        ExactMeasure rho = normalize(pairwise_model(6, edges, seed, 0.5, 0.0));
        ExactMeasure rho_tilde = normalize(pairwise_model(6, edges, seed, 0.5, 0.1));
        std::vector<SiteMetric> metrics = trivial_metrics(rho.space);
        std::vector<LocalFunction> fs = one_indicators(rho.space);
        CoupledUpdateRule srule = build_rule(rho, rho_tilde, singleton_cover(rho.space), metrics);
        Certificate gate = uniqueness_check(build_W(srule), build_R(srule), 3, metrics);
        if (!gate.pass) continue;
        ++certified;
        BoundReport srep = main_bound(srule, fs);
        BoundReport prep =
            main_bound(build_rule(rho, rho_tilde, pair_cover(rho.space, hpairs), metrics), fs);
        for (const BoundReport* rep : {&srep, &prep}) {
            if (!rep->certified) {
                ++violations;
                continue;
            }
            for (std::size_t i = 0; i < fs.size(); ++i)
                if (rep->exact[i] > rep->bounds[i] + 1e-9) ++violations;
        }
    }
    Outcome out;
    out.pass = violations == 0 && certified >= 100;
    out.detail = std::to_string(certified) + "/200 certified, " + std::to_string(violations) +
                 " bound violations across singleton and pair covers";
    return out;
}

// --- criterion 2: independent singleton implementation agrees --------------

Outcome criterion2() {
    const auto edges = grid_edges(1, 4);
    double worst = 0.0;
    for (std::uint64_t seed = 500; seed < 550; ++seed) {
        ExactMeasure rho = normalize(pairwise_model(4, edges, seed, 0.4, 0.0));
        ExactMeasure rho_tilde = normalize(pairwise_model(4, edges, seed, 0.4, 0.08));
        std::vector<SiteMetric> metrics = trivial_metrics(rho.space);
        std::vector<LocalFunction> fs = one_indicators(rho.space);
        BoundReport gen =
            main_bound(build_rule(rho, rho_tilde, singleton_cover(rho.space), metrics), fs);
        BoundReport cls = classical_bound(rho, rho_tilde, metrics, fs);
        for (std::size_t i = 0; i < fs.size(); ++i)
            worst = std::max(worst, std::abs(gen.bounds[i] - cls.bounds[i]) /
                                        std::max(1.0, std::abs(cls.bounds[i])));
    }
    return {worst <= 1e-12, "max relative gap " + fmt(worst) + " over 50 models (tol 1e-12)"};
}

// --- criterion 3: geometric series identity --------------------------------

Outcome criterion3() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const int n = 4;
        std::vector<double> W((std::size_t)n);
        NonnegMatrix R(n);
        for (int i = 0; i < n; ++i) {
            Stream sw(seed, {0x57ull, (std::uint64_t)i});
            W[(std::size_t)i] = 0.5 + 0.5 * sw.next_double();
            for (int j = 0; j < n; ++j) {
                Stream sr(seed, {0x52ull, (std::uint64_t)(i * n + j)});
                if (i != j) R.at(i, j) = 0.08 * sr.next_double();
            }
        }
        NonnegMatrix B = R;
        for (int i = 0; i < n; ++i) B.at(i, i) = 1.0 - W[(std::size_t)i];
        NonnegMatrix lhs = NonnegMatrix::identity(n), pw = NonnegMatrix::identity(n);
        for (int k = 1; k <= 5000; ++k) {
            pw = mat_mul(pw, B);
            lhs = mat_add(lhs, pw);
            if (pw.max_entry() < 1e-15) break;
        }
        NeumannResult D = neumann_sum(diag_inv_mul(W, R));
        if (!D.converged) return {false, "series failed to converge on seed " + std::to_string(seed)};
        NonnegMatrix rhs = mul_diag_inv(D.sum, W);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(lhs.at(i, j) - rhs.at(i, j)));
    }
    return {worst <= 1e-8, "max entry gap " + fmt(worst) + " over 100 matrices (tol 1e-8)"};
}

// --- criterion 4: sampler invariance ---------------------------------------

Outcome criterion4() {
    const auto edges = grid_edges(1, 4);
    double worst = 0.0;
    for (std::uint64_t seed = 900; seed < 950; ++seed) {
        ExactMeasure rho = normalize(pairwise_model(4, edges, seed, 0.5, 0.0));
        ExactMeasure rho_tilde = normalize(pairwise_model(4, edges, seed, 0.5, 0.1));
        std::vector<SiteMetric> metrics = trivial_metrics(rho.space);
        CoupledUpdateRule rule = build_rule(rho, rho_tilde, singleton_cover(rho.space), metrics);
        std::vector<double> v = random_subprob(4, seed);
        worst = std::max(worst, invariance_gap(rho, gibbs_sampler(rule, v)));
        worst = std::max(worst, invariance_gap(rho_tilde, gibbs_sampler(rule, v, true)));
    }
    return {worst <= 1e-12, "max invariance gap " + fmt(worst) + " over 50 models (tol 1e-12)"};
}

// --- criterion 5: oscillation matrix dominates the sampler -----------------

Outcome criterion5() {
    const auto edges = grid_edges(1, 4);
    double worst = -1.0;
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        ExactMeasure rho = normalize(pairwise_model(4, edges, seed, 0.5, 0.0));
        std::vector<SiteMetric> metrics = trivial_metrics(rho.space);
        std::vector<double> v = random_subprob(4, seed);
        Cover cover = singleton_cover(rho.space);
        cover.weights = v;
        CoupledUpdateRule rule = build_rule(rho, rho, cover, metrics);
        std::vector<double> W = build_W(rule);
        NonnegMatrix V = build_R(rule);
        for (int i = 0; i < 4; ++i) V.at(i, i) += 1.0 - W[(std::size_t)i];
        worst = std::max(worst, wasserstein_check(gibbs_sampler(rule, v), V, metrics));
    }
    return {worst <= 1e-9, "max domination violation " + fmt(worst) + " over 30 models (tol 1e-9)"};
}

// --- criterion 6: minorization couplings -----------------------------------

std::vector<double> chain_law(const std::vector<std::vector<double>>& P, int k, int x0, int t) {
    std::vector<double> mu((std::size_t)k, 0.0);
    mu[(std::size_t)x0] = 1.0;
    for (int s = 0; s < t; ++s) {
        std::vector<double> next((std::size_t)k, 0.0);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                next[(std::size_t)b] +=
                    mu[(std::size_t)a] * P[(std::size_t)s][(std::size_t)(a * k + b)];
        mu = next;
    }
    return mu;
}

Outcome criterion6() {
    // static couplings: together with at least the minorization mass
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::vector<double> mu(3), nu(3);
        double sm = 0.0, sn = 0.0;
        for (int i = 0; i < 3; ++i) {
            Stream a(seed, {0x6dull, (std::uint64_t)i}), b(seed, {0x6eull, (std::uint64_t)i});
            mu[(std::size_t)i] = 0.05 + a.next_double();
            nu[(std::size_t)i] = 0.05 + b.next_double();
            sm += mu[(std::size_t)i];
            sn += nu[(std::size_t)i];
        }
        for (int i = 0; i < 3; ++i) {
            mu[(std::size_t)i] /= sm;
            nu[(std::size_t)i] /= sn;
        }
        std::vector<double> gamma(3);
        double sg = 0.0;
        for (int i = 0; i < 3; ++i) sg += std::min(mu[(std::size_t)i], nu[(std::size_t)i]);
        for (int i = 0; i < 3; ++i) gamma[(std::size_t)i] = std::min(mu[(std::size_t)i], nu[(std::size_t)i]) / sg;
        const double alpha = max_minorize_alpha(mu, nu, gamma);
        Coupling q = minorize_coupling({3}, mu, nu, gamma, alpha);
        if (coupling_marginal_error(q, mu, nu) > 1e-12)
            return {false, "static coupling marginals off at seed " + std::to_string(seed)};
        if (coupling_mismatch_total(q) > 1.0 - alpha + 1e-12)
            return {false, "static mismatch above 1-alpha at seed " + std::to_string(seed)};
    }

    // chain couplings: stepwise mismatch below (1-alpha)^step, marginals are
    // the chain laws recovered by summing the path-pair table
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        for (int steps = 1; steps <= 4; ++steps) {
            std::vector<std::vector<double>> Ps, nus;
            for (int s = 0; s < steps; ++s) {
                std::vector<double> P(4);
                for (int r = 0; r < 2; ++r) {
                    Stream st(seed, {0x50ull, (std::uint64_t)s, (std::uint64_t)r});
                    const double p = 0.15 + 0.7 * st.next_double();
                    P[(std::size_t)(r * 2)] = p;
                    P[(std::size_t)(r * 2 + 1)] = 1.0 - p;
                }
                Ps.push_back(P);
                nus.push_back({0.5, 0.5});
            }
            double alpha = 2.0;
            for (int s = 0; s < steps; ++s)
                for (double p : Ps[(std::size_t)s]) alpha = std::min(alpha, p / 0.5);
            Coupling q = markov_minorize_coupling(Ps, nus, alpha, 2, 0, 1);
            std::vector<double> lm = left_marginal(q), rm = right_marginal(q);
            for (int t = 1; t <= steps; ++t) {
                std::vector<double> lawx = chain_law(Ps, 2, 0, t), lawz = chain_law(Ps, 2, 1, t);
                std::vector<double> px(2, 0.0), pz(2, 0.0);
                for (std::int64_t idx = 0; idx < q.m; ++idx) {
                    const int digit = (int)((idx >> (t - 1)) & 1);
                    px[(std::size_t)digit] += lm[(std::size_t)idx];
                    pz[(std::size_t)digit] += rm[(std::size_t)idx];
                }
                for (int b = 0; b < 2; ++b)
                    if (std::abs(px[(std::size_t)b] - lawx[(std::size_t)b]) > 1e-12 ||
                        std::abs(pz[(std::size_t)b] - lawz[(std::size_t)b]) > 1e-12)
                        return {false, "chain marginal off at seed " + std::to_string(seed)};
                if (coupling_mismatch(q, t - 1) > std::pow(1.0 - alpha, t) + 1e-12)
                    return {false, "chain mismatch above (1-alpha)^t at seed " +
                                       std::to_string(seed)};
            }
        }
    }
    return {true, "100 static and 120 chain couplings within the minorization envelope"};
}

// --- criterion 7: recursive filters match the path sum ---------------------

Outcome criterion7() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        LatticeHMM m = build_grid_model({2, 2}, 1, 0.9, 0.35, 0.45, seed);
        Trajectory t = simulate(m, 3, seed + 100);
        std::vector<ExactMeasure> rec = exact_filter(m, t.y);
        ExactMeasure direct = brute_force_filter(m, t.y);
        worst = std::max(worst, 0.5 * l1_diff(rec.back().p, direct.p));
        BlockState whole = block_filter(m, whole_partition(4), t.y);
        worst = std::max(worst, 0.5 * l1_diff(whole.tables[0], direct.p));
    }
    return {worst <= 1e-10,
            "max total-variation gap " + fmt(worst) + " over 10 sequences (tol 1e-10)"};
}

// --- criterion 8: blocking bias decays away from block boundaries ----------

Outcome criterion8() {
    LatticeHMM m = build_grid_model({8}, 1, 0.95, 0.4, 0.5, 4);
    Partition part = contiguous_partition(8, 4);
    ErrorCurve curve = bias_experiment(m, part, 10, 20, 11);
    std::vector<double> err(8, 0.0);
    std::vector<int> dist(8, 0);
    for (const ErrorRow& r : curve.rows) {
        err[(std::size_t)r.site] = r.error;
        dist[(std::size_t)r.site] = r.dist_to_boundary;
    }
    double mean0 = 0.0, mean1 = 0.0;
    for (int v = 0; v < 8; ++v) (dist[(std::size_t)v] == 0 ? mean0 : mean1) += err[(std::size_t)v] / 4.0;

    // exact permutation test over the 70 ways to pick the boundary group
    const double observed = mean0 - mean1;
    int at_least = 0, total = 0;
    for (int mask = 0; mask < 256; ++mask) {
        if (__builtin_popcount((unsigned)mask) != 4) continue;
        ++total;
        double g0 = 0.0, g1 = 0.0;
        for (int v = 0; v < 8; ++v) ((mask >> v) & 1 ? g0 : g1) += err[(std::size_t)v] / 4.0;
        if (g0 - g1 >= observed) ++at_least;
    }
    const double p = (double)at_least / total;
    Outcome out;
    out.pass = mean0 > mean1 && p < 0.05;
    out.detail = "boundary error " + fmt(mean0) + " vs interior " + fmt(mean1) +
                 ", one-sided permutation p = " + fmt(p);
    return out;
}

// --- criterion 9: sampling error decays like a power of N ------------------

double mean_error_slope(const LatticeHMM& m, const Partition& part,
                        const std::vector<int>& Ns) {
    ErrorCurve curve = variance_experiment(m, part, 10, Ns, 50, 21);
    std::map<std::int64_t, std::pair<double, int>> agg;
    for (const ErrorRow& r : curve.rows) {
        agg[r.N].first += r.error;
        agg[r.N].second += 1;
    }
    std::vector<std::pair<double, double>> xy;
    for (const auto& [N, acc] : agg) xy.push_back({(double)N, acc.first / acc.second});
    return fit_loglog_slope(xy);
}

Outcome criterion9() {
    LatticeHMM m = build_grid_model({4}, 1, 0.9, 0.4, 0.5, 8);
    const std::vector<int> Ns{100, 400, 1600, 6400};
    const double slope_whole = mean_error_slope(m, whole_partition(4), Ns);
    const double slope_blocks = mean_error_slope(m, contiguous_partition(4, 2), Ns);
    Outcome out;
    out.pass = slope_whole >= -0.65 && slope_whole <= -0.35 && slope_blocks <= -0.3;
    out.detail = "log-log slope " + fmt(slope_whole) + " single ensemble (want [-0.65,-0.35]), " +
                 fmt(slope_blocks) + " two blocks (want <= -0.3)";
    return out;
}

// --- criterion 10: envelope feasibility across the eps range ---------------

Outcome criterion10() {
    FeasibilityResult strong = feasibility_search(0.99, 0.5, 1, 3, 3);
    FeasibilityResult weak = feasibility_search(0.5, 0.5, 1, 3, 3);
    FeasibilityResult indep = feasibility_search(1.0, 0.5, 1, 3, 3);
    const bool a = strong.feasible;
    const bool b = !weak.feasible;
    const bool c = indep.feasible && indep.q_min_feasible == 5;
    Outcome out;
    out.pass = a && b && c;
    out.detail = std::string("eps=0.99 ") + (a ? "feasible" : "infeasible (min c = " + fmt(strong.c) + ")") +
                 "; eps=0.5 " + (b ? "infeasible as required" : "unexpectedly feasible") +
                 "; eps=1 " + (c ? "feasible from q = 5" : "wrong feasibility threshold");
    return out;
}

// --- criterion 11: uniqueness threshold in interaction strength ------------

bool ising_condition3(double beta) {
    ExactMeasure rho = normalize(ising_grid(3, 3, beta));
    std::vector<SiteMetric> metrics = trivial_metrics(rho.space);
    CoupledUpdateRule rule = build_rule(rho, rho, singleton_cover(rho.space), metrics);
    return uniqueness_check(build_W(rule), build_R(rule), 3, metrics).pass;
}

Outcome criterion11() {
    if (!ising_condition3(0.1)) return {false, "certificate fails at beta = 0.1"};
    if (ising_condition3(1.0)) return {false, "certificate passes at beta = 1.0"};
    double lo = 0.1, hi = 1.0;
    while (hi - lo > 0.01) {
        const double mid = 0.5 * (lo + hi);
        (ising_condition3(mid) ? lo : hi) = mid;
    }
    // the pass region must be a single interval ending at the crossing
    bool monotone = true;
    for (double beta = 0.1; beta < 1.0 + 1e-9; beta += 0.05) {
        const bool pass = ising_condition3(beta);
        if (pass != (beta < lo + 1e-9)) monotone = false;
    }
    Outcome out;
    out.pass = monotone;
    out.detail = "crossing in [" + fmt(lo) + ", " + fmt(hi) + "], pass region is an interval: " +
                 (monotone ? "yes" : "no");
    return out;
}

// --- criterion 12: command line determinism and exit codes -----------------

int run_cmd(const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

Outcome criterion12(const std::string& dob) {
    namespace fs = std::filesystem;
    const std::string dir = "acceptance_tmp";
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir);
    const std::string q = "\"" + dob + "\"";
    std::vector<std::string> problems;

    auto check_exit = [&](const std::string& cmd, int want, const std::string& label) {
        const int got = run_cmd(cmd);
        if (got != want)
            problems.push_back(label + " exited " + std::to_string(got) + " (want " +
                               std::to_string(want) + ")");
    };

    // thread-count determinism: identical bytes from 1, 2, and 8 threads
    struct Variant {
        std::string name, args;
    };
    std::vector<Variant> variants{
        {"model", "gen-model --kind random --shape 2 3 --range 0.25 --jitter 0.05 --seed 5 --out "},
        {"bound", "bound --model " + dir + "/model_t1.txt --matrices --out "},
        {"certify", "certify --model " + dir + "/model_t1.txt --condition 3 --out "},
        {"hmm", "gen-model --kind hmm --shape 4 --eps 0.9 --seed 3 --out "},
        {"bias", "filter-bias --model " + dir + "/hmm_t1.txt --partition blocks:2 --n 4 --seeds 3 --out "},
        {"variance", "filter-variance --model " + dir + "/hmm_t1.txt --partition blocks:2 --n 3 "
                     "--N 50 --N 100 --seeds 3 --out "},
        {"feasibility", "feasibility --eps 1.0 --delta 0.5 --out "},
    };
    for (const Variant& var : variants) {
        std::vector<std::string> payloads;
        for (int threads : {1, 2, 8}) {
            const std::string path = dir + "/" + var.name + "_t" + std::to_string(threads) + ".txt";
            const std::string cmd =
                q + " --threads " + std::to_string(threads) + " " + var.args + path;
            const int got = run_cmd(cmd);
            if (got != 0) {
                problems.push_back(var.name + " exited " + std::to_string(got));
                break;
            }
            payloads.push_back(read_text_file(path));
        }
        for (std::size_t i = 1; i < payloads.size(); ++i)
            if (payloads[i] != payloads[0])
                problems.push_back(var.name + " output differs across thread counts");
    }

    // exit code contract
    write_text_file(dir + "/garbage.txt", "factorgraph v9\nend\n");
    check_exit(q + " bound --model " + dir + "/garbage.txt --out " + dir + "/x.json", 2, "parse error");
    check_exit(q + " gen-model --kind random --shape 40 --out " + dir + "/huge.txt", 3, "guard");
    check_exit(q + " gen-model --kind ising --shape 3 3 --beta 1.0 --out " + dir + "/hot.txt", 0,
               "hot model generation");
    check_exit(q + " certify --model " + dir + "/hot.txt --condition 3 --out " + dir + "/hot.json",
               4, "failed certificate");
    check_exit(q + " feasibility --eps 0.5 --delta 0.5 --out " + dir + "/inf.json", 5, "infeasible");
    check_exit(q + " no-such-command", 2, "unknown subcommand");

    Outcome out;
    out.pass = problems.empty();
    if (out.pass)
        out.detail = "7 commands byte-identical across --threads 1/2/8; exit codes 2/3/4/5 honored";
    else {
        out.detail = problems[0];
        for (std::size_t i = 1; i < problems.size() && i < 3; ++i) out.detail += "; " + problems[i];
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-dob-binary>\n");
        return 99;
    }
    const std::string dob = argv[1];

    struct Entry {
        const char* what;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries{
        {"comparison bounds dominate exact differences on random models",
         [] { return criterion1(); }},
        {"independent singleton implementation matches to 1e-12", [] { return criterion2(); }},
        {"truncated update series equals the normalized influence series",
         [] { return criterion3(); }},
        {"induced samplers leave their measures invariant", [] { return criterion4(); }},
        {"influence matrix dominates sampler oscillations", [] { return criterion5(); }},
        {"minorization couplings respect their decay envelopes", [] { return criterion6(); }},
        {"recursive filters agree with whole-path summation", [] { return criterion7(); }},
        {"blocking bias concentrates at block boundaries", [] { return criterion8(); }},
        {"particle sampling error decays like a power of N", [] { return criterion9(); }},
        {"envelope feasibility matches the closed-form thresholds", [] { return criterion10(); }},
        {"uniqueness certificate has a sharp interaction threshold", [] { return criterion11(); }},
        {"command line output is thread-count invariant with honest exit codes",
         [&dob] { return criterion12(dob); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            out = entries[i].run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %zu: %s (%s) [%.1fs]\n", out.pass ? "PASS" : "FAIL", i + 1,
                    entries[i].what, out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    std::printf("%d of %zu criteria passed\n", (int)entries.size() - failures, entries.size());
    return failures;
}
