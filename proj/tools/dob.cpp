#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dob/blockpf.hpp"
#include "dob/comparison.hpp"
#include "dob/hmm.hpp"
#include "dob/io.hpp"
#include "dob/oracle.hpp"
#include "dob/parallel.hpp"
#include "dob/rng.hpp"

namespace {

using namespace dob;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitGuard = 3;
constexpr int kExitCertFailed = 4;
constexpr int kExitInfeasible = 5;

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text_file(out_path, text);
}

Cover parse_cover(const StateSpace& space, const LatticeGraph* graph, const std::string& arg) {
    if (arg == "singleton") return singleton_cover(space);
    if (arg == "edges") {
        std::vector<std::pair<int, int>> pairs;
        if (graph) {
            for (int a = 0; a < graph->n; ++a)
                for (int b : graph->adj[(std::size_t)a])
                    if (a < b) pairs.push_back({a, b});
        } else {
            for (int a = 0; a + 1 < space.n_sites(); a += 2) pairs.push_back({a, a + 1});
            if (space.n_sites() % 2) pairs.push_back({space.n_sites() - 2, space.n_sites() - 1});
        }
        return pair_cover(space, pairs);
    }
    if (arg.rfind("temporal:", 0) == 0) {
        const int q = (int)parse_double(arg.substr(9));
        std::vector<int> tau((std::size_t)space.n_sites());
        for (int i = 0; i < space.n_sites(); ++i) tau[(std::size_t)i] = i;
        return temporal_cover(space, tau, q);
    }
    throw ParseError("unknown cover '" + arg + "' (singleton | edges | temporal:q)");
}

Partition parse_partition(const LatticeGraph& graph, const std::string& arg) {
    if (arg == "whole") return whole_partition(graph.n);
    if (arg.rfind("blocks:", 0) == 0) {
        const int k = (int)parse_double(arg.substr(7));
        return contiguous_partition(graph.n, k);
    }
    return load_partition_file(arg);
}

std::vector<SiteMetric> parse_metrics(const StateSpace& space, const std::string& arg) {
    if (arg == "trivial") return trivial_metrics(space);
    std::vector<SiteMetric> m = load_metrics_file(arg);
    if ((int)m.size() != space.n_sites()) throw ParseError("metric count mismatch");
    for (int i = 0; i < space.n_sites(); ++i)
        if (m[(std::size_t)i].k != space.card[(std::size_t)i])
            throw ParseError("metric alphabet mismatch at site " + std::to_string(i));
    return m;
}

std::vector<LocalFunction> site_indicators(const StateSpace& space) {
    std::vector<LocalFunction> fs;
    for (int i = 0; i < space.n_sites(); ++i)
        for (int a = 0; a < space.card[(std::size_t)i]; ++a)
            fs.push_back(indicator_at(space, {i}, {a}));
    return fs;
}

FactorModel grid_pairwise_model(const std::vector<int>& shape, bool periodic, double beta,
                                double range, double jitter, std::uint64_t seed, bool partner) {
    const LatticeGraph graph = make_lattice(shape, periodic, 1);
    FactorModel model;
    model.space = StateSpace(std::vector<int>((std::size_t)graph.n, 2));
    int edge = 0;
    for (int a = 0; a < graph.n; ++a)
        for (int b : graph.adj[(std::size_t)a]) {
            if (a >= b) continue;
            Factor f;
            f.region = {a, b};
            f.table.resize(4);
            for (int xb = 0; xb < 2; ++xb)
                for (int xa = 0; xa < 2; ++xa) {
                    double u;
                    if (range > 0.0) {
                        Stream st(seed, {0x6d6f64656cull, (std::uint64_t)edge,
                                         (std::uint64_t)(xb * 2 + xa)});
                        u = (2.0 * st.next_double() - 1.0) * range;
                        if (partner) {
                            Stream pt(seed, {0x6a69747472ull, (std::uint64_t)edge,
                                             (std::uint64_t)(xb * 2 + xa)});
                            u += (2.0 * pt.next_double() - 1.0) * jitter;
                        }
                    } else {
                        const int sa = 2 * xa - 1, sb = 2 * xb - 1;
                        u = beta * sa * sb;
                    }
                    f.table[(std::size_t)(xb * 2 + xa)] = std::exp(u);
                }
            model.factors.push_back(std::move(f));
            ++edge;
        }
    validate_model(model);
    return model;
}

int cmd_gen_model(const std::string& kind, const std::vector<int>& shape, int radius, double eps,
                  double delta, double kappa, double beta, double range, double jitter,
                  bool periodic, int xcard, int ycard, std::uint64_t seed,
                  const std::string& out, const std::string& out_b) {
    if (kind == "hmm") {
        LatticeHMM model = build_grid_model(shape, radius, eps, delta, kappa, seed, periodic,
                                            xcard, ycard);
        std::ostringstream os;
        save_hmm(os, model);
        emit(out, os.str());
        return kExitOk;
    }
    if (kind == "ising" || kind == "random") {
        const double r = kind == "ising" ? 0.0 : range;
        FactorModel model = grid_pairwise_model(shape, periodic, beta, r, jitter, seed, false);
        std::ostringstream os;
        save_model(os, model);
        emit(out, os.str());
        if (!out_b.empty()) {
            FactorModel partner = grid_pairwise_model(shape, periodic, beta, r, jitter, seed, true);
            std::ostringstream ob;
            save_model(ob, partner);
            emit(out_b, ob.str());
        }
        return kExitOk;
    }
    throw ParseError("unknown model kind '" + kind + "' (hmm | ising | random)");
}

int cmd_bound(const std::string& model_path, const std::string& model_b_path,
              const std::string& cover_spec, const std::string& weights_path,
              const std::string& metric_spec, bool matrices, const std::string& out) {
    FactorModel ma = load_model_file(model_path);
    FactorModel mb = model_b_path.empty() ? ma : load_model_file(model_b_path);
    ExactMeasure rho = normalize(ma);
    ExactMeasure rho_tilde = normalize(mb);
    Cover cover = parse_cover(rho.space, nullptr, cover_spec);
    if (!weights_path.empty()) {
        cover.weights = load_weights_file(weights_path);
        if (cover.weights.size() != cover.regions.size())
            throw ParseError("weight count does not match cover regions");
    }
    std::vector<SiteMetric> metrics = parse_metrics(rho.space, metric_spec);
    CoupledUpdateRule rule = build_rule(rho, rho_tilde, cover, metrics);
    BoundReport rep = main_bound(rule, site_indicators(rho.space));
    MetaList meta{{"model", model_path},
                  {"model_b", model_b_path.empty() ? model_path : model_b_path},
                  {"cover", cover_spec},
                  {"metric", metric_spec},
                  {"neumann_tol", "1e-12"},
                  {"neumann_max_terms", "10000"}};
    emit(out, bound_report_document(rep, matrices, meta));
    return rep.certified ? kExitOk : kExitCertFailed;
}

int cmd_certify(const std::string& model_path, const std::string& cover_spec,
                const std::string& weights_path, const std::string& metric_spec, int condition,
                const std::string& dist_path, const std::string& out) {
    FactorModel ma = load_model_file(model_path);
    ExactMeasure rho = normalize(ma);
    Cover cover = parse_cover(rho.space, nullptr, cover_spec);
    if (!weights_path.empty()) {
        cover.weights = load_weights_file(weights_path);
        if (cover.weights.size() != cover.regions.size())
            throw ParseError("weight count does not match cover regions");
    }
    std::vector<SiteMetric> metrics = parse_metrics(rho.space, metric_spec);
    CoupledUpdateRule rule = build_rule(rho, rho, cover, metrics);
    std::optional<std::vector<double>> dist;
    if (!dist_path.empty()) {
        dist = load_weights_file(dist_path);
        if ((std::int64_t)dist->size() !=
            (std::int64_t)rho.space.n_sites() * rho.space.n_sites())
            throw ParseError("distance table must have n*n entries");
    }
    Certificate cert = uniqueness_check(build_W(rule), build_R(rule), condition, metrics, dist);
    MetaList meta{{"model", model_path},
                  {"cover", cover_spec},
                  {"metric", metric_spec},
                  {"n_max", "64"}};
    emit(out, certificate_document(cert, meta));
    return cert.pass ? kExitOk : kExitCertFailed;
}

int cmd_filter_bias(const std::string& model_path, const std::string& partition_spec, int n,
                    int seeds, std::uint64_t seed, const std::string& out) {
    LatticeHMM model = load_hmm_file(model_path);
    Partition partition = parse_partition(model.graph, partition_spec);
    ErrorCurve curve = bias_experiment(model, partition, n, seeds, seed);
    emit(out, error_curve_csv(curve));
    return kExitOk;
}

int cmd_filter_variance(const std::string& model_path, const std::string& partition_spec, int n,
                        std::vector<std::int64_t> Ns, int seeds, std::uint64_t seed,
                        const std::string& out) {
    LatticeHMM model = load_hmm_file(model_path);
    Partition partition = parse_partition(model.graph, partition_spec);
    std::vector<int> ns(Ns.begin(), Ns.end());
    ErrorCurve curve = variance_experiment(model, partition, n, ns, seeds, seed);
    emit(out, error_curve_csv(curve));
    return kExitOk;
}

int cmd_feasibility(double eps, double delta, int r, int Delta, int DeltaK, int q_max,
                    double beta_lo, double beta_hi, int beta_points, const std::string& out) {
    FeasibilityResult res =
        feasibility_search(eps, delta, r, Delta, DeltaK, q_max, beta_lo, beta_hi, beta_points);
    MetaList meta{{"eps", format_double(eps)},
                  {"delta", format_double(delta)},
                  {"r", std::to_string(r)},
                  {"Delta", std::to_string(Delta)},
                  {"DeltaK", std::to_string(DeltaK)}};
    emit(out, feasibility_document(res, meta));
    return res.feasible ? kExitOk : kExitInfeasible;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"comparison bounds for Gibbs measures and block particle filtering"};
    app.require_subcommand(1);

    int threads = dob::par::threads();
    app.add_option("--threads", threads, "worker thread count (default: DOB_THREADS or 1)");

    std::string kind = "hmm", out, out_b;
    std::vector<int> shape;
    int radius = 1, xcard = 2, ycard = 2;
    double eps = 0.95, delta = 0.5, kappa = 0.5, beta = 0.3, range = 0.5, jitter = 0.0;
    bool no_periodic = false;
    std::uint64_t seed = 1;

    auto* gen = app.add_subcommand("gen-model", "generate a model document");
    gen->add_option("--kind", kind, "hmm | ising | random");
    gen->add_option("--shape", shape, "lattice shape, 1 or 2 dims")->required()->expected(1, 2);
    gen->add_option("--radius", radius, "interaction radius");
    gen->add_option("--eps", eps, "transition envelope (hmm)");
    gen->add_option("--delta", delta, "base kernel envelope (hmm)");
    gen->add_option("--kappa", kappa, "emission envelope (hmm)");
    gen->add_option("--beta", beta, "inverse temperature (ising)");
    gen->add_option("--range", range, "potential range (random)");
    gen->add_option("--jitter", jitter, "partner jitter (random with --out-b)");
    gen->add_flag("--no-periodic", no_periodic, "open boundary");
    gen->add_option("--xcard", xcard, "hidden alphabet size");
    gen->add_option("--ycard", ycard, "observation alphabet size");
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("--out", out, "output path (default stdout)");
    gen->add_option("--out-b", out_b, "partner model path (random)");

    std::string model_path, model_b_path, cover_spec = "singleton", weights_path,
                metric_spec = "trivial", dist_path;
    bool matrices = false;

    auto* bound = app.add_subcommand("bound", "comparison bound between two models");
    bound->add_option("--model", model_path, "factor model document")->required();
    bound->add_option("--model-b", model_b_path, "partner model (default: same model)");
    bound->add_option("--cover", cover_spec, "singleton | edges | temporal:q");
    bound->add_option("--weights", weights_path, "region weights document");
    bound->add_option("--metric", metric_spec, "trivial | metrics document path");
    bound->add_flag("--matrices", matrices, "embed W, R, a in the report");
    bound->add_option("--out", out, "output path (default stdout)");

    int condition = 3;
    auto* certify = app.add_subcommand("certify", "uniqueness certificate for a model");
    certify->add_option("--model", model_path, "factor model document")->required();
    certify->add_option("--cover", cover_spec, "singleton | edges | temporal:q");
    certify->add_option("--weights", weights_path, "region weights document");
    certify->add_option("--metric", metric_spec, "trivial | metrics document path");
    certify->add_option("--condition", condition, "uniqueness condition 1..6")
        ->check(CLI::Range(1, 6));
    certify->add_option("--dist", dist_path, "site pseudometric document (condition 6)");
    certify->add_option("--out", out, "output path (default stdout)");

    std::string partition_spec = "whole";
    int n = 10, n_seeds = 20;
    std::vector<std::int64_t> Ns;

    auto* fbias = app.add_subcommand("filter-bias", "exact filter vs block filter");
    fbias->add_option("--model", model_path, "lattice hmm document")->required();
    fbias->add_option("--partition", partition_spec, "whole | blocks:k | document path");
    fbias->add_option("--n", n, "time steps");
    fbias->add_option("--seeds", n_seeds, "observation sequences");
    fbias->add_option("--seed", seed, "master seed");
    fbias->add_option("--out", out, "output path (default stdout)");

    auto* fvar = app.add_subcommand("filter-variance", "block filter vs particle filter");
    fvar->add_option("--model", model_path, "lattice hmm document")->required();
    fvar->add_option("--partition", partition_spec, "whole | blocks:k | document path");
    fvar->add_option("--n", n, "time steps");
    fvar->add_option("--N", Ns, "particle counts")->required();
    fvar->add_option("--seeds", n_seeds, "filter seeds per N");
    fvar->add_option("--seed", seed, "master seed");
    fvar->add_option("--out", out, "output path (default stdout)");

    int r = 1, Delta = 3, DeltaK = 0, q_max = 200, beta_points = 241;
    double beta_lo = 1e-4, beta_hi = 2.0;
    auto* feas = app.add_subcommand("feasibility", "small-interaction regime search");
    feas->add_option("--eps", eps, "transition envelope")->required();
    feas->add_option("--delta", delta, "base kernel envelope")->required();
    feas->add_option("--r", r, "interaction radius");
    feas->add_option("--Delta", Delta, "neighborhood size bound");
    feas->add_option("--DeltaK", DeltaK, "blocks within interaction range (default Delta)");
    feas->add_option("--q-max", q_max, "largest temporal block length");
    feas->add_option("--beta-lo", beta_lo, "smallest decay rate");
    feas->add_option("--beta-hi", beta_hi, "largest decay rate");
    feas->add_option("--beta-points", beta_points, "decay rate grid size");
    feas->add_option("--out", out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }

    try {
        dob::par::set_threads(threads);
        if (gen->parsed())
            return cmd_gen_model(kind, shape, radius, eps, delta, kappa, beta, range, jitter,
                                 !no_periodic, xcard, ycard, seed, out, out_b);
        if (bound->parsed())
            return cmd_bound(model_path, model_b_path, cover_spec, weights_path, metric_spec,
                             matrices, out);
        if (certify->parsed())
            return cmd_certify(model_path, cover_spec, weights_path, metric_spec, condition,
                               dist_path, out);
        if (fbias->parsed())
            return cmd_filter_bias(model_path, partition_spec, n, n_seeds, seed, out);
        if (fvar->parsed())
            return cmd_filter_variance(model_path, partition_spec, n, Ns, n_seeds, seed, out);
        if (feas->parsed())
            return cmd_feasibility(eps, delta, r, Delta, DeltaK > 0 ? DeltaK : Delta, q_max,
                                   beta_lo, beta_hi, beta_points, out);
    } catch (const dob::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const dob::GuardError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGuard;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
