#include "dob/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dob {

namespace {

using json = nlohmann::ordered_json;

// tokenized line reader that skips blanks and # comments
struct Doc {
    std::istream& is;
    int lineno = 0;

    explicit Doc(std::istream& s) : is(s) {}

    std::vector<std::string> next() {
        std::string line;
        while (std::getline(is, line)) {
            ++lineno;
            std::istringstream ls(line);
            std::vector<std::string> toks;
            std::string t;
            while (ls >> t) toks.push_back(t);
            if (toks.empty() || toks[0][0] == '#') continue;
            return toks;
        }
        throw ParseError("unexpected end of document");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("line " + std::to_string(lineno) + ": " + what);
    }
};

std::int64_t to_int(Doc& doc, const std::string& tok) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (errno != 0 || end == tok.c_str() || *end != '\0') doc.fail("bad integer '" + tok + "'");
    return (std::int64_t)v;
}

double to_double(Doc& doc, const std::string& tok) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') doc.fail("bad number '" + tok + "'");
    return v;
}

void expect(Doc& doc, const std::vector<std::string>& toks, const std::string& kw,
            std::size_t min_args) {
    if (toks[0] != kw) doc.fail("expected '" + kw + "', got '" + toks[0] + "'");
    if (toks.size() < min_args + 1) doc.fail("'" + kw + "' needs " + std::to_string(min_args) + " values");
}

void put_doubles(std::ostream& os, const std::vector<double>& v) {
    for (double x : v) os << ' ' << format_double(x);
}

std::vector<double> read_table(Doc& doc, const std::string& kw) {
    auto toks = doc.next();
    expect(doc, toks, kw, 1);
    const std::int64_t len = to_int(doc, toks[1]);
    if (len < 0 || (std::size_t)len + 2 != toks.size()) doc.fail("'" + kw + "' length mismatch");
    std::vector<double> out;
    out.reserve((std::size_t)len);
    for (std::size_t i = 2; i < toks.size(); ++i) out.push_back(to_double(doc, toks[i]));
    return out;
}

std::vector<int> read_ints(Doc& doc, const std::vector<std::string>& toks, std::size_t from) {
    std::vector<int> out;
    for (std::size_t i = from; i < toks.size(); ++i) out.push_back((int)to_int(doc, toks[i]));
    return out;
}

void read_header(Doc& doc, const std::string& kind) {
    auto toks = doc.next();
    if (toks.size() != 2 || toks[0] != kind || toks[1] != "v1")
        doc.fail("expected '" + kind + " v1' header");
}

void read_end(Doc& doc) {
    auto toks = doc.next();
    if (toks[0] != "end") doc.fail("expected 'end'");
}

json meta_json(const MetaList& meta) {
    json m = json::object();
    m["version"] = kVersion;
    for (const auto& [k, v] : meta) m[k] = v;
    return m;
}

json doubles_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(format_double(x));
    return a;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

double parse_double(const std::string& tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw ParseError("bad number '" + tok + "'");
    return v;
}

void save_model(std::ostream& os, const FactorModel& model) {
    os << "factorgraph v1\n";
    os << "sites " << model.space.n_sites() << '\n';
    os << "cards";
    for (int c : model.space.card) os << ' ' << c;
    os << '\n';
    os << "factors " << model.factors.size() << '\n';
    for (const Factor& f : model.factors) {
        os << "factor " << f.region.size();
        for (int s : f.region) os << ' ' << s;
        os << '\n';
        os << "table " << f.table.size();
        put_doubles(os, f.table);
        os << '\n';
    }
    os << "end\n";
}

FactorModel load_model(std::istream& is) {
    Doc doc(is);
    read_header(doc, "factorgraph");

    auto toks = doc.next();
    expect(doc, toks, "sites", 1);
    const int n = (int)to_int(doc, toks[1]);
    if (n < 1) doc.fail("need at least one site");

    toks = doc.next();
    expect(doc, toks, "cards", 1);
    std::vector<int> cards = read_ints(doc, toks, 1);
    if ((int)cards.size() != n) doc.fail("cards count mismatch");

    FactorModel model;
    try {
        model.space = StateSpace(cards);
    } catch (const DobError& e) {
        doc.fail(e.what());
    }

    toks = doc.next();
    expect(doc, toks, "factors", 1);
    const std::int64_t nf = to_int(doc, toks[1]);

    for (std::int64_t i = 0; i < nf; ++i) {
        toks = doc.next();
        expect(doc, toks, "factor", 1);
        const std::int64_t k = to_int(doc, toks[1]);
        if ((std::size_t)k + 2 != toks.size()) doc.fail("factor region length mismatch");
        Factor f;
        f.region = read_ints(doc, toks, 2);
        f.table = read_table(doc, "table");
        model.factors.push_back(std::move(f));
    }
    read_end(doc);
    try {
        validate_model(model);
    } catch (const DobError& e) {
        doc.fail(e.what());
    }
    return model;
}

void save_hmm(std::ostream& os, const LatticeHMM& model) {
    os << "latticehmm v1\n";
    os << "shape " << model.graph.shape.size();
    for (int s : model.graph.shape) os << ' ' << s;
    os << '\n';
    os << "periodic " << (model.graph.periodic ? 1 : 0) << '\n';
    os << "radius " << model.graph.radius << '\n';
    os << "eps " << format_double(model.eps) << '\n';
    os << "delta " << format_double(model.delta) << '\n';
    os << "kappa " << format_double(model.kappa) << '\n';
    os << "xcards";
    for (int c : model.xcard) os << ' ' << c;
    os << '\n';
    os << "ycards";
    for (int c : model.ycard) os << ' ' << c;
    os << '\n';
    for (int v = 0; v < model.graph.n; ++v) {
        os << "vertex " << v << '\n';
        os << "q " << model.q[(std::size_t)v].size();
        put_doubles(os, model.q[(std::size_t)v]);
        os << '\n';
        os << "perturb " << model.perturb[(std::size_t)v].size();
        put_doubles(os, model.perturb[(std::size_t)v]);
        os << '\n';
        os << "p " << model.p[(std::size_t)v].size();
        put_doubles(os, model.p[(std::size_t)v]);
        os << '\n';
        os << "g " << model.g[(std::size_t)v].size();
        put_doubles(os, model.g[(std::size_t)v]);
        os << '\n';
    }
    os << "end\n";
}

LatticeHMM load_hmm(std::istream& is) {
    Doc doc(is);
    read_header(doc, "latticehmm");

    auto toks = doc.next();
    expect(doc, toks, "shape", 1);
    const std::int64_t nd = to_int(doc, toks[1]);
    if ((std::size_t)nd + 2 != toks.size()) doc.fail("shape length mismatch");
    std::vector<int> shape = read_ints(doc, toks, 2);

    toks = doc.next();
    expect(doc, toks, "periodic", 1);
    const bool periodic = to_int(doc, toks[1]) != 0;

    toks = doc.next();
    expect(doc, toks, "radius", 1);
    const int radius = (int)to_int(doc, toks[1]);

    LatticeHMM model;
    try {
        model.graph = make_lattice(shape, periodic, radius);
    } catch (const DobError& e) {
        doc.fail(e.what());
    }

    toks = doc.next();
    expect(doc, toks, "eps", 1);
    model.eps = to_double(doc, toks[1]);
    toks = doc.next();
    expect(doc, toks, "delta", 1);
    model.delta = to_double(doc, toks[1]);
    toks = doc.next();
    expect(doc, toks, "kappa", 1);
    model.kappa = to_double(doc, toks[1]);

    toks = doc.next();
    expect(doc, toks, "xcards", 1);
    model.xcard = read_ints(doc, toks, 1);
    toks = doc.next();
    expect(doc, toks, "ycards", 1);
    model.ycard = read_ints(doc, toks, 1);
    if ((int)model.xcard.size() != model.graph.n || (int)model.ycard.size() != model.graph.n)
        doc.fail("alphabet count mismatch");

    model.q.resize((std::size_t)model.graph.n);
    model.perturb.resize((std::size_t)model.graph.n);
    model.p.resize((std::size_t)model.graph.n);
    model.g.resize((std::size_t)model.graph.n);
    for (int v = 0; v < model.graph.n; ++v) {
        toks = doc.next();
        expect(doc, toks, "vertex", 1);
        if (to_int(doc, toks[1]) != v) doc.fail("vertices must appear in order");
        model.q[(std::size_t)v] = read_table(doc, "q");
        model.perturb[(std::size_t)v] = read_table(doc, "perturb");
        model.p[(std::size_t)v] = read_table(doc, "p");
        model.g[(std::size_t)v] = read_table(doc, "g");
    }
    read_end(doc);
    try {
        verify_envelopes(model);
    } catch (const DobError& e) {
        doc.fail(e.what());
    }
    return model;
}

void save_partition(std::ostream& os, const Partition& partition) {
    os << "partition v1\n";
    os << "blocks " << partition.blocks.size() << '\n';
    for (const Region& b : partition.blocks) {
        os << "block " << b.size();
        for (int v : b) os << ' ' << v;
        os << '\n';
    }
    os << "end\n";
}

Partition load_partition(std::istream& is) {
    Doc doc(is);
    read_header(doc, "partition");
    auto toks = doc.next();
    expect(doc, toks, "blocks", 1);
    const std::int64_t nb = to_int(doc, toks[1]);
    Partition out;
    for (std::int64_t i = 0; i < nb; ++i) {
        toks = doc.next();
        expect(doc, toks, "block", 1);
        const std::int64_t k = to_int(doc, toks[1]);
        if ((std::size_t)k + 2 != toks.size()) doc.fail("block length mismatch");
        out.blocks.push_back(read_ints(doc, toks, 2));
    }
    read_end(doc);
    return out;
}

void save_metrics(std::ostream& os, const std::vector<SiteMetric>& metrics) {
    os << "metrics v1\n";
    os << "sites " << metrics.size() << '\n';
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        const SiteMetric& m = metrics[i];
        os << "metric " << i << ' ' << m.k << (m.trivial ? " trivial" : " table") << '\n';
        if (!m.trivial) {
            os << "table " << m.table.size();
            put_doubles(os, m.table);
            os << '\n';
        }
    }
    os << "end\n";
}

std::vector<SiteMetric> load_metrics(std::istream& is) {
    Doc doc(is);
    read_header(doc, "metrics");
    auto toks = doc.next();
    expect(doc, toks, "sites", 1);
    const std::int64_t n = to_int(doc, toks[1]);
    std::vector<SiteMetric> out;
    for (std::int64_t i = 0; i < n; ++i) {
        toks = doc.next();
        expect(doc, toks, "metric", 3);
        if (to_int(doc, toks[1]) != i) doc.fail("metrics must appear in order");
        const int k = (int)to_int(doc, toks[2]);
        if (toks[3] == "trivial") {
            out.push_back(SiteMetric::make_trivial(k));
        } else if (toks[3] == "table") {
            try {
                out.push_back(SiteMetric::make_table(k, read_table(doc, "table")));
            } catch (const DobError& e) {
                doc.fail(e.what());
            }
        } else {
            doc.fail("metric kind must be 'trivial' or 'table'");
        }
    }
    read_end(doc);
    return out;
}

void save_weights(std::ostream& os, const std::vector<double>& w) {
    os << "weights v1\n";
    os << "count " << w.size() << '\n';
    os << "w" << (w.empty() ? " " : "");
    put_doubles(os, w);
    os << '\n';
    os << "end\n";
}

std::vector<double> load_weights(std::istream& is) {
    Doc doc(is);
    read_header(doc, "weights");
    auto toks = doc.next();
    expect(doc, toks, "count", 1);
    const std::int64_t n = to_int(doc, toks[1]);
    toks = doc.next();
    expect(doc, toks, "w", 0);
    if ((std::size_t)n + 1 != toks.size()) doc.fail("weight count mismatch");
    std::vector<double> out;
    for (std::size_t i = 1; i < toks.size(); ++i) out.push_back(to_double(doc, toks[i]));
    read_end(doc);
    return out;
}

std::string error_curve_csv(const ErrorCurve& curve) {
    std::ostringstream os;
    os << "experiment_id,n,block_size,site,dist_to_boundary,N,replicates,error,stderr\n";
    for (const ErrorRow& r : curve.rows) {
        os << r.experiment_id << ',' << r.n << ',' << r.block_size << ',' << r.site << ','
           << r.dist_to_boundary << ',' << r.N << ',' << r.replicates << ','
           << format_double(r.error) << ',' << format_double(r.stderr_) << '\n';
    }
    return os.str();
}

std::string certificate_document(const Certificate& cert, const MetaList& meta) {
    json j;
    j["document"] = "uniqueness-certificate";
    j["meta"] = meta_json(meta);
    j["condition"] = cert.condition;
    j["pass"] = cert.pass;
    json w = json::object();
    for (const auto& [k, v] : cert.witness) w[k] = format_double(v);
    j["witness"] = w;
    j["rescaled"] = cert.rescaled;
    j["zero_mass_rows"] = cert.zero_mass_rows;
    if (!cert.note.empty()) j["note"] = cert.note;
    return j.dump(2) + "\n";
}

std::string bound_report_document(const BoundReport& report, bool include_matrices,
                                  const MetaList& meta) {
    json j;
    j["document"] = "comparison-bound";
    j["meta"] = meta_json(meta);
    j["certified"] = report.certified;
    j["rescaled"] = report.rescaled;
    j["rescale_factor"] = format_double(report.rescale_factor);
    j["zero_mass_rows"] = report.zero_mass_rows;
    json neumann;
    neumann["converged"] = report.D.converged;
    neumann["terms_used"] = report.D.terms_used;
    neumann["residual"] = format_double(report.D.residual);
    j["neumann"] = neumann;
    j["bounds"] = doubles_json(report.bounds);
    j["exact"] = doubles_json(report.exact);
    if (include_matrices) {
        j["W_diag"] = doubles_json(report.W);
        j["R"] = doubles_json(report.R.a);
        j["a"] = doubles_json(report.a);
    }
    if (!report.note.empty()) j["note"] = report.note;
    return j.dump(2) + "\n";
}

std::string feasibility_document(const FeasibilityResult& res, const MetaList& meta) {
    json j;
    j["document"] = "feasibility";
    j["meta"] = meta_json(meta);
    j["feasible"] = res.feasible;
    j["q"] = res.q;
    j["beta"] = format_double(res.beta);
    j["c"] = format_double(res.c);
    j["beta_max"] = format_double(res.beta_max);
    j["q_min_feasible"] = res.q_min_feasible;
    j["feasible_var"] = res.feasible_var;
    j["q_var"] = res.q_var;
    j["beta_var"] = format_double(res.beta_var);
    j["c_var"] = format_double(res.c_var);
    j["regime"] = res.regime;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DobError("cannot open '" + path + "' for writing");
    os << text;
    if (!os) throw DobError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void save_model_file(const std::string& path, const FactorModel& model) {
    std::ostringstream os;
    save_model(os, model);
    write_text_file(path, os.str());
}

FactorModel load_model_file(const std::string& path) {
    std::istringstream is(read_text_file(path));
    return load_model(is);
}

void save_hmm_file(const std::string& path, const LatticeHMM& model) {
    std::ostringstream os;
    save_hmm(os, model);
    write_text_file(path, os.str());
}

LatticeHMM load_hmm_file(const std::string& path) {
    std::istringstream is(read_text_file(path));
    return load_hmm(is);
}

Partition load_partition_file(const std::string& path) {
    std::istringstream is(read_text_file(path));
    return load_partition(is);
}

std::vector<SiteMetric> load_metrics_file(const std::string& path) {
    std::istringstream is(read_text_file(path));
    return load_metrics(is);
}

std::vector<double> load_weights_file(const std::string& path) {
    std::istringstream is(read_text_file(path));
    return load_weights(is);
}

} // namespace dob
