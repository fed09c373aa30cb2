#include "dob/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "dob/rng.hpp"

namespace dob {

namespace {
constexpr std::uint64_t kTagBase = 0x71u;
constexpr std::uint64_t kTagPerturb = 0x72u;
constexpr std::uint64_t kTagEmit = 0x73u;
constexpr std::uint64_t kTagTrans = 0x74u;
constexpr std::uint64_t kTagObs = 0x75u;
} // namespace

LatticeGraph make_lattice(const std::vector<int>& shape, bool periodic, int radius) {
    if (shape.empty() || shape.size() > 2) throw DobError("lattice shape must have 1 or 2 dims");
    for (int d : shape)
        if (d < 1) throw DobError("lattice dims must be >= 1");
    if (radius < 0) throw DobError("lattice radius must be >= 0");

    LatticeGraph g;
    g.shape = shape;
    g.periodic = periodic;
    g.radius = radius;
    const int rows = shape[0];
    const int cols = shape.size() == 2 ? shape[1] : 1;
    g.n = rows * cols;
    g.adj.assign((std::size_t)g.n, {});

    auto vid = [&](int r, int c) { return r * cols + c; };
    auto link = [&](int a, int b) {
        if (a == b) return;
        auto& la = g.adj[(std::size_t)a];
        if (std::find(la.begin(), la.end(), b) == la.end()) {
            la.push_back(b);
            g.adj[(std::size_t)b].push_back(a);
        }
    };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (r + 1 < rows) link(vid(r, c), vid(r + 1, c));
            else if (periodic && rows > 2) link(vid(r, c), vid(0, c));
            if (shape.size() == 2) {
                if (c + 1 < cols) link(vid(r, c), vid(r, c + 1));
                else if (periodic && cols > 2) link(vid(r, c), vid(r, 0));
            }
        }
    for (auto& a : g.adj) std::sort(a.begin(), a.end());

    g.dist.assign((std::size_t)g.n * g.n, g.n + 1);
    for (int s = 0; s < g.n; ++s) {
        int* row = g.dist.data() + (std::size_t)s * g.n;
        row[s] = 0;
        std::deque<int> frontier{s};
        while (!frontier.empty()) {
            int v = frontier.front();
            frontier.pop_front();
            for (int w : g.adj[(std::size_t)v])
                if (row[w] > row[v] + 1) {
                    row[w] = row[v] + 1;
                    frontier.push_back(w);
                }
        }
    }
    g.nbhd.assign((std::size_t)g.n, {});
    for (int v = 0; v < g.n; ++v) {
        for (int w = 0; w < g.n; ++w)
            if (g.distance(v, w) <= radius) g.nbhd[(std::size_t)v].push_back(w);
        std::sort(g.nbhd[(std::size_t)v].begin(), g.nbhd[(std::size_t)v].end());
    }
    return g;
}

namespace {

// Draw a row of `k` density values in [lo, 1/lo] with mean 1.
std::vector<double> draw_envelope_row(Stream& st, int k, double lo) {
    const double hi = 1.0 / lo;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> row((std::size_t)k);
        double sum = 0.0;
        for (int i = 0; i < k; ++i) {
            row[(std::size_t)i] = lo + (hi - lo) * st.next_double();
            sum += row[(std::size_t)i];
        }
        const double scale = (double)k / sum;
        bool ok = true;
        for (int i = 0; i < k; ++i) {
            row[(std::size_t)i] *= scale;
            ok = ok && row[(std::size_t)i] >= lo && row[(std::size_t)i] <= hi;
        }
        if (ok) return row;
    }
    throw DobError("envelope row rejection sampling failed; floor " + std::to_string(lo) +
                   " is too tight for alphabet " + std::to_string(k));
}

std::int64_t nbhd_cfg_count(const LatticeHMM& m, int v) {
    std::int64_t c = 1;
    for (int w : m.graph.nbhd[(std::size_t)v]) c *= m.xcard[(std::size_t)w];
    return c;
}

} // namespace

void rebuild_transitions(LatticeHMM& model, double eps) {
    if (!(eps > 0.0) || eps > 1.0) throw DobError("eps must lie in (0,1]");
    model.eps = eps;
    const double s = (1.0 - eps) / (1.0 + eps);
    model.p.assign((std::size_t)model.graph.n, {});
    for (int v = 0; v < model.graph.n; ++v) {
        const int k = model.xcard[(std::size_t)v];
        const std::int64_t ncfg = nbhd_cfg_count(model, v);
        const int vpos = (int)(std::lower_bound(model.graph.nbhd[(std::size_t)v].begin(),
                                                model.graph.nbhd[(std::size_t)v].end(), v) -
                               model.graph.nbhd[(std::size_t)v].begin());
        std::int64_t vstride = 1;
        for (int t = 0; t < vpos; ++t)
            vstride *= model.xcard[(std::size_t)model.graph.nbhd[(std::size_t)v][(std::size_t)t]];

        auto& pv = model.p[(std::size_t)v];
        pv.assign((std::size_t)(ncfg * k), 0.0);
        for (std::int64_t cfg = 0; cfg < ncfg; ++cfg) {
            const int xv = int((cfg / vstride) % k);
            double sum = 0.0;
            for (int z = 0; z < k; ++z) {
                double u = model.perturb[(std::size_t)v][(std::size_t)(cfg * k + z)];
                double c = 1.0 + s * (2.0 * u - 1.0);
                double h = model.q[(std::size_t)v][(std::size_t)(xv * k + z)] * c;
                pv[(std::size_t)(cfg * k + z)] = h;
                sum += h;
            }
            const double scale = (double)k / sum;
            for (int z = 0; z < k; ++z) pv[(std::size_t)(cfg * k + z)] *= scale;
        }
    }
}

void verify_envelopes(const LatticeHMM& model) {
    auto fail = [](const std::string& what, int v, double value, double bound) {
        throw DobError("envelope violated: " + what + " at vertex " + std::to_string(v) +
                       " (entry " + std::to_string(value) + " vs bound " + std::to_string(bound) +
                       ")");
    };
    const double slack = 1e-12;
    for (int v = 0; v < model.graph.n; ++v) {
        const int k = model.xcard[(std::size_t)v];
        for (double val : model.q[(std::size_t)v]) {
            if (val < model.delta * (1.0 - slack)) fail("delta <= q", v, val, model.delta);
            if (val > (1.0 + slack) / model.delta) fail("q <= 1/delta", v, val, 1.0 / model.delta);
        }
        for (double val : model.g[(std::size_t)v]) {
            if (val < model.kappa * (1.0 - slack)) fail("kappa <= g", v, val, model.kappa);
            if (val > (1.0 + slack) / model.kappa) fail("g <= 1/kappa", v, val, 1.0 / model.kappa);
        }
        const std::int64_t ncfg = nbhd_cfg_count(model, v);
        const int vpos = (int)(std::lower_bound(model.graph.nbhd[(std::size_t)v].begin(),
                                                model.graph.nbhd[(std::size_t)v].end(), v) -
                               model.graph.nbhd[(std::size_t)v].begin());
        std::int64_t vstride = 1;
        for (int t = 0; t < vpos; ++t)
            vstride *= model.xcard[(std::size_t)model.graph.nbhd[(std::size_t)v][(std::size_t)t]];
        for (std::int64_t cfg = 0; cfg < ncfg; ++cfg) {
            const int xv = int((cfg / vstride) % k);
            for (int z = 0; z < k; ++z) {
                double pval = model.p[(std::size_t)v][(std::size_t)(cfg * k + z)];
                double qval = model.q[(std::size_t)v][(std::size_t)(xv * k + z)];
                if (pval < model.eps * qval * (1.0 - slack)) fail("eps*q <= p", v, pval, model.eps * qval);
                if (pval > qval / model.eps * (1.0 + slack)) fail("p <= q/eps", v, pval, qval / model.eps);
            }
        }
    }
}

LatticeHMM build_grid_model(const std::vector<int>& shape, int radius, double eps,
                            double delta_floor, double kappa, std::uint64_t seed, bool periodic,
                            int xcard, int ycard) {
    if (!(delta_floor > 0.0) || delta_floor >= 1.0) throw DobError("delta floor must lie in (0,1)");
    if (!(kappa > 0.0) || kappa >= 1.0) throw DobError("kappa must lie in (0,1)");
    if (xcard < 2 || ycard < 2) throw DobError("alphabets must have at least 2 letters");

    LatticeHMM m;
    m.graph = make_lattice(shape, periodic, radius);
    m.xcard.assign((std::size_t)m.graph.n, xcard);
    m.ycard.assign((std::size_t)m.graph.n, ycard);
    m.delta = delta_floor;
    m.kappa = kappa;

    m.q.assign((std::size_t)m.graph.n, {});
    m.g.assign((std::size_t)m.graph.n, {});
    m.perturb.assign((std::size_t)m.graph.n, {});
    for (int v = 0; v < m.graph.n; ++v) {
        for (int a = 0; a < xcard; ++a) {
            Stream st(seed, {kTagBase, (std::uint64_t)v, (std::uint64_t)a});
            std::vector<double> row = draw_envelope_row(st, xcard, delta_floor);
            m.q[(std::size_t)v].insert(m.q[(std::size_t)v].end(), row.begin(), row.end());
        }
        for (int a = 0; a < xcard; ++a) {
            Stream st(seed, {kTagEmit, (std::uint64_t)v, (std::uint64_t)a});
            std::vector<double> row = draw_envelope_row(st, ycard, kappa);
            m.g[(std::size_t)v].insert(m.g[(std::size_t)v].end(), row.begin(), row.end());
        }
        const std::int64_t ncfg = nbhd_cfg_count(m, v);
        Stream st(seed, {kTagPerturb, (std::uint64_t)v});
        m.perturb[(std::size_t)v].resize((std::size_t)(ncfg * xcard));
        for (auto& u : m.perturb[(std::size_t)v]) u = st.next_double();
    }
    rebuild_transitions(m, eps);
    verify_envelopes(m);
    return m;
}

Trajectory simulate(const LatticeHMM& model, int n, std::uint64_t seed, const Config* x0) {
    if (n < 0) throw DobError("simulation length must be >= 0");
    Trajectory tr;
    Config x = x0 ? *x0 : Config((std::size_t)model.graph.n, 0);
    if ((int)x.size() != model.graph.n) throw DobError("initial condition size mismatch");
    tr.x.push_back(x);
    for (int t = 1; t <= n; ++t) {
        Config z((std::size_t)model.graph.n, 0);
        for (int v = 0; v < model.graph.n; ++v) {
            const int k = model.xcard[(std::size_t)v];
            std::int64_t cfg = 0, stride = 1;
            for (int w : model.graph.nbhd[(std::size_t)v]) {
                cfg += stride * x[(std::size_t)w];
                stride *= model.xcard[(std::size_t)w];
            }
            Stream st(seed, {kTagTrans, (std::uint64_t)t, (std::uint64_t)v});
            z[(std::size_t)v] =
                st.next_categorical(model.p[(std::size_t)v].data() + cfg * k, k);
        }
        Config y((std::size_t)model.graph.n, 0);
        for (int v = 0; v < model.graph.n; ++v) {
            const int mY = model.ycard[(std::size_t)v];
            Stream st(seed, {kTagObs, (std::uint64_t)t, (std::uint64_t)v});
            y[(std::size_t)v] = st.next_categorical(
                model.g[(std::size_t)v].data() + (std::size_t)z[(std::size_t)v] * mY, mY);
        }
        tr.x.push_back(z);
        tr.y.push_back(y);
        x = std::move(z);
    }
    return tr;
}

Partition whole_partition(int n_vertices) {
    Partition p;
    Region all;
    for (int v = 0; v < n_vertices; ++v) all.push_back(v);
    p.blocks.push_back(all);
    return p;
}

Partition contiguous_partition(int n_vertices, int block_size) {
    if (block_size < 1) throw DobError("block size must be >= 1");
    Partition p;
    for (int start = 0; start < n_vertices; start += block_size) {
        Region b;
        for (int v = start; v < std::min(n_vertices, start + block_size); ++v) b.push_back(v);
        p.blocks.push_back(b);
    }
    return p;
}

void validate_partition(const LatticeGraph& graph, const Partition& partition) {
    std::vector<char> seen((std::size_t)graph.n, 0);
    if (partition.blocks.empty()) throw DobError("partition needs at least one block");
    for (const Region& b : partition.blocks) {
        if (b.empty()) throw DobError("partition block must be nonempty");
        for (std::size_t t = 0; t < b.size(); ++t) {
            int v = b[t];
            if (v < 0 || v >= graph.n) throw DobError("partition vertex out of range");
            if (t > 0 && b[t] <= b[t - 1])
                throw DobError("partition blocks must be strictly increasing");
            if (seen[(std::size_t)v]) throw DobError("partition blocks overlap");
            seen[(std::size_t)v] = 1;
        }
    }
    for (int v = 0; v < graph.n; ++v)
        if (!seen[(std::size_t)v]) throw DobError("partition misses vertex " + std::to_string(v));
}

Geometry geometry(const LatticeGraph& graph, const Partition& partition) {
    validate_partition(graph, partition);
    Geometry geo;
    geo.block_of.assign((std::size_t)graph.n, -1);
    for (std::size_t k = 0; k < partition.blocks.size(); ++k) {
        geo.max_block = std::max(geo.max_block, (int)partition.blocks[k].size());
        for (int v : partition.blocks[k]) geo.block_of[(std::size_t)v] = (int)k;
    }
    for (int v = 0; v < graph.n; ++v)
        geo.delta_graph = std::max(geo.delta_graph, (int)graph.nbhd[(std::size_t)v].size());

    geo.boundary.assign(partition.blocks.size(), {});
    for (std::size_t k = 0; k < partition.blocks.size(); ++k)
        for (int v : partition.blocks[k])
            for (int w : graph.nbhd[(std::size_t)v])
                if (geo.block_of[(std::size_t)w] != (int)k) {
                    geo.boundary[k].push_back(v);
                    break;
                }

    const int nb = (int)partition.blocks.size();
    for (int k = 0; k < nb; ++k) {
        int count = 0;
        for (int k2 = 0; k2 < nb; ++k2) {
            int dmin = graph.n + 1;
            for (int v : partition.blocks[(std::size_t)k])
                for (int w : partition.blocks[(std::size_t)k2])
                    dmin = std::min(dmin, graph.distance(v, w));
            if (dmin <= graph.radius) ++count;
        }
        geo.delta_blocks = std::max(geo.delta_blocks, count);
    }

    geo.dist_to_boundary.assign((std::size_t)graph.n, -1);
    for (int v = 0; v < graph.n; ++v) {
        const auto& bd = geo.boundary[(std::size_t)geo.block_of[(std::size_t)v]];
        int dmin = -1;
        for (int w : bd) {
            int d = graph.distance(v, w);
            if (dmin < 0 || d < dmin) dmin = d;
        }
        geo.dist_to_boundary[(std::size_t)v] = dmin;
    }
    return geo;
}

} // namespace dob
