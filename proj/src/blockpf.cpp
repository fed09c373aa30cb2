#include "dob/blockpf.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "dob/parallel.hpp"
#include "dob/rng.hpp"

namespace dob {

namespace {

constexpr std::uint64_t kTagPfIdx = 0x81u;
constexpr std::uint64_t kTagPfProp = 0x82u;
constexpr std::uint64_t kTagPfRes = 0x83u;
constexpr std::uint64_t kTagSample = 0x84u;
constexpr std::uint64_t kTagBiasObs = 0x85u;
constexpr std::uint64_t kTagVarObs = 0x86u;
constexpr std::uint64_t kTagVarPf = 0x87u;

constexpr std::int64_t kEnumGuard = std::int64_t(1) << 24;

// strides for projecting a flat config of `region` onto `target` (target
// must be a subset of region; both sorted)
struct SubProjector {
    std::vector<std::int64_t> src_stride;
    std::vector<int> src_card;
    std::vector<std::int64_t> dst_stride;

    SubProjector(const StateSpace& space, const Region& region, const Region& target) {
        std::int64_t ds = 1;
        for (int s : target) {
            std::int64_t ss = 1;
            bool found = false;
            for (int r : region) {
                if (r == s) { found = true; break; }
                ss *= space.card[(std::size_t)r];
            }
            if (!found) throw DobError("projection target escapes region");
            src_stride.push_back(ss);
            src_card.push_back(space.card[(std::size_t)s]);
            dst_stride.push_back(ds);
            ds *= space.card[(std::size_t)s];
        }
    }

    std::int64_t operator()(std::int64_t idx) const {
        std::int64_t out = 0;
        for (std::size_t t = 0; t < src_stride.size(); ++t)
            out += ((idx / src_stride[t]) % src_card[t]) * dst_stride[t];
        return out;
    }
};

std::vector<double> table_marginal(const StateSpace& space, const Region& region,
                                   const std::vector<double>& table, const Region& target) {
    SubProjector proj(space, region, target);
    std::vector<double> out((std::size_t)region_size(space, target), 0.0);
    for (std::int64_t idx = 0; idx < (std::int64_t)table.size(); ++idx)
        out[(std::size_t)proj(idx)] += table[(std::size_t)idx];
    return out;
}

Config default_x0(const LatticeHMM& model) { return Config((std::size_t)model.graph.n, 0); }

int draw_index(Stream& st, int N) {
    int idx = (int)(st.next_double() * N);
    return std::min(idx, N - 1);
}

// Running sums of w, so resampling can pick in O(log N).  Picks the same
// index the linear accumulation in Stream::next_categorical would.
std::vector<double> weight_cdf(const std::vector<double>& w) {
    std::vector<double> cdf(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        cdf[i] = acc;
    }
    return cdf;
}

int cdf_pick(const std::vector<double>& cdf, double u) {
    return (int)(std::upper_bound(cdf.begin(), cdf.end() - 1, u) - cdf.begin());
}

Region block_neighborhood(const LatticeHMM& model, const Region& block) {
    Region nk;
    for (int v : block) nk = region_union(nk, Region(model.graph.nbhd[(std::size_t)v]));
    return nk;
}

} // namespace

ExactMeasure predict_exact(const LatticeHMM& model, const ExactMeasure& pi) {
    const StateSpace& space = pi.space;
    const std::int64_t total = space.joint_size();
    const int nv = model.graph.n;

    Region all;
    for (int v = 0; v < nv; ++v) all.push_back(v);
    std::vector<SubProjector> nbproj;
    nbproj.reserve((std::size_t)nv);
    for (int v = 0; v < nv; ++v)
        nbproj.emplace_back(space, all, Region(model.graph.nbhd[(std::size_t)v]));

    // memoize each configuration's neighborhood projections when small
    const bool memo = (double)nv * (double)total <= (double)kEnumGuard;
    std::vector<std::vector<std::int32_t>> nbcfg;
    if (memo) {
        nbcfg.assign((std::size_t)nv, std::vector<std::int32_t>((std::size_t)total));
        par::parallel_for(total, [&](std::int64_t x) {
            for (int v = 0; v < nv; ++v)
                nbcfg[(std::size_t)v][(std::size_t)x] = (std::int32_t)nbproj[(std::size_t)v](x);
        });
    }

    ExactMeasure out;
    out.space = space;
    out.p.assign((std::size_t)total, 0.0);
    par::parallel_for(total, [&](std::int64_t z) {
        Config zc = config_of_index(space, z);
        double s = 0.0;
        for (std::int64_t x = 0; x < total; ++x) {
            double w = pi.p[(std::size_t)x];
            if (w == 0.0) continue;
            double prod = 1.0;
            for (int v = 0; v < nv; ++v) {
                const std::int64_t cfg = memo ? nbcfg[(std::size_t)v][(std::size_t)x]
                                              : nbproj[(std::size_t)v](x);
                prod *= model.trans_prob(v, cfg, zc[(std::size_t)v]);
            }
            s += w * prod;
        }
        out.p[(std::size_t)z] = s;
    });
    return out;
}

ExactMeasure ref::predict_exact(const LatticeHMM& model, const ExactMeasure& pi) {
    const StateSpace& space = pi.space;
    const std::int64_t total = space.joint_size();
    const int nv = model.graph.n;
    ExactMeasure out;
    out.space = space;
    out.p.assign((std::size_t)total, 0.0);
    for (std::int64_t z = 0; z < total; ++z) {
        Config zc = config_of_index(space, z);
        double s = 0.0;
        for (std::int64_t x = 0; x < total; ++x) {
            double w = pi.p[(std::size_t)x];
            if (w == 0.0) continue;
            Config xc = config_of_index(space, x);
            double prod = 1.0;
            for (int v = 0; v < nv; ++v) {
                std::int64_t cfg = 0, stride = 1;
                for (int u : model.graph.nbhd[(std::size_t)v]) {
                    cfg += stride * xc[(std::size_t)u];
                    stride *= space.card[(std::size_t)u];
                }
                prod *= model.trans_prob(v, cfg, zc[(std::size_t)v]);
            }
            s += w * prod;
        }
        out.p[(std::size_t)z] = s;
    }
    return out;
}

ExactMeasure correct_exact(const LatticeHMM& model, const ExactMeasure& pi, const Config& y) {
    if ((int)y.size() != model.graph.n) throw DobError("observation size mismatch");
    ExactMeasure out = pi;
    double z = 0.0;
    for (std::int64_t idx = 0; idx < (std::int64_t)out.p.size(); ++idx) {
        Config xc = config_of_index(out.space, idx);
        double lik = 1.0;
        for (int v = 0; v < model.graph.n; ++v)
            lik *= model.emit_density(v, xc[(std::size_t)v], y[(std::size_t)v]);
        out.p[(std::size_t)idx] *= lik;
        z += out.p[(std::size_t)idx];
    }
    if (!(z > 0.0)) throw DobError("correction step has zero total likelihood");
    for (double& v : out.p) v /= z;
    return out;
}

std::vector<ExactMeasure> exact_filter(const LatticeHMM& model, const std::vector<Config>& ys,
                                       const Config* x0) {
    Config start = x0 ? *x0 : default_x0(model);
    std::vector<ExactMeasure> out;
    out.push_back(point_mass(model.hidden_space(), start));
    for (const Config& y : ys)
        out.push_back(correct_exact(model, predict_exact(model, out.back()), y));
    return out;
}

ExactMeasure brute_force_filter(const LatticeHMM& model, const std::vector<Config>& ys,
                                const Config* x0) {
    const StateSpace space = model.hidden_space();
    const std::int64_t total = space.joint_size();
    const int n = (int)ys.size();
    if (n == 0) return point_mass(space, x0 ? *x0 : default_x0(model));
    double paths = 1.0;
    for (int t = 0; t < n; ++t) paths *= (double)total;
    if (paths > (double)kEnumGuard) throw GuardError("path enumeration exceeds 2^24 paths");

    Config start = x0 ? *x0 : default_x0(model);
    ExactMeasure out;
    out.space = space;
    out.p.assign((std::size_t)total, 0.0);
    const std::int64_t n_paths = (std::int64_t)paths;
    double z = 0.0;
    for (std::int64_t pth = 0; pth < n_paths; ++pth) {
        std::int64_t rest = pth;
        Config prev = start;
        double w = 1.0;
        std::int64_t last = 0;
        for (int t = 0; t < n; ++t) {
            std::int64_t xi = rest % total;
            rest /= total;
            Config xc = config_of_index(space, xi);
            for (int v = 0; v < model.graph.n; ++v) {
                std::int64_t cfg = 0, stride = 1;
                for (int u : model.graph.nbhd[(std::size_t)v]) {
                    cfg += stride * prev[(std::size_t)u];
                    stride *= space.card[(std::size_t)u];
                }
                w *= model.trans_prob(v, cfg, xc[(std::size_t)v]);
                w *= model.emit_density(v, xc[(std::size_t)v], ys[(std::size_t)t][(std::size_t)v]);
            }
            prev = xc;
            last = xi;
        }
        out.p[(std::size_t)last] += w;
        z += w;
    }
    if (!(z > 0.0)) throw DobError("path enumeration has zero total likelihood");
    for (double& v : out.p) v /= z;
    return out;
}

BlockState blockify(const ExactMeasure& pi, const Partition& partition) {
    BlockState st;
    st.partition = partition;
    for (const Region& b : partition.blocks) st.tables.push_back(marginal(pi, b));
    return st;
}

BlockState predict_block(const LatticeHMM& model, const BlockState& state) {
    const StateSpace space = model.hidden_space();
    BlockState out;
    out.partition = state.partition;
    out.tables.resize(state.partition.blocks.size());

    par::parallel_for((std::int64_t)state.partition.blocks.size(), [&](std::int64_t kb) {
        const Region& block = state.partition.blocks[(std::size_t)kb];
        const Region nk = block_neighborhood(model, block);
        const std::int64_t n_cfg = region_size(space, nk);
        if (n_cfg > kEnumGuard) throw GuardError("block neighborhood enumeration exceeds 2^24");

        // weight of each neighborhood config under the product of block laws
        struct Contrib {
            SubProjector proj;
            std::vector<double> marg;
        };
        std::vector<Contrib> contribs;
        for (std::size_t k2 = 0; k2 < state.partition.blocks.size(); ++k2) {
            Region t;
            std::set_intersection(nk.begin(), nk.end(),
                                  state.partition.blocks[k2].begin(),
                                  state.partition.blocks[k2].end(), std::back_inserter(t));
            if (t.empty()) continue;
            contribs.push_back({SubProjector(space, nk, t),
                                table_marginal(space, state.partition.blocks[k2],
                                               state.tables[k2], t)});
        }

        std::vector<SubProjector> nbproj;
        for (int v : block) nbproj.emplace_back(space, nk, Region(model.graph.nbhd[(std::size_t)v]));

        const std::int64_t out_n = region_size(space, block);
        std::vector<double> table((std::size_t)out_n, 0.0);
        for (std::int64_t u = 0; u < n_cfg; ++u) {
            double w = 1.0;
            for (const Contrib& c : contribs) w *= c.marg[(std::size_t)c.proj(u)];
            if (w == 0.0) continue;
            for (std::int64_t z = 0; z < out_n; ++z) {
                Config zc = region_config(space, block, z);
                double prod = 1.0;
                for (std::size_t tv = 0; tv < block.size(); ++tv)
                    prod *= model.trans_prob(block[tv], nbproj[tv](u), zc[tv]);
                table[(std::size_t)z] += w * prod;
            }
        }
        out.tables[(std::size_t)kb] = std::move(table);
    });
    return out;
}

BlockState correct_block(const LatticeHMM& model, const BlockState& state, const Config& y) {
    const StateSpace space = model.hidden_space();
    BlockState out = state;
    for (std::size_t kb = 0; kb < out.partition.blocks.size(); ++kb) {
        const Region& block = out.partition.blocks[kb];
        auto& table = out.tables[kb];
        double z = 0.0;
        for (std::int64_t idx = 0; idx < (std::int64_t)table.size(); ++idx) {
            Config zc = region_config(space, block, idx);
            double lik = 1.0;
            for (std::size_t tv = 0; tv < block.size(); ++tv)
                lik *= model.emit_density(block[tv], zc[tv], y[(std::size_t)block[tv]]);
            table[(std::size_t)idx] *= lik;
            z += table[(std::size_t)idx];
        }
        if (!(z > 0.0)) throw DobError("block correction has zero total likelihood");
        for (double& v : table) v /= z;
    }
    return out;
}

BlockState block_filter(const LatticeHMM& model, const Partition& partition,
                        const std::vector<Config>& ys, const Config* x0) {
    validate_partition(model.graph, partition);
    BlockState st = blockify(point_mass(model.hidden_space(), x0 ? *x0 : default_x0(model)),
                             partition);
    for (const Config& y : ys) st = correct_block(model, predict_block(model, st), y);
    return st;
}

ParticleState sample_state(const StateSpace& space, const BlockState& state, int N,
                           std::uint64_t seed) {
    if (N < 1) throw DobError("particle count must be >= 1");
    ParticleState ps;
    ps.partition = state.partition;
    ps.N = N;
    ps.blocks.resize(state.partition.blocks.size());
    for (std::size_t kb = 0; kb < state.partition.blocks.size(); ++kb) {
        ps.blocks[kb].resize((std::size_t)N);
        for (int l = 0; l < N; ++l) {
            Stream st(seed, {kTagSample, (std::uint64_t)kb, (std::uint64_t)l});
            std::int64_t idx = st.next_categorical(state.tables[kb]);
            ps.blocks[kb][(std::size_t)l] = region_config(space, state.partition.blocks[kb], idx);
        }
    }
    return ps;
}

ParticleState bpf_predict(const LatticeHMM& model, const ParticleState& state, int t,
                          std::uint64_t seed) {
    const StateSpace space = model.hidden_space();
    const int N = state.N;
    const std::size_t nb = state.partition.blocks.size();

    std::vector<int> block_of((std::size_t)model.graph.n, -1);
    std::vector<std::vector<int>> pos_in_block((std::size_t)model.graph.n);
    for (std::size_t kb = 0; kb < nb; ++kb)
        for (std::size_t p = 0; p < state.partition.blocks[kb].size(); ++p)
            block_of[(std::size_t)state.partition.blocks[kb][p]] = (int)kb;

    ParticleState out;
    out.partition = state.partition;
    out.N = N;
    out.blocks.assign(nb, std::vector<Config>((std::size_t)N));

    // per block: which blocks its neighborhood reads, in ascending order
    std::vector<std::vector<int>> feeds(nb);
    for (std::size_t kb = 0; kb < nb; ++kb) {
        const Region nk = block_neighborhood(model, state.partition.blocks[kb]);
        std::vector<char> used(nb, 0);
        for (int v : nk) used[(std::size_t)block_of[(std::size_t)v]] = 1;
        for (std::size_t k2 = 0; k2 < nb; ++k2)
            if (used[k2]) feeds[kb].push_back((int)k2);
    }

    par::parallel_for((std::int64_t)(nb * (std::size_t)N), [&](std::int64_t cell) {
        const std::size_t kb = (std::size_t)(cell / N);
        const int l = (int)(cell % N);
        const Region& block = state.partition.blocks[kb];

        // ancestor index per feeding block, drawn once and reused
        std::vector<int> pick(nb, -1);
        for (int k2 : feeds[kb]) {
            Stream st(seed, {kTagPfIdx, (std::uint64_t)t, (std::uint64_t)kb, (std::uint64_t)l,
                             (std::uint64_t)k2});
            pick[(std::size_t)k2] = draw_index(st, N);
        }

        auto value_at = [&](int v) {
            const int k2 = block_of[(std::size_t)v];
            const Region& b2 = state.partition.blocks[(std::size_t)k2];
            const std::size_t p = (std::size_t)(std::lower_bound(b2.begin(), b2.end(), v) -
                                                b2.begin());
            return state.blocks[(std::size_t)k2][(std::size_t)pick[(std::size_t)k2]][p];
        };

        Config zc(block.size());
        for (std::size_t tv = 0; tv < block.size(); ++tv) {
            const int v = block[tv];
            const int k = model.xcard[(std::size_t)v];
            std::int64_t cfg = 0, stride = 1;
            for (int u : model.graph.nbhd[(std::size_t)v]) {
                cfg += stride * value_at(u);
                stride *= space.card[(std::size_t)u];
            }
            Stream st(seed, {kTagPfProp, (std::uint64_t)t, (std::uint64_t)kb, (std::uint64_t)l,
                             (std::uint64_t)v});
            zc[tv] = st.next_categorical(model.p[(std::size_t)v].data() + cfg * k, k);
        }
        out.blocks[kb][(std::size_t)l] = std::move(zc);
    });
    return out;
}

ParticleState bpf_correct_resample(const LatticeHMM& model, const ParticleState& state,
                                   const Config& y, int t, std::uint64_t seed, bool systematic) {
    const int N = state.N;
    ParticleState out;
    out.partition = state.partition;
    out.N = N;
    out.blocks.resize(state.partition.blocks.size());

    par::parallel_for((std::int64_t)state.partition.blocks.size(), [&](std::int64_t kb) {
        const Region& block = state.partition.blocks[(std::size_t)kb];
        std::vector<double> w((std::size_t)N, 1.0);
        for (int l = 0; l < N; ++l)
            for (std::size_t tv = 0; tv < block.size(); ++tv)
                w[(std::size_t)l] *= model.emit_density(
                    block[tv], state.blocks[(std::size_t)kb][(std::size_t)l][tv],
                    y[(std::size_t)block[tv]]);

        std::vector<Config> res((std::size_t)N);
        if (systematic) {
            double tot = 0.0;
            for (double v : w) tot += v;
            Stream st(seed, {kTagPfRes, (std::uint64_t)t, (std::uint64_t)kb});
            const double u0 = st.next_double();
            int src = 0;
            double cum = w[0] / tot;
            for (int s = 0; s < N; ++s) {
                const double target = (s + u0) / N;
                while (cum < target && src + 1 < N) {
                    ++src;
                    cum += w[(std::size_t)src] / tot;
                }
                res[(std::size_t)s] = state.blocks[(std::size_t)kb][(std::size_t)src];
            }
        } else {
            double tot = 0.0;
            for (double v : w) tot += v;
            const std::vector<double> cdf = weight_cdf(w);
            for (int s = 0; s < N; ++s) {
                Stream st(seed, {kTagPfRes, (std::uint64_t)t, (std::uint64_t)kb, (std::uint64_t)s});
                const int pick = cdf_pick(cdf, st.next_double() * tot);
                res[(std::size_t)s] = state.blocks[(std::size_t)kb][(std::size_t)pick];
            }
        }
        out.blocks[(std::size_t)kb] = std::move(res);
    });
    return out;
}

ParticleState block_particle_filter(const LatticeHMM& model, const Partition& partition,
                                    const std::vector<Config>& ys, int N, std::uint64_t seed,
                                    bool systematic, const Config* x0) {
    validate_partition(model.graph, partition);
    if (N < 1) throw DobError("particle count must be >= 1");
    Config start = x0 ? *x0 : default_x0(model);
    ParticleState st;
    st.partition = partition;
    st.N = N;
    st.blocks.resize(partition.blocks.size());
    for (std::size_t kb = 0; kb < partition.blocks.size(); ++kb)
        st.blocks[kb].assign((std::size_t)N, restrict_config(start, partition.blocks[kb]));
    for (std::size_t t = 0; t < ys.size(); ++t) {
        st = bpf_predict(model, st, (int)t + 1, seed);
        st = bpf_correct_resample(model, st, ys[t], (int)t + 1, seed, systematic);
    }
    return st;
}

ParticleState bootstrap_filter(const LatticeHMM& model, const std::vector<Config>& ys, int N,
                               std::uint64_t seed, bool systematic, const Config* x0) {
    if (N < 1) throw DobError("particle count must be >= 1");
    const StateSpace space = model.hidden_space();
    const int nv = model.graph.n;
    Config start = x0 ? *x0 : default_x0(model);
    std::vector<Config> parts((std::size_t)N, start);

    for (std::size_t step = 0; step < ys.size(); ++step) {
        const int t = (int)step + 1;
        std::vector<Config> moved((std::size_t)N);
        for (int l = 0; l < N; ++l) {
            Stream sidx(seed, {kTagPfIdx, (std::uint64_t)t, 0ull, (std::uint64_t)l, 0ull});
            const Config& src = parts[(std::size_t)draw_index(sidx, N)];
            Config zc((std::size_t)nv);
            for (int v = 0; v < nv; ++v) {
                const int k = model.xcard[(std::size_t)v];
                std::int64_t cfg = 0, stride = 1;
                for (int u : model.graph.nbhd[(std::size_t)v]) {
                    cfg += stride * src[(std::size_t)u];
                    stride *= space.card[(std::size_t)u];
                }
                Stream st(seed, {kTagPfProp, (std::uint64_t)t, 0ull, (std::uint64_t)l,
                                 (std::uint64_t)v});
                zc[(std::size_t)v] = st.next_categorical(model.p[(std::size_t)v].data() + cfg * k, k);
            }
            moved[(std::size_t)l] = std::move(zc);
        }
        std::vector<double> w((std::size_t)N, 1.0);
        for (int l = 0; l < N; ++l)
            for (int v = 0; v < nv; ++v)
                w[(std::size_t)l] *= model.emit_density(v, moved[(std::size_t)l][(std::size_t)v],
                                                        ys[step][(std::size_t)v]);
        std::vector<Config> res((std::size_t)N);
        if (systematic) {
            double tot = 0.0;
            for (double v : w) tot += v;
            Stream st(seed, {kTagPfRes, (std::uint64_t)t, 0ull});
            const double u0 = st.next_double();
            int src = 0;
            double cum = w[0] / tot;
            for (int s = 0; s < N; ++s) {
                const double target = (s + u0) / N;
                while (cum < target && src + 1 < N) {
                    ++src;
                    cum += w[(std::size_t)src] / tot;
                }
                res[(std::size_t)s] = moved[(std::size_t)src];
            }
        } else {
            double tot = 0.0;
            for (double v : w) tot += v;
            const std::vector<double> cdf = weight_cdf(w);
            for (int s = 0; s < N; ++s) {
                Stream st(seed, {kTagPfRes, (std::uint64_t)t, 0ull, (std::uint64_t)s});
                const int pick = cdf_pick(cdf, st.next_double() * tot);
                res[(std::size_t)s] = moved[(std::size_t)pick];
            }
        }
        parts = std::move(res);
    }

    ParticleState out;
    out.partition = whole_partition(nv);
    out.N = N;
    out.blocks.push_back(std::move(parts));
    return out;
}

std::vector<double> state_marginal(const StateSpace& space, const BlockState& state,
                                   const Region& region) {
    validate_region(space, region);
    std::vector<std::vector<double>> parts;
    std::vector<Region> part_regions;
    for (std::size_t kb = 0; kb < state.partition.blocks.size(); ++kb) {
        Region t;
        std::set_intersection(region.begin(), region.end(), state.partition.blocks[kb].begin(),
                              state.partition.blocks[kb].end(), std::back_inserter(t));
        if (t.empty()) continue;
        parts.push_back(table_marginal(space, state.partition.blocks[kb], state.tables[kb], t));
        part_regions.push_back(t);
    }
    std::vector<double> out((std::size_t)region_size(space, region), 0.0);
    std::vector<SubProjector> proj;
    for (const Region& t : part_regions) proj.emplace_back(space, region, t);
    for (std::int64_t idx = 0; idx < (std::int64_t)out.size(); ++idx) {
        double v = 1.0;
        for (std::size_t p = 0; p < parts.size(); ++p)
            v *= parts[p][(std::size_t)proj[p](idx)];
        out[(std::size_t)idx] = v;
    }
    return out;
}

std::vector<double> state_marginal(const StateSpace& space, const ParticleState& state,
                                   const Region& region) {
    validate_region(space, region);
    BlockState tables;
    tables.partition = state.partition;
    tables.tables.resize(state.partition.blocks.size());
    for (std::size_t kb = 0; kb < state.partition.blocks.size(); ++kb) {
        const Region& block = state.partition.blocks[kb];
        std::vector<double> tab((std::size_t)region_size(space, block), 0.0);
        const double unit = 1.0 / state.N;
        for (const Config& c : state.blocks[kb])
            tab[(std::size_t)region_index(space, block, c)] += unit;
        tables.tables[kb] = std::move(tab);
    }
    return state_marginal(space, tables, region);
}

TnormEstimate tnorm_estimate(const std::vector<std::vector<double>>& diffs) {
    if (diffs.empty()) throw DobError("error norm needs at least one run");
    const int m = (int)diffs[0].size();
    if (m < 1) throw DobError("error norm needs a nonempty marginal");
    if (m > 16)
        throw GuardError("sign enumeration limited to 16 cells; restrict to smaller regions");
    const int S = (int)diffs.size();
    for (const auto& d : diffs)
        if ((int)d.size() != m) throw DobError("error norm: run size mismatch");

    std::vector<double> M((std::size_t)m * m, 0.0);
    for (const auto& d : diffs)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) M[(std::size_t)i * m + j] += d[(std::size_t)i] * d[(std::size_t)j] / S;

    TnormEstimate est;
    est.sign_patterns = std::int64_t(1) << (m - 1);
    double best = -1.0;
    std::vector<double> bestf;
    std::vector<double> f((std::size_t)m, 1.0);
    for (std::int64_t pat = 0; pat < est.sign_patterns; ++pat) {
        f[0] = 1.0;
        for (int i = 1; i < m; ++i) f[(std::size_t)i] = (pat >> (i - 1)) & 1 ? -1.0 : 1.0;
        double val = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                val += f[(std::size_t)i] * M[(std::size_t)i * m + j] * f[(std::size_t)j];
        if (val > best) {
            best = val;
            bestf = f;
        }
    }
    best = std::max(best, 0.0);
    est.value = std::sqrt(best);

    if (best > 0.0 && S > 1) {
        double mean = 0.0, sq = 0.0;
        for (const auto& d : diffs) {
            double fd = 0.0;
            for (int i = 0; i < m; ++i) fd += bestf[(std::size_t)i] * d[(std::size_t)i];
            const double v = fd * fd;
            mean += v;
            sq += v * v;
        }
        mean /= S;
        const double var = std::max(0.0, sq / S - mean * mean) * S / (S - 1.0);
        const double se_mean = std::sqrt(var / S);
        est.stderr_ = se_mean / (2.0 * std::sqrt(mean));
    }
    return est;
}

ErrorCurve bias_experiment(const LatticeHMM& model, const Partition& partition, int n,
                           int n_obs_seqs, std::uint64_t seed) {
    if (n_obs_seqs < 1) throw DobError("bias experiment needs at least one observation sequence");
    const StateSpace space = model.hidden_space();
    const Geometry geo = geometry(model.graph, partition);
    const int nv = model.graph.n;

    std::vector<std::vector<double>> errs((std::size_t)n_obs_seqs);
    par::parallel_for(n_obs_seqs, [&](std::int64_t rep) {
        const std::uint64_t s = stream_base(seed, {kTagBiasObs, (std::uint64_t)rep});
        Trajectory tr = simulate(model, n, s);
        std::vector<ExactMeasure> exact = exact_filter(model, tr.y);
        BlockState block = block_filter(model, partition, tr.y);
        std::vector<double> e((std::size_t)nv, 0.0);
        for (int v = 0; v < nv; ++v)
            e[(std::size_t)v] = l1_diff(marginal(exact.back(), {v}),
                                        state_marginal(space, block, {v}));
        errs[(std::size_t)rep] = std::move(e);
    });

    ErrorCurve curve;
    for (int v = 0; v < nv; ++v) {
        double mean = 0.0, sq = 0.0;
        for (int rep = 0; rep < n_obs_seqs; ++rep) {
            mean += errs[(std::size_t)rep][(std::size_t)v];
            sq += errs[(std::size_t)rep][(std::size_t)v] * errs[(std::size_t)rep][(std::size_t)v];
        }
        mean /= n_obs_seqs;
        double se = 0.0;
        if (n_obs_seqs > 1) {
            const double var = std::max(0.0, sq / n_obs_seqs - mean * mean) * n_obs_seqs /
                               (n_obs_seqs - 1.0);
            se = std::sqrt(var / n_obs_seqs);
        }
        ErrorRow row;
        row.experiment_id = "bias";
        row.n = n;
        row.block_size = (int)partition.blocks[(std::size_t)geo.block_of[(std::size_t)v]].size();
        row.site = v;
        row.dist_to_boundary = geo.dist_to_boundary[(std::size_t)v];
        row.N = 0;
        row.replicates = n_obs_seqs;
        row.error = mean;
        row.stderr_ = se;
        curve.rows.push_back(row);
    }
    return curve;
}

ErrorCurve variance_experiment(const LatticeHMM& model, const Partition& partition, int n,
                               const std::vector<int>& Ns, int n_seeds, std::uint64_t seed) {
    if (n_seeds < 1) throw DobError("variance experiment needs at least one seed");
    const StateSpace space = model.hidden_space();
    const Geometry geo = geometry(model.graph, partition);
    const int nv = model.graph.n;

    Trajectory tr = simulate(model, n, stream_base(seed, {kTagVarObs}));
    BlockState refstate = block_filter(model, partition, tr.y);
    std::vector<std::vector<double>> refmarg((std::size_t)nv);
    for (int v = 0; v < nv; ++v) refmarg[(std::size_t)v] = state_marginal(space, refstate, {v});

    ErrorCurve curve;
    for (int N : Ns) {
        // diffs[s][v] = particle marginal minus reference marginal at site v
        std::vector<std::vector<std::vector<double>>> diffs((std::size_t)n_seeds);
        par::parallel_for(n_seeds, [&](std::int64_t s) {
            const std::uint64_t ps = stream_base(seed, {kTagVarPf, (std::uint64_t)N, (std::uint64_t)s});
            ParticleState pf = block_particle_filter(model, partition, tr.y, N, ps);
            std::vector<std::vector<double>> d((std::size_t)nv);
            for (int v = 0; v < nv; ++v) {
                std::vector<double> pm = state_marginal(space, pf, {v});
                for (std::size_t a = 0; a < pm.size(); ++a) pm[a] -= refmarg[(std::size_t)v][a];
                d[(std::size_t)v] = std::move(pm);
            }
            diffs[(std::size_t)s] = std::move(d);
        });

        for (int v = 0; v < nv; ++v) {
            std::vector<std::vector<double>> dv((std::size_t)n_seeds);
            for (int s = 0; s < n_seeds; ++s) dv[(std::size_t)s] = diffs[(std::size_t)s][(std::size_t)v];
            TnormEstimate est = tnorm_estimate(dv);
            ErrorRow row;
            row.experiment_id = "variance";
            row.n = n;
            row.block_size = (int)partition.blocks[(std::size_t)geo.block_of[(std::size_t)v]].size();
            row.site = v;
            row.dist_to_boundary = geo.dist_to_boundary[(std::size_t)v];
            row.N = N;
            row.replicates = n_seeds;
            row.error = est.value;
            row.stderr_ = est.stderr_;
            curve.rows.push_back(row);
        }
    }
    return curve;
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 2) throw DobError("slope fit needs at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : xy) {
        if (!(x > 0.0) || !(y > 0.0)) throw DobError("slope fit needs positive values");
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = (double)xy.size();
    return (sxy - sx * sy / n) / (sxx - sx * sx / n);
}

double c_bias(double eps, double delta, int r, int Delta, int q, double beta) {
    const double u = 1.0 - eps * eps * delta * delta;
    return 3.0 * q * Delta * Delta * std::exp(beta * (q + 2.0 * r)) *
               (1.0 - std::pow(eps, 2.0 * (Delta + 1))) +
           std::exp(beta) * u + std::exp(beta * q) * std::pow(u, q);
}

double c_variance(double eps, double delta, int r, int Delta, int q, double beta) {
    const double u = 1.0 - eps * eps * delta * delta;
    return 3.0 * q * Delta * Delta * std::exp(beta * q) *
               (1.0 - std::pow(eps, 2.0 * (Delta + 1))) +
           std::exp(beta) * u + std::exp(beta * q) * std::pow(u, q);
}

FeasibilityResult feasibility_search(double eps, double delta, int r, int Delta, int DeltaK,
                                     int q_max, double beta_lo, double beta_hi, int beta_points) {
    if (!(eps > 0.0) || eps > 1.0) throw DobError("eps must lie in (0,1]");
    if (!(delta > 0.0) || delta >= 1.0) throw DobError("delta must lie in (0,1)");
    if (beta_points < 2 || !(beta_lo > 0.0) || !(beta_hi > beta_lo))
        throw DobError("bad beta grid");

    std::vector<double> betas((std::size_t)beta_points);
    const double lstep = (std::log(beta_hi) - std::log(beta_lo)) / (beta_points - 1);
    for (int i = 0; i < beta_points; ++i)
        betas[(std::size_t)i] = std::exp(std::log(beta_lo) + i * lstep);

    FeasibilityResult res;
    res.c = res.c_var = std::numeric_limits<double>::infinity();
    for (int q = 1; q <= q_max; ++q) {
        bool q_feasible = false;
        for (double beta : betas) {
            const double cb = c_bias(eps, delta, r, Delta, q, beta);
            const double cv = c_variance(eps, delta, r, Delta, q, beta);
            if (cb < res.c) {
                res.c = cb;
                res.q = q;
                res.beta = beta;
            }
            if (cv < res.c_var) {
                res.c_var = cv;
                res.q_var = q;
                res.beta_var = beta;
            }
            q_feasible = q_feasible || cb < 1.0;
        }
        if (q_feasible && res.q_min_feasible == 0) res.q_min_feasible = q;
    }
    res.feasible = res.c < 1.0;
    res.feasible_var = res.c_var < 1.0;
    if (res.feasible)
        for (double beta : betas)
            if (c_bias(eps, delta, r, Delta, res.q, beta) < 1.0) res.beta_max = beta;

    const double growth = std::exp(-res.beta_var) * DeltaK;
    if (growth < 1.0)
        res.regime = "subcritical: sampling error ~ N^(-1/2)";
    else if (growth == 1.0)
        res.regime = "critical: sampling error ~ sqrt(log N / N)";
    else
        res.regime = "supercritical: sampling error ~ N^(-beta/(2 log m)) with m = e^-beta * blocks-in-range";
    return res;
}

} // namespace dob
