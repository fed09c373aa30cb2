#include "dob/core.hpp"

#include <algorithm>
#include <cmath>

namespace dob {

namespace {
constexpr std::int64_t kJointGuard = std::int64_t(1) << 31;
}

StateSpace::StateSpace(std::vector<int> sizes) : card(std::move(sizes)) {
    if (card.empty()) throw DobError("state space needs at least one site");
    std::int64_t prod = 1;
    for (int k : card) {
        if (k < 1) throw DobError("alphabet size must be >= 1");
        prod *= k;
        if (prod > kJointGuard) throw GuardError("joint state space exceeds 2^31");
    }
}

std::int64_t StateSpace::joint_size() const {
    std::int64_t prod = 1;
    for (int k : card) prod *= k;
    return prod;
}

void validate_region(const StateSpace& space, const Region& region) {
    for (std::size_t t = 0; t < region.size(); ++t) {
        if (region[t] < 0 || region[t] >= space.n_sites())
            throw DobError("region site out of range: " + std::to_string(region[t]));
        if (t > 0 && region[t] <= region[t - 1])
            throw DobError("region sites must be strictly increasing");
    }
}

std::int64_t region_size(const StateSpace& space, const Region& region) {
    std::int64_t prod = 1;
    for (int s : region) prod *= space.card[(std::size_t)s];
    return prod;
}

std::int64_t region_index(const StateSpace& space, const Region& region, const Config& values) {
    std::int64_t idx = 0, stride = 1;
    for (std::size_t t = 0; t < region.size(); ++t) {
        idx += stride * values[t];
        stride *= space.card[(std::size_t)region[t]];
    }
    return idx;
}

Config region_config(const StateSpace& space, const Region& region, std::int64_t index) {
    Config values(region.size());
    for (std::size_t t = 0; t < region.size(); ++t) {
        int k = space.card[(std::size_t)region[t]];
        values[t] = int(index % k);
        index /= k;
    }
    return values;
}

std::int64_t config_index(const StateSpace& space, const Config& x) {
    std::int64_t idx = 0, stride = 1;
    for (int s = 0; s < space.n_sites(); ++s) {
        idx += stride * x[(std::size_t)s];
        stride *= space.card[(std::size_t)s];
    }
    return idx;
}

Config config_of_index(const StateSpace& space, std::int64_t index) {
    Config x((std::size_t)space.n_sites());
    for (int s = 0; s < space.n_sites(); ++s) {
        int k = space.card[(std::size_t)s];
        x[(std::size_t)s] = int(index % k);
        index /= k;
    }
    return x;
}

Config restrict_config(const Config& x, const Region& region) {
    Config out(region.size());
    for (std::size_t t = 0; t < region.size(); ++t) out[t] = x[(std::size_t)region[t]];
    return out;
}

Config splice(const Config& x, const Region& region, const Config& values) {
    Config out = x;
    for (std::size_t t = 0; t < region.size(); ++t) out[(std::size_t)region[t]] = values[t];
    return out;
}

Region region_complement(const StateSpace& space, const Region& region) {
    Region out;
    std::size_t t = 0;
    for (int s = 0; s < space.n_sites(); ++s) {
        if (t < region.size() && region[t] == s) { ++t; continue; }
        out.push_back(s);
    }
    return out;
}

Region region_union(const Region& a, const Region& b) {
    Region out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool region_contains(const Region& region, int site) {
    return std::binary_search(region.begin(), region.end(), site);
}

SiteMetric SiteMetric::make_trivial(int k) {
    if (k < 1) throw DobError("metric alphabet must be >= 1");
    SiteMetric m;
    m.k = k;
    m.trivial = true;
    return m;
}

SiteMetric SiteMetric::make_table(int k, std::vector<double> table) {
    if (k < 1) throw DobError("metric alphabet must be >= 1");
    if ((std::int64_t)table.size() != (std::int64_t)k * k)
        throw DobError("metric table size mismatch");
    for (int a = 0; a < k; ++a) {
        if (table[(std::size_t)a * k + a] != 0.0)
            throw DobError("metric diagonal must be zero");
        for (int b = 0; b < k; ++b) {
            double v = table[(std::size_t)a * k + b];
            if (!(v >= 0.0) || !std::isfinite(v))
                throw DobError("metric entries must be finite and nonnegative");
            if (a != b && v <= 0.0)
                throw DobError("metric must be positive off the diagonal");
            if (v != table[(std::size_t)b * k + a])
                throw DobError("metric must be symmetric");
        }
    }
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            for (int c = 0; c < k; ++c)
                if (table[(std::size_t)a * k + b] >
                    table[(std::size_t)a * k + c] + table[(std::size_t)c * k + b] + 1e-15)
                    throw DobError("metric violates the triangle inequality");
    SiteMetric m;
    m.k = k;
    m.trivial = false;
    m.table = std::move(table);
    return m;
}

double SiteMetric::max_value() const {
    if (trivial) return k > 1 ? 1.0 : 0.0;
    double mx = 0.0;
    for (double v : table) mx = std::max(mx, v);
    return mx;
}

std::vector<SiteMetric> trivial_metrics(const StateSpace& space) {
    std::vector<SiteMetric> out;
    out.reserve((std::size_t)space.n_sites());
    for (int k : space.card) out.push_back(SiteMetric::make_trivial(k));
    return out;
}

double LocalFunction::eval(const StateSpace& space, const Config& x) const {
    return table[(std::size_t)region_index(space, region, restrict_config(x, region))];
}

LocalFunction indicator_at(const StateSpace& space, const Region& region, const Config& values) {
    LocalFunction f;
    f.region = region;
    f.table.assign((std::size_t)region_size(space, region), 0.0);
    f.table[(std::size_t)region_index(space, region, values)] = 1.0;
    return f;
}

double oscillation(const StateSpace& space, const LocalFunction& f, int j, const SiteMetric& eta_j) {
    auto pos = std::lower_bound(f.region.begin(), f.region.end(), j);
    if (pos == f.region.end() || *pos != j) return 0.0;
    const std::size_t t = (std::size_t)(pos - f.region.begin());

    // strides within f.table for walking site j with the rest frozen
    std::int64_t stride = 1;
    for (std::size_t u = 0; u < t; ++u) stride *= space.card[(std::size_t)f.region[u]];
    const int k = space.card[(std::size_t)j];
    const std::int64_t total = (std::int64_t)f.table.size();
    const std::int64_t block = stride * k;

    double sup = 0.0;
    for (std::int64_t base = 0; base < total; base += block) {
        for (std::int64_t lo = 0; lo < stride; ++lo) {
            for (int a = 0; a < k; ++a) {
                for (int b = a + 1; b < k; ++b) {
                    double num = std::fabs(f.table[(std::size_t)(base + lo + stride * a)] -
                                           f.table[(std::size_t)(base + lo + stride * b)]);
                    if (num == 0.0) continue;
                    sup = std::max(sup, num / eta_j(a, b));
                }
            }
        }
    }
    return sup;
}

std::vector<double> oscillation_vector(const StateSpace& space, const LocalFunction& f,
                                       const std::vector<SiteMetric>& metrics) {
    std::vector<double> out((std::size_t)space.n_sites(), 0.0);
    for (int j = 0; j < space.n_sites(); ++j)
        out[(std::size_t)j] = oscillation(space, f, j, metrics[(std::size_t)j]);
    return out;
}

} // namespace dob
