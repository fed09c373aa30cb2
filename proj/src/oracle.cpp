#include "dob/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "dob/parallel.hpp"

namespace dob {

namespace {
constexpr std::int64_t kEnumGuard = std::int64_t(1) << 24;

void check_enum_guard(std::int64_t n) {
    if (n > kEnumGuard) throw GuardError("exact enumeration exceeds 2^24 states");
}
} // namespace

void validate_model(const FactorModel& model) {
    if (model.factors.empty()) throw DobError("factor model needs at least one factor");
    for (const Factor& f : model.factors) {
        validate_region(model.space, f.region);
        if (f.region.empty()) throw DobError("factor region must be nonempty");
        if ((std::int64_t)f.table.size() != region_size(model.space, f.region))
            throw DobError("factor table size mismatch");
        bool any_pos = false;
        for (double v : f.table) {
            if (std::isnan(v) || v < 0.0 || std::isinf(v))
                throw DobError("factor entries must be finite and nonnegative");
            any_pos = any_pos || v > 0.0;
        }
        if (!any_pos) throw DobError("factor table is identically zero");
    }
}

double ExactMeasure::total() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

namespace {

// Precomputed strides mapping a joint index to a factor's table index.
struct FactorProjector {
    std::vector<std::int64_t> joint_stride;
    std::vector<int> joint_card;
    std::vector<std::int64_t> table_stride;

    FactorProjector(const StateSpace& space, const Region& region) {
        std::int64_t js = 1, ts = 1;
        std::size_t t = 0;
        for (int s = 0; s < space.n_sites(); ++s) {
            if (t < region.size() && region[t] == s) {
                joint_stride.push_back(js);
                joint_card.push_back(space.card[(std::size_t)s]);
                table_stride.push_back(ts);
                ts *= space.card[(std::size_t)s];
                ++t;
            }
            js *= space.card[(std::size_t)s];
        }
    }

    std::int64_t project(std::int64_t joint_idx) const {
        std::int64_t out = 0;
        for (std::size_t t = 0; t < joint_stride.size(); ++t)
            out += ((joint_idx / joint_stride[t]) % joint_card[t]) * table_stride[t];
        return out;
    }
};

} // namespace

ExactMeasure normalize(const FactorModel& model) {
    validate_model(model);
    const std::int64_t total = model.space.joint_size();
    check_enum_guard(total);

    std::vector<FactorProjector> proj;
    proj.reserve(model.factors.size());
    for (const Factor& f : model.factors) proj.emplace_back(model.space, f.region);

    ExactMeasure mu;
    mu.space = model.space;
    mu.p.assign((std::size_t)total, 0.0);
    par::parallel_for(total, [&](std::int64_t idx) {
        double v = 1.0;
        for (std::size_t f = 0; f < model.factors.size(); ++f)
            v *= model.factors[f].table[(std::size_t)proj[f].project(idx)];
        mu.p[(std::size_t)idx] = v;
    });

    double z = 0.0;
    for (double v : mu.p) z += v;
    if (!(z > 0.0)) throw DobError("factor product is identically zero");
    for (double& v : mu.p) v /= z;
    return mu;
}

ExactMeasure ref::normalize(const FactorModel& model) {
    validate_model(model);
    const std::int64_t total = model.space.joint_size();
    check_enum_guard(total);
    ExactMeasure mu;
    mu.space = model.space;
    mu.p.assign((std::size_t)total, 0.0);
    for (std::int64_t idx = 0; idx < total; ++idx) {
        Config x = config_of_index(model.space, idx);
        double v = 1.0;
        for (const Factor& f : model.factors)
            v *= f.table[(std::size_t)region_index(model.space, f.region, restrict_config(x, f.region))];
        mu.p[(std::size_t)idx] = v;
    }
    double z = 0.0;
    for (double v : mu.p) z += v;
    if (!(z > 0.0)) throw DobError("factor product is identically zero");
    for (double& v : mu.p) v /= z;
    return mu;
}

ExactMeasure uniform_measure(const StateSpace& space) {
    const std::int64_t total = space.joint_size();
    check_enum_guard(total);
    ExactMeasure mu;
    mu.space = space;
    mu.p.assign((std::size_t)total, 1.0 / (double)total);
    return mu;
}

ExactMeasure point_mass(const StateSpace& space, const Config& x) {
    const std::int64_t total = space.joint_size();
    check_enum_guard(total);
    ExactMeasure mu;
    mu.space = space;
    mu.p.assign((std::size_t)total, 0.0);
    mu.p[(std::size_t)config_index(space, x)] = 1.0;
    return mu;
}

std::vector<double> marginal(const ExactMeasure& mu, const Region& region) {
    validate_region(mu.space, region);
    const std::int64_t total = (std::int64_t)mu.p.size();
    const std::int64_t out_n = region_size(mu.space, region);
    FactorProjector proj(mu.space, region);
    return par::chunked_accumulate(total, out_n, [&](std::int64_t idx, std::vector<double>& out) {
        out[(std::size_t)proj.project(idx)] += mu.p[(std::size_t)idx];
    });
}

std::vector<double> ref::marginal(const ExactMeasure& mu, const Region& region) {
    validate_region(mu.space, region);
    std::vector<double> out((std::size_t)region_size(mu.space, region), 0.0);
    for (std::int64_t idx = 0; idx < (std::int64_t)mu.p.size(); ++idx) {
        Config x = config_of_index(mu.space, idx);
        out[(std::size_t)region_index(mu.space, region, restrict_config(x, region))] +=
            mu.p[(std::size_t)idx];
    }
    return out;
}

ConditionalKernel conditional_kernel(const ExactMeasure& mu, const Region& region) {
    validate_region(mu.space, region);
    if (region.empty()) throw DobError("conditional region must be nonempty");
    ConditionalKernel ker;
    ker.region = region;
    ker.boundary = region_complement(mu.space, region);
    ker.row_len = region_size(mu.space, region);
    ker.n_rows = region_size(mu.space, ker.boundary);
    check_enum_guard(ker.n_rows);
    ker.rows.assign((std::size_t)(ker.n_rows * ker.row_len), 0.0);
    ker.zero_row.assign((std::size_t)ker.n_rows, 0);

    par::parallel_for(ker.n_rows, [&](std::int64_t b) {
        Config bc = region_config(mu.space, ker.boundary, b);
        Config x((std::size_t)mu.space.n_sites(), 0);
        x = splice(x, ker.boundary, bc);
        double* row = ker.rows.data() + b * ker.row_len;
        double mass = 0.0;
        for (std::int64_t z = 0; z < ker.row_len; ++z) {
            Config zc = region_config(mu.space, region, z);
            Config full = splice(x, region, zc);
            row[z] = mu.p[(std::size_t)config_index(mu.space, full)];
            mass += row[z];
        }
        if (mass > 0.0) {
            for (std::int64_t z = 0; z < ker.row_len; ++z) row[z] /= mass;
        } else {
            ker.zero_row[(std::size_t)b] = 1;
            for (std::int64_t z = 0; z < ker.row_len; ++z) row[z] = 1.0 / (double)ker.row_len;
        }
    });
    return ker;
}

bool ConditionalKernel::any_zero_row() const {
    for (std::uint8_t z : zero_row)
        if (z) return true;
    return false;
}

double verify_invariance(const ExactMeasure& mu, const ConditionalKernel& kernel) {
    std::vector<double> bmass = marginal(mu, kernel.boundary);
    double worst = 0.0;
    for (std::int64_t idx = 0; idx < (std::int64_t)mu.p.size(); ++idx) {
        Config x = config_of_index(mu.space, idx);
        std::int64_t b = region_index(mu.space, kernel.boundary, restrict_config(x, kernel.boundary));
        std::int64_t z = region_index(mu.space, kernel.region, restrict_config(x, kernel.region));
        double updated = bmass[(std::size_t)b] * kernel.row(b)[z];
        worst = std::max(worst, std::fabs(updated - mu.p[(std::size_t)idx]));
    }
    return worst;
}

double l1_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DobError("l1_diff size mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += std::fabs(a[t] - b[t]);
    return s;
}

double tv_local(const ExactMeasure& mu, const ExactMeasure& nu, const Region& region) {
    if (mu.space.card != nu.space.card) throw DobError("tv_local spaces differ");
    return l1_diff(marginal(mu, region), marginal(nu, region));
}

double expectation(const ExactMeasure& mu, const LocalFunction& f) {
    std::vector<double> m = marginal(mu, f.region);
    double s = 0.0;
    for (std::size_t t = 0; t < m.size(); ++t) s += m[t] * f.table[t];
    return s;
}

} // namespace dob
