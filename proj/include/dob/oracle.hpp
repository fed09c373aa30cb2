#pragma once

#include <cstdint>
#include <vector>

#include "dob/core.hpp"

// Brute-force inference for factor models small enough to enumerate.  This
// is the ground truth that every bound and every approximate filter is
// checked against.

namespace dob {

struct Factor {
    Region region;
    std::vector<double> table; // nonnegative, indexed by region_index
};

struct FactorModel {
    StateSpace space;
    std::vector<Factor> factors;
};

void validate_model(const FactorModel& model);

struct ExactMeasure {
    StateSpace space;
    std::vector<double> p; // joint probabilities, sums to 1 within 1e-12

    double total() const;
};

// Full joint table of the normalized factor product.  Enumerates every
// configuration; guarded at 2^24 joint states.
ExactMeasure normalize(const FactorModel& model);

ExactMeasure uniform_measure(const StateSpace& space);
ExactMeasure point_mass(const StateSpace& space, const Config& x);

// Marginal law of the sites in `region`, as a flat table.
std::vector<double> marginal(const ExactMeasure& mu, const Region& region);

// Single-site conditional distributions given everything outside `region`:
// one row of length |S^region| per boundary configuration.
struct ConditionalKernel {
    Region region;
    Region boundary; // complement of region
    std::int64_t n_rows = 0;
    std::int64_t row_len = 0;
    std::vector<double> rows;          // n_rows * row_len
    std::vector<std::uint8_t> zero_row; // rows hit by zero conditioning mass

    const double* row(std::int64_t b) const { return rows.data() + b * row_len; }
    bool any_zero_row() const;
};

ConditionalKernel conditional_kernel(const ExactMeasure& mu, const Region& region);

// Max pointwise gap between mu and the result of resampling `region` from
// the kernel.  Zero (to rounding) iff the kernel leaves mu invariant.
double verify_invariance(const ExactMeasure& mu, const ConditionalKernel& kernel);

// sup over functions of `region` with |f| <= 1 of |mu f - nu f|; equals the
// L1 gap of the marginals and lives in [0, 2].
double tv_local(const ExactMeasure& mu, const ExactMeasure& nu, const Region& region);

double l1_diff(const std::vector<double>& a, const std::vector<double>& b);

double expectation(const ExactMeasure& mu, const LocalFunction& f);

namespace ref {
// Serial twins of the enumeration kernels.
ExactMeasure normalize(const FactorModel& model);
std::vector<double> marginal(const ExactMeasure& mu, const Region& region);
} // namespace ref

} // namespace dob
