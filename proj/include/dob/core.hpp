#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Finite product state spaces: a configuration assigns each site a letter
// from that site's alphabet.  Tables over a set of sites are stored flat in
// mixed-radix order with the first listed site as the fastest-varying digit.

namespace dob {

using Config = std::vector<int>;
using Region = std::vector<int>; // strictly increasing site ids

struct DobError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GuardError : DobError {
    using DobError::DobError;
};

struct StateSpace {
    std::vector<int> card; // alphabet size per site

    StateSpace() = default;
    explicit StateSpace(std::vector<int> sizes);

    int n_sites() const { return (int)card.size(); }
    std::int64_t joint_size() const;
};

// Number of configurations of `region` under `space`.
std::int64_t region_size(const StateSpace& space, const Region& region);

// Flat index of a partial configuration over `region` (values listed in
// region order, first site fastest).
std::int64_t region_index(const StateSpace& space, const Region& region, const Config& values);

// Inverse of region_index.
Config region_config(const StateSpace& space, const Region& region, std::int64_t index);

// Full-space shorthands (region = all sites).
std::int64_t config_index(const StateSpace& space, const Config& x);
Config config_of_index(const StateSpace& space, std::int64_t index);

// Values of x at the sites of region, in region order.
Config restrict_config(const Config& x, const Region& region);

// Copy of x with the sites of region overwritten by values.
Config splice(const Config& x, const Region& region, const Config& values);

void validate_region(const StateSpace& space, const Region& region);
Region region_complement(const StateSpace& space, const Region& region);
Region region_union(const Region& a, const Region& b);
bool region_contains(const Region& region, int site);

// Per-site metric on an alphabet: either the trivial 0/1 metric or an
// explicit symmetric table with zero diagonal and the triangle inequality.
struct SiteMetric {
    int k = 0;
    bool trivial = true;
    std::vector<double> table; // k*k when !trivial

    static SiteMetric make_trivial(int k);
    static SiteMetric make_table(int k, std::vector<double> table);

    double operator()(int a, int b) const {
        if (trivial) return a == b ? 0.0 : 1.0;
        return table[(std::size_t)a * k + b];
    }
    double max_value() const;
};

std::vector<SiteMetric> trivial_metrics(const StateSpace& space);

// Function of the configuration that depends only on the sites in `region`.
struct LocalFunction {
    Region region;
    std::vector<double> table; // indexed by region_index

    double eval(const StateSpace& space, const Config& x) const;
};

LocalFunction indicator_at(const StateSpace& space, const Region& region, const Config& values);

// Oscillation of f in coordinate j: sup |f(x)-f(z)| / eta_j(x_j, z_j) over
// pairs x,z that differ only at j.  Zero when f does not read site j.
double oscillation(const StateSpace& space, const LocalFunction& f, int j, const SiteMetric& eta_j);

std::vector<double> oscillation_vector(const StateSpace& space, const LocalFunction& f,
                                       const std::vector<SiteMetric>& metrics);

} // namespace dob
