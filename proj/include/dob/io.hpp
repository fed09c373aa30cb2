#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dob/blockpf.hpp"
#include "dob/comparison.hpp"
#include "dob/hmm.hpp"
#include "dob/oracle.hpp"

// Line-oriented document formats with explicit version headers.  Every
// floating-point value is printed with full round-trip precision, so a
// document reloads to bit-identical tables.

namespace dob {

inline constexpr const char* kVersion = "0.1.0";

struct ParseError : DobError {
    using DobError::DobError;
};

// shortest %.17g-style text that parses back to the same double
std::string format_double(double v);
double parse_double(const std::string& tok);

void save_model(std::ostream& os, const FactorModel& model);
FactorModel load_model(std::istream& is);
void save_model_file(const std::string& path, const FactorModel& model);
FactorModel load_model_file(const std::string& path);

void save_hmm(std::ostream& os, const LatticeHMM& model);
LatticeHMM load_hmm(std::istream& is);
void save_hmm_file(const std::string& path, const LatticeHMM& model);
LatticeHMM load_hmm_file(const std::string& path);

void save_partition(std::ostream& os, const Partition& partition);
Partition load_partition(std::istream& is);
Partition load_partition_file(const std::string& path);

void save_metrics(std::ostream& os, const std::vector<SiteMetric>& metrics);
std::vector<SiteMetric> load_metrics(std::istream& is);
std::vector<SiteMetric> load_metrics_file(const std::string& path);

void save_weights(std::ostream& os, const std::vector<double>& w);
std::vector<double> load_weights(std::istream& is);
std::vector<double> load_weights_file(const std::string& path);

// CSV with the fixed column order
// experiment_id,n,block_size,site,dist_to_boundary,N,replicates,error,stderr
std::string error_curve_csv(const ErrorCurve& curve);

// JSON documents; `meta` pairs (key, preformatted value) are embedded under
// "meta" so runs carry their seed, inputs, and tolerances.
using MetaList = std::vector<std::pair<std::string, std::string>>;

std::string certificate_document(const Certificate& cert, const MetaList& meta = {});
std::string bound_report_document(const BoundReport& report, bool include_matrices = false,
                                  const MetaList& meta = {});
std::string feasibility_document(const FeasibilityResult& res, const MetaList& meta = {});

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace dob
