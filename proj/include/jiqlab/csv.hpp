#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jiqlab/measure.hpp"
#include "jiqlab/tail_curve.hpp"

namespace jiqlab::csv {

// Doubles are written in shortest round-trip form, so re-reading a file
// reproduces the in-memory values exactly. Empty fields mean "not available".

struct SummaryRow {
    std::string scenario_id;
    std::size_t n = 0;
    double lambda = 0.0;
    std::string policy;
    std::string dist;
    double busy_frac_mean = 0.0;
    double busy_frac_stderr = 0.0;
    std::optional<double> wait_prob;
    double blocked_frac = 0.0;
    std::optional<double> sup_dist_to_star;
    std::uint64_t events_processed = 0;
    double wall_seconds = 0.0;

    bool operator==(const SummaryRow&) const = default;
};

struct CurveRow {
    std::string scenario_id;
    CurveKind kind = CurveKind::empirical;
    double w = 0.0;
    double value = 0.0;
    std::optional<double> stderr_value;

    bool operator==(const CurveRow&) const = default;
};

struct IndependenceCsvRow {
    std::string scenario_id;
    double w1 = 0.0;
    double w2 = 0.0;
    double joint = 0.0;
    double product = 0.0;
    double diff = 0.0;

    bool operator==(const IndependenceCsvRow&) const = default;
};

struct ConvergenceCsvRow {
    std::string scenario_id;
    std::size_t n = 0;
    double sup_dist = 0.0;
    double wait_prob = 0.0;
    double ci = 0.0;

    bool operator==(const ConvergenceCsvRow&) const = default;
};

inline const char* kSummaryHeader =
    "scenario_id,n,lambda,policy,dist,busy_frac_mean,busy_frac_stderr,wait_prob,blocked_frac,"
    "sup_dist_to_star,events_processed,wall_seconds";
inline const char* kCurvesHeader = "scenario_id,kind,w,value,stderr";
inline const char* kIndependenceHeader = "scenario_id,w1,w2,joint,product,diff";
inline const char* kConvergenceHeader = "scenario_id,n,sup_dist,wait_prob,ci";

std::string format_double(double x);

void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows);
void write_curves(std::ostream& os, const std::vector<CurveRow>& rows);
void write_independence(std::ostream& os, const std::vector<IndependenceCsvRow>& rows);
void write_convergence(std::ostream& os, const std::vector<ConvergenceCsvRow>& rows);

// Readers throw Error on a wrong header or malformed field.
std::vector<SummaryRow> read_summary(std::istream& is);
std::vector<CurveRow> read_curves(std::istream& is);
std::vector<IndependenceCsvRow> read_independence(std::istream& is);
std::vector<ConvergenceCsvRow> read_convergence(std::istream& is);

std::vector<CurveRow> curve_rows(const std::string& scenario_id, const TailCurve& curve);
std::vector<ConvergenceCsvRow> convergence_rows(const ConvergenceTable& table);
std::vector<IndependenceCsvRow> independence_rows(const std::string& scenario_id,
                                                  const IndependenceResult& result);

}  // namespace jiqlab::csv
