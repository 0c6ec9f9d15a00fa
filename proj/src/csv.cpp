#include "jiqlab/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "jiqlab/error.hpp"

namespace jiqlab::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& field) {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw Error("csv: malformed number '" + field + "'");
    }
    return value;
}

std::optional<double> parse_optional(const std::string& field) {
    if (field.empty()) return std::nullopt;
    return parse_number<double>(field);
}

std::string opt(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

template <class Row, class Parse>
std::vector<Row> read_table(std::istream& is, const char* header, std::size_t columns,
                            Parse&& parse) {
    std::string line;
    if (!std::getline(is, line) || line != header) {
        throw Error(std::string("csv: expected header '") + header + "'");
    }
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != columns) {
            throw Error("csv: expected " + std::to_string(columns) + " fields in '" + line + "'");
        }
        rows.push_back(parse(f));
    }
    return rows;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        os << r.scenario_id << ',' << r.n << ',' << format_double(r.lambda) << ',' << r.policy << ','
           << r.dist << ',' << format_double(r.busy_frac_mean) << ','
           << format_double(r.busy_frac_stderr) << ',' << opt(r.wait_prob) << ','
           << format_double(r.blocked_frac) << ',' << opt(r.sup_dist_to_star) << ','
           << r.events_processed << ',' << format_double(r.wall_seconds) << '\n';
    }
}

void write_curves(std::ostream& os, const std::vector<CurveRow>& rows) {
    os << kCurvesHeader << '\n';
    for (const auto& r : rows) {
        os << r.scenario_id << ',' << to_string(r.kind) << ',' << format_double(r.w) << ','
           << format_double(r.value) << ',' << opt(r.stderr_value) << '\n';
    }
}

void write_independence(std::ostream& os, const std::vector<IndependenceCsvRow>& rows) {
    os << kIndependenceHeader << '\n';
    for (const auto& r : rows) {
        os << r.scenario_id << ',' << format_double(r.w1) << ',' << format_double(r.w2) << ','
           << format_double(r.joint) << ',' << format_double(r.product) << ','
           << format_double(r.diff) << '\n';
    }
}

void write_convergence(std::ostream& os, const std::vector<ConvergenceCsvRow>& rows) {
    os << kConvergenceHeader << '\n';
    for (const auto& r : rows) {
        os << r.scenario_id << ',' << r.n << ',' << format_double(r.sup_dist) << ','
           << format_double(r.wait_prob) << ',' << format_double(r.ci) << '\n';
    }
}

std::vector<SummaryRow> read_summary(std::istream& is) {
    return read_table<SummaryRow>(is, kSummaryHeader, 12, [](const std::vector<std::string>& f) {
        SummaryRow r;
        r.scenario_id = f[0];
        r.n = parse_number<std::size_t>(f[1]);
        r.lambda = parse_number<double>(f[2]);
        r.policy = f[3];
        r.dist = f[4];
        r.busy_frac_mean = parse_number<double>(f[5]);
        r.busy_frac_stderr = parse_number<double>(f[6]);
        r.wait_prob = parse_optional(f[7]);
        r.blocked_frac = parse_number<double>(f[8]);
        r.sup_dist_to_star = parse_optional(f[9]);
        r.events_processed = parse_number<std::uint64_t>(f[10]);
        r.wall_seconds = parse_number<double>(f[11]);
        return r;
    });
}

std::vector<CurveRow> read_curves(std::istream& is) {
    return read_table<CurveRow>(is, kCurvesHeader, 5, [](const std::vector<std::string>& f) {
        CurveRow r;
        r.scenario_id = f[0];
        r.kind = curve_kind_from_string(f[1]);
        r.w = parse_number<double>(f[2]);
        r.value = parse_number<double>(f[3]);
        r.stderr_value = parse_optional(f[4]);
        return r;
    });
}

std::vector<IndependenceCsvRow> read_independence(std::istream& is) {
    return read_table<IndependenceCsvRow>(is, kIndependenceHeader, 6,
                                          [](const std::vector<std::string>& f) {
                                              IndependenceCsvRow r;
                                              r.scenario_id = f[0];
                                              r.w1 = parse_number<double>(f[1]);
                                              r.w2 = parse_number<double>(f[2]);
                                              r.joint = parse_number<double>(f[3]);
                                              r.product = parse_number<double>(f[4]);
                                              r.diff = parse_number<double>(f[5]);
                                              return r;
                                          });
}

std::vector<ConvergenceCsvRow> read_convergence(std::istream& is) {
    return read_table<ConvergenceCsvRow>(is, kConvergenceHeader, 5,
                                         [](const std::vector<std::string>& f) {
                                             ConvergenceCsvRow r;
                                             r.scenario_id = f[0];
                                             r.n = parse_number<std::size_t>(f[1]);
                                             r.sup_dist = parse_number<double>(f[2]);
                                             r.wait_prob = parse_number<double>(f[3]);
                                             r.ci = parse_number<double>(f[4]);
                                             return r;
                                         });
}

std::vector<CurveRow> curve_rows(const std::string& scenario_id, const TailCurve& curve) {
    std::vector<CurveRow> rows;
    rows.reserve(curve.values.size());
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        CurveRow r{scenario_id, curve.kind, curve.grid[i], curve.values[i], std::nullopt};
        if (curve.has_stderr()) r.stderr_value = curve.stderrs[i];
        rows.push_back(r);
    }
    return rows;
}

std::vector<ConvergenceCsvRow> convergence_rows(const ConvergenceTable& table) {
    std::vector<ConvergenceCsvRow> rows;
    for (const auto& r : table.rows) {
        rows.push_back({r.scenario_id, r.n, r.sup_dist, r.wait_prob, r.ci});
    }
    return rows;
}

std::vector<IndependenceCsvRow> independence_rows(const std::string& scenario_id,
                                                  const IndependenceResult& result) {
    std::vector<IndependenceCsvRow> rows;
    for (const auto& r : result.rows) {
        rows.push_back({scenario_id, r.levels.at(0), r.levels.size() > 1 ? r.levels[1] : 0.0,
                        r.joint, r.product, r.diff});
    }
    return rows;
}

}  // namespace jiqlab::csv
